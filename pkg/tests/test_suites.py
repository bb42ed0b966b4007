import json
import math
from pathlib import Path

import pytest

from app.errors import ConfigError
from app.runner.instance import load_instance, parse_instance
from app.runner.reports import CheckResult, RunReport, SuiteResult, load_report, render_summary, write_report
from app.runner.suites import (
    DualitySuite,
    FolnerSuite,
    IdentitySuite,
    InequalitiesSuite,
    OracleSuite,
    SuiteRunner,
    default_runner,
)

ROOT = Path(__file__).resolve().parent.parent


class TestInstanceFiles:
    """Test suite for parsing and validating instance files."""

    @pytest.mark.parametrize(
        "name",
        ["full-4-to-2", "identity", "collapse-to-point", "classical", "golden-mean-to-point", "full-3-to-2"],
    )
    def test_shipped_configs_load(self, name):
        """Every shipped instance builds its chain, potential and measure."""
        instance = load_instance(ROOT / "configs" / f"{name}.toml")
        assert instance.name == name
        assert len(instance.exponents) == instance.chain.r - 1
        assert instance.potential.validate(instance.chain.system(1)) is None

    def test_bad_exponent_reports_line(self):
        """An exponent above 1 is rejected with the line of the key."""
        with pytest.raises(ConfigError) as exc:
            load_instance(ROOT / "configs" / "bad-exponent.toml")
        assert any("bad-exponent.toml:3" in d and "exponent outside [0,1]" in d for d in exc.value.diagnostics)

    def test_toml_syntax_error(self):
        with pytest.raises(ConfigError, match="invalid TOML"):
            parse_instance("name = ", "broken.toml")

    def test_every_problem_reported_at_once(self, tiny_toml):
        """Schema violations are collected, not raised one by one."""
        text = tiny_toml.replace("exponents = [0.5]", "exponents = [-0.5]").replace("seed = 4", "seed = -1")
        with pytest.raises(ConfigError) as exc:
            parse_instance(text, "tiny.toml")
        assert len(exc.value.diagnostics) == 2
        assert all(d.startswith("tiny.toml:") for d in exc.value.diagnostics)

    def test_code_count_mismatch(self, tiny_toml):
        """A chain of three systems needs two codes."""
        text = tiny_toml.replace("[[codes]]", '[[systems]]\nname = "extra"\nalphabet = ["x"]\n\n[[codes]]', 1)
        with pytest.raises(ConfigError, match="config validation failed"):
            parse_instance(text, "tiny.toml")

    def test_unknown_symbol_in_rule(self, tiny_toml):
        text = tiny_toml.replace('"1" = "*" }', '"2" = "*" }', 1)
        with pytest.raises(ConfigError):
            parse_instance(text, "tiny.toml")

    def test_coarse_grid_resolution(self, tiny_toml):
        """The oracle grid may not be coarser than 0.01."""
        text = tiny_toml.replace("grid_resolution = 0.01", "grid_resolution = 0.05")
        with pytest.raises(ConfigError) as exc:
            parse_instance(text, "tiny.toml")
        assert any("grid_resolution" in d for d in exc.value.diagnostics)

    def test_markov_optimizer_on_planar_system(self, tiny_toml):
        """The Markov family is refused on Z^2 at load time."""
        text = (
            tiny_toml.replace('alphabet = ["0", "1"]', 'alphabet = ["0", "1"]\ndimension = 2', 1)
            .replace('alphabet = ["*"]', 'alphabet = ["*"]\ndimension = 2', 1)
            .replace("restarts = 2", 'family = "markov"\nrestarts = 2')
            .replace("[[codes]]", "[[codes]]\nwindow = [[0, 0]]", 1)
            .replace("[potential]", "[potential]\nwindow = [[0, 0]]", 1)
        )
        with pytest.raises(ConfigError, match="family/system mismatch"):
            parse_instance(text, "planar.toml")

    def test_overrides(self, tiny_instance):
        """Command-line overrides are applied and revalidated."""
        changed = tiny_instance.with_overrides(seed=9, n_max=2, refine_max=2, out="elsewhere")
        assert changed.seed == 9
        assert list(changed.schedule.indices()) == [1, 2]
        assert changed.refinements() == [1, 2]
        assert changed.config.output.dir == "elsewhere"
        assert tiny_instance.with_overrides() is tiny_instance
        with pytest.raises(ConfigError):
            tiny_instance.with_overrides(n_max=0)

    def test_duality_family(self, tiny_instance):
        family = tiny_instance.duality_family()
        assert [f.name for f in family] == ["-1*1[1]", "-0.5*1[1]", "0*1[1]", "0.5*1[1]", "1*1[1]"]


class TestSuites:
    """Test suite for the individual verification suites on a small instance."""

    def test_identity_suite(self, tiny_instance):
        """Residuals of the instance and of random chains stay below tolerance."""
        checks = IdentitySuite().checks(tiny_instance)
        names = {c.name for c in checks}
        assert {"instance-residual", "random-residual", "weights-all-ones"} <= names
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]

    def test_inequalities_suite(self, tiny_instance):
        checks = InequalitiesSuite().checks(tiny_instance)
        assert {c.name for c in checks} == {
            "walters", "walters-gibbs-equality", "entropy-subadditivity", "variational-upper-bound"
        }
        assert all(c.passed for c in checks)

    def test_folner_suite(self, tiny_instance):
        """Origin and centered boxes give the same pressure."""
        checks = {c.name: c for c in FolnerSuite().checks(tiny_instance)}
        assert checks["schedule-independence"].passed
        assert checks["schedule-independence"].value == pytest.approx(0.0, abs=1e-12)
        assert checks["equal-size-boxes"].passed

    def test_duality_suite_keeps_report(self, tiny_instance):
        """The suite exposes the report of its last run."""
        suite = DualitySuite()
        checks = suite.checks(tiny_instance)
        assert checks[0].name == "gaps-nonnegative"
        assert checks[0].passed
        assert suite.last_report is not None
        assert len(suite.last_report.entries) == 5

    def test_oracle_suite(self, tiny_instance):
        """Engine, word counts and optimizer agree with the oracles."""
        checks = {c.name: c for c in OracleSuite().checks(tiny_instance)}
        assert checks["logz-agreement"].passed
        assert checks["word-counts-full-2"].passed
        assert checks["optimizer-vs-grid"].passed

    def test_tight_duality_on_uniform_measure(self):
        """For the identity instance the zero potential closes the gap."""
        instance = load_instance(ROOT / "configs" / "identity.toml").with_overrides(n_max=4)
        checks = {c.name: c for c in DualitySuite().checks(instance)}
        assert checks["gap-at-zero"].passed


class TestSuiteRunner:
    """Test suite for concurrent suite execution."""

    @pytest.fixture
    def runner(self):
        return default_runner()

    def test_registration_order(self, runner):
        assert runner.names() == ["identity", "inequalities", "folner", "duality", "oracle"]

    @pytest.mark.asyncio
    async def test_unknown_suite(self, runner, tiny_instance):
        with pytest.raises(ValueError, match="unknown suite"):
            await runner.run(tiny_instance, ["nonsense"])

    @pytest.mark.asyncio
    async def test_failing_suite_becomes_error(self, runner, tiny_instance, mocker):
        """An exception inside one suite does not stop the others."""
        mocker.patch.object(IdentitySuite, "checks", side_effect=RuntimeError("boom"))
        mocker.patch.object(FolnerSuite, "checks", return_value=[CheckResult(name="stub", passed=True)])
        results = await runner.run(tiny_instance, ["identity", "folner"])
        assert [r.suite for r in results] == ["identity", "folner"]
        assert results[0].error == "boom"
        assert not results[0].passed
        assert results[1].passed

    def test_replacing_a_suite(self, runner):
        runner.register_suite(FolnerSuite())
        assert runner.names().count("folner") == 1


class TestReports:
    """Test suite for report persistence and rendering."""

    @pytest.fixture
    def report(self):
        return RunReport(
            instance="tiny",
            digest="0" * 64,
            command="pressure",
            seed=4,
            pressure=[{"n": 1, "size": 1, "refinement": 1, "log_Z": 0.5, "value": 0.5, "running_inf": 0.5}],
            checks=[CheckResult(name="pressure-m1", passed=True, value=0.0, tolerance=1e-9)],
            suites=[SuiteResult(suite="oracle", passed=False, checks=[CheckResult(name="logz-agreement", passed=False)])],
            stages={"pressure": 0.25},
        )

    def test_status_follows_checks_and_suites(self, report):
        assert not report.passed
        assert [c.name for c in report.all_checks()] == ["pressure-m1", "oracle/logz-agreement"]

    def test_write_and_load(self, report, tmp_path):
        """report.json holds no timings; timings.json does."""
        write_report(report, tmp_path)
        body = json.loads((tmp_path / "report.json").read_text())
        assert "stages" not in body
        assert json.loads((tmp_path / "timings.json").read_text()) == {"pressure": 0.25}
        loaded = load_report(tmp_path)
        assert loaded.instance == "tiny"
        assert loaded.pressure == report.pressure
        assert not loaded.passed

    def test_render_summary(self, report):
        text = render_summary(report)
        assert "status   : FAIL" in text
        assert "oracle/logz-agreement" in text
        assert f"{0.5:>22.15g}" in text

    def test_summary_is_deterministic(self, report, tmp_path):
        """Rewriting the same report gives byte-identical files."""
        write_report(report, tmp_path)
        first = (tmp_path / "report.json").read_bytes()
        write_report(report, tmp_path)
        assert (tmp_path / "report.json").read_bytes() == first
        assert math.isfinite(report.checks[0].value)
