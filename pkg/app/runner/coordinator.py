from typing import Dict, List, Optional
from contextlib import contextmanager
from pathlib import Path
import logging
import time

from app.config import settings
from app.errors import EnumerationBudgetError, WeightedPressureError
from app.geometry.windows import Window
from app.measures.marginals import marginal
from app.oracle.brute_force import instance_digest
from app.pressure.partition import pressure_estimate, pressure_sweep
from app.runner.instance import Instance
from app.runner.reports import CheckResult, RunReport, load_report, render_summary, write_json, write_report, write_table
from app.runner.suites import DualitySuite, SuiteRunner, default_runner
from app.variational.construction import construct_nu_n, invariantize, verify_logZ_identity
from app.variational.optimizer import optimize, soundness_gap

logger = logging.getLogger(__name__)


class RunCoordinator:
    """
    Entry point for every command: runs the computation for one instance,
    turns failures into report entries and writes the output directory.
    """

    def __init__(self, instance: Instance, out_dir: Optional[Path] = None, runner: Optional[SuiteRunner] = None):
        self.instance = instance
        self.out_dir = Path(out_dir or instance.config.output.dir)
        self.runner = runner or default_runner()
        self.digest = instance_digest(
            instance.chain,
            instance.potential,
            instance.exponents,
            schedule=[instance.schedule.kind, instance.schedule.n_min, instance.schedule.n_max],
            refinements=instance.refinements(),
        )
        self.stages: Dict[str, float] = {}
        logger.info(f"RunCoordinator for {instance.name} (digest {self.digest[:12]}) writing to {self.out_dir}")

    @contextmanager
    def _stage(self, name: str):
        start = time.time()
        try:
            yield
        finally:
            self.stages[name] = time.time() - start

    def _report(self, command: str) -> RunReport:
        return RunReport(instance=self.instance.name, digest=self.digest, command=command, seed=self.instance.seed)

    def _finish(self, report: RunReport) -> RunReport:
        report.stages = dict(self.stages)
        write_report(report, self.out_dir)
        return report

    def _fail(self, report: RunReport, command: str, error: Exception) -> None:
        logger.error(f"{command} failed for {self.instance.name}: {error}")
        report.checks.append(CheckResult(name=f"{command}-completed", passed=False, detail=str(error)))

    async def cmd_pressure(self) -> RunReport:
        """Pressure table over the schedule for every scheme refinement."""
        inst = self.instance
        report = self._report("pressure")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        try:
            with self._stage("pressure"):
                estimates = pressure_sweep(
                    inst.chain, inst.potential, inst.exponents, inst.schedule, inst.refinements(), inst.budget
                )
            for est in estimates:
                report.pressure.extend(est.rows())
            write_table(report.pressure, self.out_dir / "pressure.csv")

            expected = inst.config.expect.pressure
            if expected is not None:
                tol = inst.config.expect.pressure_tolerance
                for est in estimates:
                    diff = abs(est.estimate - expected)
                    report.checks.append(
                        CheckResult(name=f"pressure-m{est.refinement}", passed=diff <= tol, value=diff, tolerance=tol,
                                    detail=f"estimate {est.estimate:.15g}")
                    )
        except (WeightedPressureError, ValueError) as e:
            self._fail(report, "pressure", e)
        return self._finish(report)

    async def cmd_variational(self) -> RunReport:
        """Optimize the weighted objective and compare it with the pressure."""
        inst = self.instance
        report = self._report("variational")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        try:
            with self._stage("optimizer"):
                result = await optimize(
                    inst.chain, inst.potential, inst.exponents, inst.optimizer, budget=inst.budget
                )
            with self._stage("pressure"):
                pressure = pressure_estimate(
                    inst.chain, inst.potential, inst.exponents, inst.schedule, inst.scheme(), inst.budget
                )
            gap = soundness_gap(result, pressure)
            report.variational = {
                **result.to_dict(),
                "pressure": pressure.estimate,
                "gap_to_pressure": pressure.estimate - result.value,
            }
            write_json(result.to_dict(), self.out_dir / "optimizer_trace.json")
            for level, bounds in enumerate(result.objective.levels, start=1):
                if bounds is not None:
                    write_table(bounds.rows(), self.out_dir / f"entropy_level{level}.csv")
            s = inst.chain.system(1)
            origin = Window.of([(0,) * s.dimension], dimension=s.dimension)
            write_table(marginal(result.measure, s, origin, inst.budget).records(s.alphabet), self.out_dir / "marginals_best.csv")

            tol = settings.soundness_tolerance
            report.checks.append(
                CheckResult(name="soundness", passed=gap >= -tol, value=gap, tolerance=tol,
                            detail="pressure minus objective upper end")
            )
            expected = inst.config.expect.objective
            if expected is not None:
                tol = inst.config.expect.objective_tolerance
                diff = abs(result.value - expected)
                report.checks.append(
                    CheckResult(name="objective", passed=diff <= tol, value=diff, tolerance=tol,
                                detail=f"value {result.value:.15g}")
                )
        except (WeightedPressureError, ValueError) as e:
            self._fail(report, "variational", e)
        return self._finish(report)

    async def cmd_nu_construct(self) -> RunReport:
        """ν_n over the schedule, its identity residuals and the μ_n one-site marginals."""
        inst = self.instance
        report = self._report("nu-construct")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        s = inst.chain.system(1)
        origin = Window.of([(0,) * s.dimension], dimension=s.dimension)
        rows: List[Dict[str, object]] = []
        tol = settings.identity_tolerance
        try:
            with self._stage("nu-construct"):
                for n in inst.schedule.indices():
                    F = inst.schedule.window(n)
                    try:
                        nu, logz = construct_nu_n(inst.chain, inst.potential, inst.exponents, F, inst.scheme(), inst.budget)
                    except EnumerationBudgetError as e:
                        logger.warning(f"ν_n construction stops at n={n}: {e}")
                        break
                    report.identity.append({"n": n, **logz.to_dict()})
                    residual = verify_logZ_identity(logz, inst.exponents)
                    report.checks.append(
                        CheckResult(name=f"identity-n{n}", passed=residual <= tol, value=residual, tolerance=tol)
                    )
                    for rec in invariantize(nu, s, F, origin).records(s.alphabet):
                        rows.append({"n": n, **rec})
            write_json(report.identity, self.out_dir / "logz_report.json")
            write_table(rows, self.out_dir / "marginals_mu_n.csv")
        except (WeightedPressureError, ValueError) as e:
            self._fail(report, "nu-construct", e)
        return self._finish(report)

    async def cmd_verify(self, suite: str) -> RunReport:
        """
        Run one verification suite, or every registered suite for ``all``.

        Raises:
            ValueError: unknown suite
        """
        report = self._report(f"verify {suite}")
        names = None if suite == "all" else [suite]
        with self._stage(f"verify-{suite}"):
            report.suites = await self.runner.run(self.instance, names)
        duality = self.runner.suites.get("duality")
        if isinstance(duality, DualitySuite) and duality.last_report is not None:
            report.duality = duality.last_report.to_dict()
        return self._finish(report)

    @staticmethod
    def cmd_report(out_dir: Path) -> RunReport:
        """Re-render summary.txt from an existing report.json."""
        out_dir = Path(out_dir)
        report = load_report(out_dir)
        (out_dir / "summary.txt").write_text(render_summary(report), encoding="utf-8")
        logger.info(f"Summary re-rendered in {out_dir}")
        return report
