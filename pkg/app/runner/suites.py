"""
Verification suites.

Each suite turns one family of properties into named checks. Suites are
registered on a SuiteRunner, run concurrently in worker threads and
reported in registration order.
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence
import asyncio
import logging
import math
import time

import numpy as np
from scipy.special import softmax

from app.config import settings
from app.errors import EnumerationBudgetError
from app.geometry.windows import FolnerSchedule, Window, folner_profile, interval, window_from_box
from app.measures.entropy import entropy_subadditivity_check
from app.measures.objective import weighted_objective
from app.measures.specs import MeasureSpec, random_bernoulli, random_markov
from app.oracle.brute_force import brute_force_logZ, grid_search_objective, transfer_matrix_count, walters_inequality
from app.pressure.partition import CylinderScheme, nested_partition_function, pressure_estimate
from app.pressure.potentials import single_site_potential
from app.pressure.weights import ExponentVector, coefficient_check, weights_from_exponents
from app.runner.instance import Instance
from app.runner.reports import CheckResult, SuiteResult
from app.symbolic.codes import SystemChain, symbol_map_code
from app.symbolic.subshift import Subshift, enumerate_patterns, full_shift, golden_mean_shift
from app.variational.construction import construct_nu_n
from app.variational.duality import DualityReport, duality_check
from app.variational.optimizer import optimize_objective

logger = logging.getLogger(__name__)


def _check(name: str, passed: bool, value: Optional[float] = None, tolerance: Optional[float] = None, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(passed),
        value=None if value is None else float(value),
        tolerance=tolerance,
        detail=detail,
    )


class BaseSuite(ABC):
    """Named group of checks run against one instance."""

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def checks(self, instance: Instance) -> List[CheckResult]:
        """
        Compute every check of the suite.

        Args:
            instance: Validated instance

        Returns:
            List of CheckResult
        """
        pass

    async def run(self, instance: Instance) -> SuiteResult:
        start = time.time()
        checks = await asyncio.to_thread(self.checks, instance)
        result = SuiteResult(suite=self.name, passed=all(c.passed for c in checks), checks=checks)
        logger.info(
            f"Suite {self.name}: {len(checks) - len(result.failures)}/{len(checks)} checks passed "
            f"in {time.time() - start:.2f}s"
        )
        return result


def random_collapse_chain(rng: np.random.Generator, r: int, max_symbols: int = 4) -> SystemChain:
    """Chain of full shifts linked by random surjective single-site codes."""
    sizes = [int(rng.integers(2, max_symbols + 1))]
    for _ in range(r - 1):
        sizes.append(int(rng.integers(1, sizes[-1] + 1)))
    systems = [full_shift(k) for k in sizes]
    codes = []
    for i in range(r - 1):
        k_src, k_tgt = sizes[i], sizes[i + 1]
        images = np.concatenate([np.arange(k_tgt), rng.integers(0, k_tgt, size=k_src - k_tgt)])
        rng.shuffle(images)
        mapping = {s: int(t) for s, t in enumerate(images)}
        codes.append(symbol_map_code(systems[i], systems[i + 1], mapping, name=f"π{i + 1}"))
    return SystemChain(systems=tuple(systems), codes=tuple(codes))


def random_measure(s: Subshift, rng: np.random.Generator) -> Optional[MeasureSpec]:
    """Bernoulli on full shifts, Markov on other nearest-neighbour SFTs, None otherwise."""
    if s.is_full and (s.dimension == 2 or rng.random() < 0.5):
        return random_bernoulli(len(s.alphabet), rng)
    if s.is_nearest_neighbor:
        return random_markov(s, rng)
    return None


class IdentitySuite(BaseSuite):
    """log Z identities of ν_n, vanishing coefficients and the weight vector."""

    def __init__(self):
        super().__init__("identity")

    def checks(self, instance: Instance) -> List[CheckResult]:
        tol = settings.identity_tolerance
        v = instance.config.verify
        rng = np.random.default_rng([instance.seed, 1])
        out: List[CheckResult] = []

        residuals, level_residuals = [], []
        for n in instance.schedule.indices():
            if n > v.identity_n:
                break
            try:
                _, report = construct_nu_n(
                    instance.chain, instance.potential, instance.exponents,
                    instance.schedule.window(n), instance.scheme(), instance.budget,
                )
            except EnumerationBudgetError as e:
                logger.warning(f"Identity check stops at n={n}: {e}")
                break
            residuals.append(abs(report.residual))
            level_residuals.extend(abs(x) for x in report.level_residuals)
        if residuals:
            out.append(_check("instance-residual", max(residuals) <= tol, max(residuals), tol))
            out.append(_check("instance-level-residuals", max(level_residuals) <= tol, max(level_residuals), tol))

        worst, worst_level = 0.0, 0.0
        for _ in range(v.identity_instances):
            r = int(rng.integers(2, 4))
            chain = random_collapse_chain(rng, r)
            k = len(chain.system(1).alphabet)
            n = int(rng.integers(1, min(6, int(math.log(4096) / math.log(k))) + 1))
            a = rng.random(r - 1)
            a[rng.random(r - 1) < 0.2] = 1.0
            f = single_site_potential(chain.system(1).alphabet, rng.uniform(-1.0, 1.0, size=k).tolist())
            _, report = construct_nu_n(chain, f, ExponentVector.of(a), interval(0, n), CylinderScheme.refined(chain, 1))
            worst = max(worst, abs(report.residual))
            worst_level = max(worst_level, max(abs(x) for x in report.level_residuals))
        if v.identity_instances:
            out.append(_check("random-residual", worst <= tol, worst, tol, f"{v.identity_instances} instances"))
            out.append(_check("random-level-residuals", worst_level <= tol, worst_level, tol))

        coeff, weight_sum, negative = 0.0, 0.0, 0
        for _ in range(v.weight_draws):
            r = int(rng.integers(2, 6))
            a = ExponentVector.of(rng.random(r - 1))
            w = weights_from_exponents(a)
            negative += sum(1 for x in w.values if x < 0)
            weight_sum = max(weight_sum, abs(math.fsum(w.values) - 1.0))
            coeff = max(coeff, max(abs(c) for c in coefficient_check(a)))
        if v.weight_draws:
            out.append(_check("weights-normalized", weight_sum <= 1e-12 and negative == 0, weight_sum, 1e-12))
            out.append(_check("coefficients-vanish", coeff <= 1e-12, coeff, 1e-12))
        ones = weights_from_exponents(ExponentVector.of([1.0] * 4))
        out.append(_check("weights-all-ones", ones.to_list() == [1.0, 0.0, 0.0, 0.0, 0.0]))
        return out


class InequalitiesSuite(BaseSuite):
    """Walters inequality, entropy subadditivity and the variational upper bound."""

    def __init__(self):
        super().__init__("inequalities")

    def checks(self, instance: Instance) -> List[CheckResult]:
        v = instance.config.verify
        rng = np.random.default_rng([instance.seed, 2])
        out: List[CheckResult] = []

        worst, violations, gibbs = math.inf, 0, 0.0
        for _ in range(v.walters_draws):
            k = int(rng.integers(2, 7))
            p = rng.dirichlet(np.ones(k))
            a = rng.uniform(-5.0, 5.0, size=k)
            slack = walters_inequality(p, a)
            worst = min(worst, slack)
            violations += slack < -1e-12
            gibbs = max(gibbs, abs(walters_inequality(softmax(a), a)))
        if v.walters_draws:
            out.append(_check("walters", violations == 0, worst, 1e-12, f"{v.walters_draws} draws"))
            out.append(_check("walters-gibbs-equality", gibbs <= 1e-12, gibbs, 1e-12))

        systems = [full_shift(2), full_shift(3), golden_mean_shift()]
        worst = math.inf
        for _ in range(v.subadditivity_draws):
            s = systems[int(rng.integers(0, len(systems)))]
            m = random_measure(s, rng)
            F = Window.of([(x,) for x in range(8) if rng.random() < 0.5] or [(0,)], dimension=1)
            A = Window.of([(0,)] + [(x,) for x in (1, 2) if rng.random() < 0.5], dimension=1)
            worst = min(worst, entropy_subadditivity_check(m, s, F, A))
        if v.subadditivity_draws:
            out.append(_check("entropy-subadditivity", worst >= -1e-10, worst, 1e-10, f"{v.subadditivity_draws} draws"))

        out.extend(self._variational(instance, rng))
        return out

    def _variational(self, instance: Instance, rng: np.random.Generator) -> List[CheckResult]:
        v = instance.config.verify
        s = instance.chain.system(1)
        if v.variational_draws == 0 or not (s.is_full or s.is_nearest_neighbor):
            return []
        schedule = FolnerSchedule(kind="origin", dimension=instance.chain.dimension, n_min=1, n_max=v.variational_n)
        at_n = schedule.with_range(n_min=v.variational_n)
        try:
            pressure = pressure_estimate(
                instance.chain, instance.potential, instance.exponents, schedule, instance.scheme(), instance.budget
            )
        except EnumerationBudgetError as e:
            logger.warning(f"Variational bound skipped: {e}")
            return [_check("variational-upper-bound", False, detail=str(e))]
        worst = -math.inf
        for _ in range(v.variational_draws):
            m = random_measure(s, rng)
            objective = weighted_objective(
                instance.chain, m, instance.potential, instance.exponents, at_n, budget=instance.budget
            )
            worst = max(worst, objective.upper - pressure.estimate)
        tol = settings.identity_tolerance
        return [_check("variational-upper-bound", worst <= tol, worst, tol, f"{v.variational_draws} measures at n={v.variational_n}")]


class FolnerSuite(BaseSuite):
    """Independence of the pressure estimate from the box schedule."""

    def __init__(self):
        super().__init__("folner")

    def checks(self, instance: Instance) -> List[CheckResult]:
        v = instance.config.verify
        d = instance.chain.dimension
        out: List[CheckResult] = []
        args = (instance.chain, instance.potential, instance.exponents)

        n = v.folner_n
        while n >= 1:
            try:
                origin = pressure_estimate(*args, FolnerSchedule("origin", d, 1, n), instance.scheme(), instance.budget)
                centered = pressure_estimate(*args, FolnerSchedule("centered", d, 1, n), instance.scheme(), instance.budget)
                break
            except EnumerationBudgetError:
                n -= 1
        if n < 1:
            return [_check("schedule-independence", False, detail="no feasible scale")]
        diff = abs(origin.estimate - centered.estimate)
        out.append(_check("schedule-independence", diff <= v.folner_tolerance, diff, v.folner_tolerance, f"n={n}"))

        if d == 1 and all(s.is_full for s in instance.chain.systems):
            # per-n values depend only on |F_n|: compare equal-size boxes
            worst = 0.0
            for m in range(1, n // 2 + 1):
                worst = max(worst, abs(origin.values[2 * m - 1] - centered.values[m - 1]))
            out.append(_check("equal-size-boxes", worst <= 1e-12, worst, 1e-12))

        K = window_from_box(0, 2, d)
        profile = folner_profile(FolnerSchedule("origin", d, 1, max(n, 2)), K)
        out.append(_check("folner-ratios", profile.eventually_nonincreasing, profile.constant, detail="c_K"))
        return out


class DualitySuite(BaseSuite):
    """Pressure of a potential family against the weighted entropy of the configured measure."""

    def __init__(self):
        super().__init__("duality")
        self.last_report: Optional[DualityReport] = None

    def checks(self, instance: Instance) -> List[CheckResult]:
        tol = settings.identity_tolerance
        report = duality_check(
            instance.chain,
            instance.exponents,
            instance.measure,
            instance.duality_family(),
            instance.schedule,
            instance.scheme(),
            tol,
            instance.budget,
        )
        self.last_report = report
        worst = min(e.gap for e in report.entries)
        out = [_check("gaps-nonnegative", report.passed, worst, tol, f"{len(report.entries)} potentials")]
        if instance.config.duality.tight:
            out.append(_check("gap-at-zero", report.gap_at_zero <= tol, report.gap_at_zero, tol))
        return out


class OracleSuite(BaseSuite):
    """Agreement with the brute-force oracles."""

    def __init__(self):
        super().__init__("oracle")

    def checks(self, instance: Instance) -> List[CheckResult]:
        v = instance.config.verify
        chain = instance.chain
        out: List[CheckResult] = []

        scheme = instance.scheme()
        worst, ran = 0.0, 0
        for n in range(1, v.oracle_n_max + 1):
            F = window_from_box(0, n, chain.dimension)
            try:
                expected = brute_force_logZ(chain, instance.potential, instance.exponents, F, scheme.windows)
            except EnumerationBudgetError:
                break
            got = nested_partition_function(chain, instance.potential, instance.exponents, F, scheme, instance.budget)
            worst = max(worst, abs(got - expected))
            ran += 1
        tol = settings.identity_tolerance
        out.append(_check("logz-agreement", ran > 0 and worst <= tol, worst, tol, f"{ran} windows"))

        for s in chain.systems:
            if not s.is_nearest_neighbor:
                continue
            mismatches = [
                n for n in range(1, v.count_n_max + 1)
                if len(enumerate_patterns(s, interval(0, n), instance.budget)) != transfer_matrix_count(s, n)
            ]
            out.append(_check(f"word-counts-{s.name}", not mismatches, len(mismatches), 0.0))

        out.extend(self._grid(instance))
        return out

    def _grid(self, instance: Instance) -> List[CheckResult]:
        chain = instance.chain
        s = chain.system(1)
        applicable = (
            s.is_full
            and len(s.alphabet) <= 4
            and instance.optimizer.family == "bernoulli"
            and len(instance.potential.window) == 1
            and all(len(c.window) == 1 for c in chain.codes)
        )
        if not applicable:
            return []
        grid = grid_search_objective(chain, instance.potential, instance.exponents, instance.config.verify.grid_resolution)
        result = optimize_objective(chain, instance.potential, instance.exponents, instance.optimizer, budget=instance.budget)
        tol = instance.config.expect.objective_tolerance
        shortfall = grid.value - result.value
        return [_check("optimizer-vs-grid", shortfall <= tol, shortfall, tol, f"grid {grid.value:.12g}")]


class SuiteRunner:
    """Runs registered suites concurrently; results keep registration order."""

    def __init__(self):
        self.suites: Dict[str, BaseSuite] = {}

    def register_suite(self, suite: BaseSuite) -> None:
        if suite.name in self.suites:
            logger.warning(f"Suite '{suite.name}' already registered, replacing")
        self.suites[suite.name] = suite

    def names(self) -> List[str]:
        return list(self.suites)

    async def run(self, instance: Instance, names: Optional[Sequence[str]] = None) -> List[SuiteResult]:
        """
        Run the named suites (all when ``names`` is None).

        Raises:
            ValueError: unknown suite name
        """
        selected = list(names) if names else self.names()
        unknown = [n for n in selected if n not in self.suites]
        if unknown:
            raise ValueError(f"unknown suite {unknown[0]!r} (expected one of {self.names()})")

        logger.info(f"Running suites {selected} on {instance.name}")
        results = await asyncio.gather(*[self.suites[n].run(instance) for n in selected], return_exceptions=True)

        processed: List[SuiteResult] = []
        for name, result in zip(selected, results):
            if isinstance(result, Exception):
                logger.error(f"Suite {name} failed: {result}")
                processed.append(SuiteResult(suite=name, passed=False, error=str(result)))
            else:
                processed.append(result)
        return processed


def default_runner() -> SuiteRunner:
    runner = SuiteRunner()
    for suite in (IdentitySuite(), InequalitiesSuite(), FolnerSuite(), DualitySuite(), OracleSuite()):
        runner.register_suite(suite)
    return runner
