"""
Maximization of the weighted objective over Bernoulli and Markov families.

Projected gradient ascent with central finite differences, restarted from
several seeds; a Nelder-Mead search over softmax logits takes over when the
gradient phase makes no progress. Restarts run concurrently and the winner
is chosen by value, then by the lowest restart index, so results do not
depend on scheduling.
"""

from typing import Callable, Dict, List, Optional, Tuple
from dataclasses import dataclass, field
import asyncio
import logging
import time

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax

from app.config import settings
from app.errors import FamilyMismatchError
from app.geometry.windows import FolnerSchedule
from app.measures.objective import ObjectiveInterval, weighted_objective
from app.measures.specs import Bernoulli, Markov, MeasureSpec
from app.pressure.partition import PressureEstimate
from app.pressure.potentials import Potential
from app.pressure.weights import ExponentVector
from app.symbolic.codes import SystemChain

logger = logging.getLogger(__name__)

FAMILIES = ("bernoulli", "markov")


@dataclass(frozen=True)
class OptimizerConfig:
    family: str = "bernoulli"
    restarts: int = field(default_factory=lambda: settings.optimizer_restarts)
    max_iterations: int = field(default_factory=lambda: settings.optimizer_max_iterations)
    step: float = 0.5
    step_growth: float = 1.2
    step_shrink: float = 0.5
    tolerance: float = field(default_factory=lambda: settings.optimizer_tolerance)
    fd_step: float = 1e-6
    scale: int = field(default_factory=lambda: settings.objective_scale)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown optimizer family '{self.family}' (expected one of {FAMILIES})")
        if self.tolerance <= 0:
            raise ValueError("optimizer tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("optimizer needs at least one restart")
        if self.max_iterations < 1 or self.scale < 1 or self.step <= 0:
            raise ValueError("optimizer iterations, scale and step must be positive")

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "step": self.step,
            "tolerance": self.tolerance,
            "fd_step": self.fd_step,
            "scale": self.scale,
            "seed": self.seed,
        }


@dataclass
class RestartTrace:
    index: int
    seed: List[int]
    method: str
    iterations: int
    start_value: float
    final_value: float
    history: List[float]
    parameters: List[float]

    def to_dict(self) -> Dict[str, object]:
        return {
            "index": self.index,
            "seed": list(self.seed),
            "method": self.method,
            "iterations": self.iterations,
            "start_value": self.start_value,
            "final_value": self.final_value,
            "history": list(self.history),
            "parameters": list(self.parameters),
        }


@dataclass
class OptimizationResult:
    """Best measure found, its objective bracket and the per-restart traces."""
    measure: MeasureSpec
    objective: ObjectiveInterval
    best_restart: int
    restarts: List[RestartTrace]
    config: OptimizerConfig

    @property
    def value(self) -> float:
        """Certified part of the objective: the lower end of the bracket."""
        return self.objective.lower

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "objective": self.objective.to_dict(),
            "measure": self.measure.to_dict(),
            "best_restart": self.best_restart,
            "config": self.config.to_dict(),
            "restarts": [t.to_dict() for t in self.restarts],
        }


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=float)
    m = len(y)
    s = np.sort(y)[::-1]
    cumsum = np.cumsum(s)
    ks = np.arange(1, m + 1)
    cond = s - (cumsum - 1.0) / ks > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = (cumsum[rho] - 1.0) / (rho + 1)
    return np.maximum(y - theta, 0.0)


class _Family:
    """Feasible parameter blocks for one measure family on X_1."""

    def __init__(self, chain: SystemChain, family: str):
        s = chain.system(1)
        self.family = family
        self.k = len(s.alphabet)
        if family == "markov":
            if s.dimension != 1:
                raise FamilyMismatchError(
                    f"family/system mismatch: Markov family needs d=1, {s.name} has d={s.dimension}"
                )
            if s.is_nearest_neighbor:
                self.allowed = s.adjacency_matrix().astype(bool)
            elif s.is_full:
                self.allowed = np.ones((self.k, self.k), dtype=bool)
            else:
                raise FamilyMismatchError(f"family/system mismatch: {s.name} is not a nearest-neighbour SFT")
            if np.any(self.allowed.sum(axis=1) == 0):
                raise FamilyMismatchError(f"family/system mismatch: {s.name} has a dead symbol")
            self.blocks = [np.flatnonzero(row) for row in self.allowed]
        else:
            if not s.is_full:
                raise FamilyMismatchError(
                    f"family/system mismatch: Bernoulli measures charge forbidden words of {s.name}"
                )
            self.blocks = [np.arange(self.k)]

    @property
    def dimension(self) -> int:
        return int(sum(len(b) for b in self.blocks))

    def split(self, x: np.ndarray) -> List[np.ndarray]:
        out, pos = [], 0
        for b in self.blocks:
            out.append(x[pos:pos + len(b)])
            pos += len(b)
        return out

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([project_simplex(part) for part in self.split(x)])

    def start(self, rng: Optional[np.random.Generator]) -> np.ndarray:
        if rng is None:
            return np.concatenate([np.full(len(b), 1.0 / len(b)) for b in self.blocks])
        return np.concatenate([rng.dirichlet(np.ones(len(b))) for b in self.blocks])

    def measure(self, x: np.ndarray) -> MeasureSpec:
        if self.family == "bernoulli":
            p = np.maximum(x, 0.0)
            return Bernoulli.of(p / p.sum())
        P = np.zeros((self.k, self.k))
        for i, (b, part) in enumerate(zip(self.blocks, self.split(x))):
            row = np.maximum(part, 0.0)
            P[i, b] = row / row.sum()
        return Markov.from_transition(P)

    def from_logits(self, z: np.ndarray) -> np.ndarray:
        return np.concatenate([softmax(part) for part in self.split(z)])

    def directions(self) -> List[Tuple[int, np.ndarray]]:
        """Sum-preserving coordinate directions e_j − mean within each block."""
        dirs, pos = [], 0
        for b in self.blocks:
            for j in range(len(b)):
                u = np.zeros(self.dimension)
                u[pos:pos + len(b)] = -1.0 / len(b)
                u[pos + j] += 1.0
                dirs.append((pos + j, u))
            pos += len(b)
        return dirs


def _feasible_step(x: np.ndarray, u: np.ndarray, h: float) -> float:
    """Largest t ≤ h with x + t·u ≥ 0."""
    neg = u < 0
    if not neg.any():
        return h
    return float(min(h, np.min(x[neg] / -u[neg])))


def _gradient(fn: Callable[[np.ndarray], float], fam: _Family, x: np.ndarray, h: float) -> np.ndarray:
    grad = np.zeros_like(x)
    for j, u in fam.directions():
        hp = _feasible_step(x, u, h)
        hm = _feasible_step(x, -u, h)
        if hp + hm <= 0:
            continue
        up = fn(x + hp * u) if hp > 0 else fn(x)
        down = fn(x - hm * u) if hm > 0 else fn(x)
        grad[j] = (up - down) / (hp + hm)
    return grad


def _run_restart(
    fn: Callable[[np.ndarray], float],
    fam: _Family,
    cfg: OptimizerConfig,
    index: int,
) -> Tuple[np.ndarray, RestartTrace]:
    seed = [cfg.seed, index]
    rng = None if index == 0 else np.random.default_rng(seed)
    x = fam.start(rng)
    value = fn(x)
    start_value = value
    history = [value]
    step = cfg.step
    accepted = 0
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        grad = _gradient(fn, fam, x, cfg.fd_step)
        if not np.all(np.isfinite(grad)) or np.linalg.norm(grad) < cfg.tolerance:
            break
        improved = False
        while step > 1e-12:
            candidate = fam.project(x + step * grad)
            cand_value = fn(candidate)
            if cand_value > value:
                improved = True
                break
            step *= cfg.step_shrink
        if not improved:
            break
        gain = cand_value - value
        x, value = candidate, cand_value
        history.append(value)
        accepted += 1
        step *= cfg.step_growth
        if gain < cfg.tolerance:
            break

    method = "projected-gradient"
    if accepted == 0:
        z0 = np.log(np.maximum(x, 1e-12))
        res = minimize(
            lambda z: -fn(fam.from_logits(z)),
            z0,
            method="Nelder-Mead",
            options={"maxiter": cfg.max_iterations * fam.dimension, "xatol": 1e-8, "fatol": cfg.tolerance},
        )
        x_nm = fam.from_logits(res.x)
        v_nm = fn(x_nm)
        method = "nelder-mead"
        if v_nm > value:
            x, value = x_nm, v_nm
            history.append(value)
        iterations += int(res.nit)

    logger.debug(f"Restart {index}: {start_value:.9g} -> {value:.9g} via {method} in {iterations} iterations")
    trace = RestartTrace(
        index=index,
        seed=seed,
        method=method,
        iterations=iterations,
        start_value=start_value,
        final_value=value,
        history=history,
        parameters=[float(v) for v in x],
    )
    return x, trace


async def optimize(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    cfg: OptimizerConfig,
    schedule: Optional[FolnerSchedule] = None,
    budget: Optional[int] = None,
) -> OptimizationResult:
    """
    Search the family for the measure with the largest certified objective.

    The search maximizes the lower end of the objective bracket at a single
    scale; the winner is re-evaluated over ``schedule`` when one is given.

    Args:
        chain: System chain
        f: Potential on X_1
        a: Exponent vector
        cfg: Optimizer configuration
        schedule: Følner schedule for the final objective bracket
        budget: Enumeration budget

    Returns:
        OptimizationResult
    """
    fam = _Family(chain, cfg.family)
    d = chain.dimension
    scale = cfg.scale if d == 1 else min(cfg.scale, 2)
    search_schedule = FolnerSchedule(kind="origin", dimension=d, n_min=scale, n_max=scale)

    def objective(x: np.ndarray) -> float:
        return weighted_objective(chain, fam.measure(x), f, a, search_schedule, budget=budget).lower

    start = time.time()
    logger.info(f"Optimizing {cfg.family} family with {cfg.restarts} restarts (seed {cfg.seed})")
    tasks = [asyncio.to_thread(_run_restart, objective, fam, cfg, i) for i in range(cfg.restarts)]
    outcomes = await asyncio.gather(*tasks)

    best = 0
    for i, (_, trace) in enumerate(outcomes):
        if trace.final_value > outcomes[best][1].final_value:
            best = i
    x_best = outcomes[best][0]
    measure = fam.measure(x_best)
    final = weighted_objective(chain, measure, f, a, schedule or search_schedule, budget=budget)

    logger.info(
        f"Optimizer finished in {time.time() - start:.2f}s: best restart {best}, "
        f"objective [{final.lower:.12g}, {final.upper:.12g}]"
    )
    return OptimizationResult(
        measure=measure,
        objective=final,
        best_restart=best,
        restarts=[trace for _, trace in outcomes],
        config=cfg,
    )


def optimize_objective(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    cfg: OptimizerConfig,
    schedule: Optional[FolnerSchedule] = None,
    budget: Optional[int] = None,
) -> OptimizationResult:
    """Blocking wrapper around :func:`optimize`."""
    return asyncio.run(optimize(chain, f, a, cfg, schedule, budget))


def soundness_gap(result: OptimizationResult, pressure: PressureEstimate) -> float:
    """running-inf pressure minus the upper end of the objective (≥ −tolerance when sound)."""
    return pressure.estimate - result.objective.upper
