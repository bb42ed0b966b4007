"""
Independent recomputations used as ground truth in the tests.

Nothing here reuses the vectorized engine: patterns are Python dicts,
admissibility is checked by direct translation of every forbidden pattern,
codes are applied through their rule dicts and sums run in plain Python in
a fixed order.
"""

from typing import Dict, Iterator, Optional, Sequence, Tuple
from dataclasses import dataclass
import hashlib
import itertools
import json
import logging
import math

import numpy as np
from scipy.special import logsumexp

from app.config import settings
from app.errors import EnumerationBudgetError, OracleInputError
from app.geometry.windows import GroupPoint, Window, add, minkowski_sum, union_window
from app.pressure.potentials import Potential
from app.pressure.weights import ExponentVector, weights_from_exponents
from app.symbolic.codes import BlockCode, SystemChain
from app.symbolic.subshift import Subshift

logger = logging.getLogger(__name__)

METHODS = ("exhaustive-enumeration", "transfer-matrix", "grid-search")
MAX_GRID_RESOLUTION = 0.01

Config = Dict[GroupPoint, int]


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str
    digest: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown oracle method '{self.method}'")

    def to_dict(self) -> Dict[str, object]:
        return {"value": self.value, "method": self.method, "digest": self.digest}


def _describe_subshift(s: Subshift) -> Dict[str, object]:
    return {
        "alphabet": list(s.alphabet.symbols),
        "dimension": s.dimension,
        "forbidden": [[list(map(list, p.window.points)), list(p.values)] for p in s.forbidden],
    }


def _describe_code(c: BlockCode) -> Dict[str, object]:
    return {
        "window": [list(p) for p in c.window.points],
        "rule": sorted([list(k), v] for k, v in c.rule.items()),
    }


def instance_digest(chain: SystemChain, f: Optional[Potential] = None, a: Optional[ExponentVector] = None, **extra) -> str:
    """SHA-256 of the canonical JSON description of an instance."""
    payload: Dict[str, object] = {
        "systems": [_describe_subshift(s) for s in chain.systems],
        "codes": [_describe_code(c) for c in chain.codes],
    }
    if f is not None:
        payload["potential"] = {
            "window": [list(p) for p in f.window.points],
            "table": sorted([list(k), float(v)] for k, v in f.table.items()),
        }
    if a is not None:
        payload["exponents"] = a.to_list()
    payload.update(extra)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _admissible(s: Subshift, config: Config) -> bool:
    for p in s.forbidden:
        anchor = p.window.points[0]
        for x in config:
            g = tuple(xi - ai for xi, ai in zip(x, anchor))
            hit = True
            for q, v in zip(p.window.points, p.values):
                site = add(q, g)
                if site not in config or config[site] != v:
                    hit = False
                    break
            if hit:
                return False
    return True


def _configs(s: Subshift, window: Window, budget: int) -> Iterator[Config]:
    k = len(s.alphabet)
    if k ** len(window) > budget:
        raise EnumerationBudgetError(bound=k ** len(window), budget=budget, what="oracle configurations")
    for values in itertools.product(range(k), repeat=len(window)):
        config = dict(zip(window.points, values))
        if _admissible(s, config):
            yield config


def _image(c: BlockCode, config: Config, target: Window) -> Tuple[int, ...]:
    out = []
    for g in target.points:
        key = tuple(config[add(d, g)] for d in c.window.points)
        out.append(c.rule[key])
    return tuple(out)


def _birkhoff(f: Potential, config: Config, F: Window) -> float:
    total = 0.0
    for g in F.points:
        total += float(f.table[tuple(config[add(d, g)] for d in f.window.points)])
    return total


def brute_force_logZ(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    F: Window,
    scheme_windows: Sequence[Window],
    budget: Optional[int] = None,
) -> float:
    """
    log Z_F by direct nested loops.

    Args:
        chain: System chain
        f: Potential on X_1
        a: Exponents
        F: Summation window
        scheme_windows: E_1 … E_r
        budget: Cap on configurations per window (defaults to settings.oracle_budget)

    Returns:
        log Z_F
    """
    budget = budget or settings.oracle_budget
    r = chain.r
    cyl_windows = [minkowski_sum(F, E) for E in scheme_windows]

    # level 1: Σ over cylinders of exp(sup over admissible extensions)
    C = cyl_windows[0]
    W = union_window(C, minkowski_sum(F, f.window))
    extra = [p for p in W.points if p not in C]
    s1 = chain.system(1)
    k1 = len(s1.alphabet)
    child_values: Dict[Tuple[int, ...], float] = {}
    for config in _configs(s1, C, budget):
        best = -math.inf
        for ext in itertools.product(range(k1), repeat=len(extra)):
            full = dict(config)
            full.update(zip(extra, ext))
            if _admissible(s1, full):
                best = max(best, _birkhoff(f, full, F))
        if best == -math.inf:
            raise OracleInputError(f"cylinder {tuple(config.values())} has no admissible extension")
        child_values[tuple(config[p] for p in C.points)] = math.exp(best)

    for level in range(1, r):
        code = chain.code(level)
        source_window = cyl_windows[level - 1]
        target_window = cyl_windows[level]
        parents: Dict[Tuple[int, ...], float] = {}
        for t in _configs(chain.system(level + 1), target_window, budget):
            parents[tuple(t[p] for p in target_window.points)] = 0.0
        power = 1.0 if level == 1 else a[level - 1]
        for key in sorted(child_values):
            config = dict(zip(source_window.points, key))
            image = _image(code, config, target_window)
            if image not in parents:
                raise OracleInputError(f"image {image} is not a level-{level + 1} cylinder")
            parents[image] += child_values[key] ** power
        if any(v == 0.0 for v in parents.values()):
            raise OracleInputError(f"empty fiber at level {level + 1}")
        child_values = parents

    total = 0.0
    for key in sorted(child_values):
        total += child_values[key] ** a[r - 1]
    value = math.log(total)
    logger.debug(f"Oracle log Z over {F.describe()}: {value:.15g}")
    return value


def transfer_matrix_count(s: Subshift, n: int) -> int:
    """Number of admissible words of length n of a nearest-neighbour SFT, in exact integers."""
    if not s.is_nearest_neighbor:
        raise OracleInputError(f"{s.name} is not a nearest-neighbour SFT on Z")
    if n < 1:
        raise OracleInputError("word length must be positive")
    k = len(s.alphabet)
    alive = [True] * k
    allowed = [[1] * k for _ in range(k)]
    for p in s.forbidden:
        if len(p.values) == 1:
            alive[p.values[0]] = False
        else:
            allowed[p.values[0]][p.values[1]] = 0
    counts = [1 if alive[i] else 0 for i in range(k)]
    for _ in range(n - 1):
        counts = [
            sum(counts[i] * allowed[i][j] for i in range(k)) if alive[j] else 0
            for j in range(k)
        ]
    return sum(counts)


def _simplex_grid(k: int, m: int) -> np.ndarray:
    """All p with p_i = c_i/m, Σc_i = m (stars and bars)."""
    points = []
    for bars in itertools.combinations(range(m + k - 1), k - 1):
        prev, counts = -1, []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(m + k - 2 - prev)
        points.append(counts)
    return np.asarray(points, dtype=float) / m


def _row_entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    return terms.sum(axis=1)


def grid_search_objective(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    resolution: float,
    budget: Optional[int] = None,
) -> OracleResult:
    """
    Best weighted objective over Bernoulli measures on a simplex grid.

    Needs a full level-1 shift, single-site codes and a single-site potential,
    where every level image is again Bernoulli and the objective is
    Σ w_i H(p^(i)) + w_1 Σ_s p_s f(s).

    Raises:
        OracleInputError: unsupported instance or infeasible grid
    """
    s = chain.system(1)
    k = len(s.alphabet)
    if not s.is_full or k > 4:
        raise OracleInputError("grid search needs a full level-1 shift on at most 4 symbols")
    if any(len(c.window) != 1 for c in chain.codes) or len(f.window) != 1:
        raise OracleInputError("grid search needs single-site codes and a single-site potential")
    if not 0 < resolution <= MAX_GRID_RESOLUTION:
        raise OracleInputError(f"grid resolution {resolution} is infeasible, need 0 < resolution <= {MAX_GRID_RESOLUTION}")
    m = round(1.0 / resolution)
    if abs(m * resolution - 1.0) > 1e-9:
        raise OracleInputError(f"grid resolution {resolution} does not divide 1")
    budget = budget or settings.oracle_budget
    if math.comb(m + k - 1, k - 1) > budget:
        raise OracleInputError(f"grid of resolution {resolution} on {k} symbols exceeds budget {budget}")

    w = weights_from_exponents(a)
    grid = _simplex_grid(k, m)
    values = np.array([float(f.table[(i,)]) for i in range(k)])
    objective = w[1] * (grid @ values)
    probs = grid
    for level in range(1, chain.r + 1):
        if level > 1:
            code = chain.code(level - 1)
            pushed = np.zeros((probs.shape[0], len(code.target.alphabet)))
            for src in range(probs.shape[1]):
                pushed[:, code.rule[(src,)]] += probs[:, src]
            probs = pushed
        objective = objective + w[level] * _row_entropy(probs)

    best = int(np.argmax(objective))
    digest = instance_digest(chain, f, a, resolution=resolution)
    logger.info(f"Grid search over {len(grid)} points: best {objective[best]:.12g} at {grid[best].tolist()}")
    return OracleResult(value=float(objective[best]), method="grid-search", digest=digest)


def walters_inequality(p: Sequence[float], a: Sequence[float]) -> float:
    """log Σ e^{a_i} − Σ(−p_i log p_i + p_i a_i); nonnegative, zero at p ∝ e^a."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    if p.shape != a.shape:
        raise OracleInputError("p and a must have the same length")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = float(np.sum(np.where(p > 0, -p * np.log(p), 0.0)))
    return float(logsumexp(a)) - (h + float(np.dot(p, a)))


def oracle_logZ(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    F: Window,
    scheme_windows: Sequence[Window],
    budget: Optional[int] = None,
) -> OracleResult:
    """brute_force_logZ wrapped with its method tag and instance digest."""
    value = brute_force_logZ(chain, f, a, F, scheme_windows, budget)
    digest = instance_digest(
        chain, f, a,
        window=[list(p) for p in F.points],
        scheme=[[list(p) for p in E.points] for E in scheme_windows],
    )
    return OracleResult(value=value, method="exhaustive-enumeration", digest=digest)

