"""
Parametrized measures on subshifts: Bernoulli, Markov and finite-support.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.special import xlogy
from scipy.stats import entropy as shannon_entropy

from app.errors import FamilyMismatchError, MeasureError
from app.geometry.windows import Window
from app.symbolic.patterns import SYMBOL_DTYPE, Pattern
from app.symbolic.subshift import Subshift

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-12
STATIONARITY_TOLERANCE = 1e-10
SUPPORT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Bernoulli:
    """i.i.d. symbols with the given probabilities (any dimension)."""
    probabilities: Tuple[float, ...]

    family = "bernoulli"

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise MeasureError("Bernoulli measure needs a nonempty probability vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise MeasureError(f"negative or non-finite Bernoulli probabilities {self.probabilities}")
        if abs(math.fsum(self.probabilities) - 1.0) > PROBABILITY_TOLERANCE:
            raise MeasureError(f"Bernoulli probabilities sum to {math.fsum(self.probabilities)!r}, not 1")

    @classmethod
    def of(cls, probabilities: Sequence[float]) -> "Bernoulli":
        return cls(tuple(float(p) for p in probabilities))

    @classmethod
    def uniform(cls, k: int) -> "Bernoulli":
        return cls(tuple([1.0 / k] * k))

    @property
    def size(self) -> int:
        return len(self.probabilities)

    def to_dict(self) -> Dict[str, object]:
        return {"family": self.family, "probabilities": list(self.probabilities)}


@dataclass(frozen=True)
class Markov:
    """Stationary Markov chain on Z with initial law ``stationary`` and row-stochastic ``transition``."""
    stationary: Tuple[float, ...]
    transition: Tuple[Tuple[float, ...], ...]

    family = "markov"

    def __post_init__(self):
        pi = np.asarray(self.stationary, dtype=float)
        P = np.asarray(self.transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] != len(pi):
            raise MeasureError(f"transition matrix of shape {P.shape} does not match {len(pi)} states")
        if np.any(pi < 0) or np.any(P < 0):
            raise MeasureError("negative Markov parameters")
        if abs(math.fsum(self.stationary) - 1.0) > PROBABILITY_TOLERANCE:
            raise MeasureError(f"stationary distribution sums to {math.fsum(self.stationary)!r}, not 1")
        for i, row in enumerate(self.transition):
            if abs(math.fsum(row) - 1.0) > PROBABILITY_TOLERANCE:
                raise MeasureError(f"transition row {i} sums to {math.fsum(row)!r}, not 1")
        drift = float(np.max(np.abs(pi @ P - pi)))
        if drift > STATIONARITY_TOLERANCE:
            raise MeasureError(f"distribution is not stationary for the transition matrix (|πP − π| = {drift:.3g})")

    @classmethod
    def from_transition(cls, transition: Union[np.ndarray, Sequence[Sequence[float]]]) -> "Markov":
        """Markov measure started from the stationary law of ``transition``."""
        P = np.asarray(transition, dtype=float)
        P = P / P.sum(axis=1, keepdims=True)
        pi = stationary_distribution(P)
        return cls(
            stationary=tuple(float(v) for v in pi),
            transition=tuple(tuple(float(v) for v in row) for row in P),
        )

    @property
    def size(self) -> int:
        return len(self.stationary)

    def matrix(self) -> np.ndarray:
        return np.asarray(self.transition, dtype=float)

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "stationary": list(self.stationary),
            "transition": [list(row) for row in self.transition],
        }


@dataclass(frozen=True)
class FiniteSupport:
    """
    Weighted finite set of patterns on a common window.

    Each pattern stands for the configuration obtained by the deterministic
    completion rule: the least symbol that keeps the pattern locally
    admissible, site by site (d=1 greedy path). For d=2 only full shifts are
    supported and the fill symbol is the least one.
    """
    window: Window
    rows: np.ndarray
    weights: np.ndarray

    family = "finite-support"

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.window):
            raise MeasureError(f"support rows of shape {self.rows.shape} do not fit {self.window.describe()}")
        if len(self.weights) != self.rows.shape[0] or len(self.weights) == 0:
            raise MeasureError("finite-support measure needs one weight per support pattern")
        if np.any(self.weights < 0):
            raise MeasureError("negative finite-support weights")
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > SUPPORT_TOLERANCE:
            raise MeasureError(f"finite-support weights sum to {total!r}, not 1")

    def __hash__(self) -> int:
        return hash((self.window, self.rows.tobytes(), self.weights.tobytes()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteSupport):
            return NotImplemented
        return (
            self.window == other.window
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.weights, other.weights)
        )

    @classmethod
    def from_patterns(cls, weighted: Sequence[Tuple[Pattern, float]]) -> "FiniteSupport":
        if not weighted:
            raise MeasureError("finite-support measure needs at least one pattern")
        window = weighted[0][0].window
        if any(p.window != window for p, _ in weighted):
            raise MeasureError("finite-support patterns must share one window")
        rows = np.array([p.values for p, _ in weighted], dtype=SYMBOL_DTYPE).reshape(len(weighted), len(window))
        weights = np.array([float(w) for _, w in weighted])
        return cls(window=window, rows=rows, weights=weights)

    @property
    def size(self) -> int:
        return int(self.rows.shape[0])

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "window": self.window.describe(),
            "support_size": self.size,
            "entropy": float(shannon_entropy(self.weights)),
        }


MeasureSpec = Union[Bernoulli, Markov, FiniteSupport]


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Left Perron vector of a stochastic matrix, normalized to a probability vector."""
    values, vectors = np.linalg.eig(P.T)
    idx = int(np.argmin(np.abs(values - 1.0)))
    pi = np.real(vectors[:, idx])
    pi = np.abs(pi) / np.sum(np.abs(pi))
    return pi


def parry_measure(s: Subshift) -> Markov:
    """
    Maximal-entropy Markov measure of a nearest-neighbour SFT on Z.

    P_ij = A_ij v_j / (λ v_i) and π_i ∝ u_i v_i with u, v the left and right
    Perron vectors of the adjacency matrix A.
    """
    A = s.adjacency_matrix().astype(float)
    alive = np.flatnonzero(A.sum(axis=1) > 0)
    if len(alive) == 0:
        raise MeasureError(f"{s.name} has no admissible transitions")

    values, right = np.linalg.eig(A)
    idx = int(np.argmax(np.real(values)))
    lam = float(np.real(values[idx]))
    v = np.abs(np.real(right[:, idx]))
    values_t, left = np.linalg.eig(A.T)
    u = np.abs(np.real(left[:, int(np.argmax(np.real(values_t)))]))

    k = A.shape[0]
    P = np.zeros((k, k))
    for i in range(k):
        if v[i] > 0:
            P[i] = A[i] * v / (lam * v[i])
        else:
            P[i, i] = 1.0
    pi = u * v
    pi = pi / pi.sum()
    logger.debug(f"Parry measure of {s.name}: λ={lam:.12g}")
    return Markov(stationary=tuple(float(x) for x in pi), transition=tuple(tuple(float(x) for x in row) for row in P))


def closed_form_entropy(m: MeasureSpec) -> Optional[float]:
    """Entropy rate in nats for Bernoulli (H(p)) and Markov (Σ π_i P_ij (−log P_ij)); None otherwise."""
    if isinstance(m, Bernoulli):
        return float(shannon_entropy(m.probabilities)) if m.size > 1 else 0.0
    if isinstance(m, Markov):
        pi = np.asarray(m.stationary)
        P = m.matrix()
        return float(-np.sum(pi[:, None] * xlogy(P, P)))
    return None


def check_family(m: MeasureSpec, s: Subshift) -> None:
    """Raise FamilyMismatchError when ``m`` cannot live on ``s``."""
    if isinstance(m, Markov) and s.dimension != 1:
        raise FamilyMismatchError(f"family/system mismatch: Markov measures need d=1, {s.name} has d={s.dimension}")
    if isinstance(m, (Bernoulli, Markov)) and m.size != len(s.alphabet):
        raise FamilyMismatchError(
            f"family/system mismatch: {m.family} measure on {m.size} symbols, {s.name} has {len(s.alphabet)}"
        )
    if isinstance(m, FiniteSupport) and m.window.dimension != s.dimension:
        raise FamilyMismatchError(f"family/system mismatch: support window is {m.window.dimension}-d")


def require_invariant(m: MeasureSpec, operation: str) -> None:
    """Raise MeasureError for finite-support input, which is not shift-invariant."""
    if isinstance(m, FiniteSupport):
        raise MeasureError(f"{operation} needs an invariant measure, got {describe_measure(m)}")


def describe_measure(m: MeasureSpec) -> str:
    if isinstance(m, Bernoulli):
        return "Bernoulli(" + ", ".join(f"{p:.6g}" for p in m.probabilities) + ")"
    if isinstance(m, Markov):
        rows = "; ".join(", ".join(f"{p:.6g}" for p in row) for row in m.transition)
        return f"Markov([{rows}])"
    return f"FiniteSupport({m.size} patterns on {m.window.describe()})"


def random_bernoulli(k: int, rng: np.random.Generator) -> Bernoulli:
    p = rng.dirichlet(np.ones(k))
    p = p / math.fsum(p)
    return Bernoulli.of(p)


def random_markov(s: Subshift, rng: np.random.Generator) -> Markov:
    """Random Markov measure supported on the allowed transitions of ``s``."""
    allowed = s.adjacency_matrix().astype(float)
    if np.any(allowed.sum(axis=1) == 0):
        raise MeasureError(f"{s.name} has a symbol with no allowed successor")
    P = rng.random(allowed.shape) * allowed
    return Markov.from_transition(P)


def support_list(m: FiniteSupport) -> List[Tuple[Pattern, float]]:
    return [
        (Pattern(window=m.window, values=tuple(int(v) for v in m.rows[i])), float(m.weights[i]))
        for i in range(m.size)
    ]
