"""
Locally constant potentials and their Birkhoff-sum suprema over cylinders.
"""

from typing import Mapping, Optional, Sequence, Tuple
from dataclasses import dataclass
from functools import cached_property
import itertools
import logging

import numpy as np

from app.config import settings
from app.errors import DimensionMismatchError, EmptyCylinderError, EnumerationBudgetError, WindowError
from app.geometry.windows import Window, add, difference_window, minkowski_sum, union_window
from app.symbolic.patterns import SYMBOL_DTYPE, Alphabet, Pattern, PatternSet, mixed_radix
from app.symbolic.subshift import Subshift, admissible_mask, enumerate_patterns

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Potential:
    """
    f: X_1 → R depending only on the symbols in the window D_f.

    ``table`` maps the tuple of symbol codes on D_f (column order) to a value
    in nats. Entries may be omitted for patterns that never occur in the
    subshift the potential is used on.
    """
    alphabet: Alphabet
    window: Window
    table: Mapping[Tuple[int, ...], float]
    name: str = "f"

    def __post_init__(self):
        k = len(self.alphabet)
        for key in self.table:
            if len(key) != len(self.window):
                raise WindowError(f"table entry {key} of potential {self.name} does not fit D_f")
            if any(not 0 <= v < k for v in key):
                raise ValueError(f"table entry {key} of potential {self.name} uses an unknown symbol")

    def __hash__(self) -> int:
        return hash((self.alphabet, self.window, self.name, tuple(sorted(self.table.items()))))

    @property
    def dimension(self) -> int:
        return self.window.dimension

    @cached_property
    def lookup(self) -> np.ndarray:
        """Dense value table by mixed-radix code; NaN marks undefined entries."""
        k = len(self.alphabet)
        dense = np.full(k ** len(self.window), np.nan)
        for key, value in self.table.items():
            idx = 0
            for v in key:
                idx = idx * k + v
            dense[idx] = float(value)
        return dense

    def bounds(self) -> Tuple[float, float]:
        values = [float(v) for v in self.table.values()]
        return min(values), max(values)

    def validate(self, s: Subshift) -> None:
        """Raise if some admissible D_f-pattern of ``s`` has no table value."""
        if s.dimension != self.dimension:
            raise DimensionMismatchError(f"potential {self.name} is {self.dimension}-d, {s.name} is {s.dimension}-d")
        rows = enumerate_patterns(s, self.window).rows
        values = self.lookup[mixed_radix(rows, len(self.alphabet))]
        if np.any(np.isnan(values)):
            raise ValueError(f"potential {self.name} is not defined on every admissible pattern of {s.name}")

    def evaluate_rows(self, rows: np.ndarray, window: Window, F: Window) -> np.ndarray:
        """
        S_F f for every row on ``window`` (which must contain F ⊕ D_f).

        Terms are added in the column order of F.
        """
        k = len(self.alphabet)
        total = np.zeros(rows.shape[0])
        for g in F.points:
            placed = [add(d, g) for d in self.window.points]
            if not all(p in window for p in placed):
                raise WindowError(f"window {window.describe()} does not contain {g} + D_f")
            total += self.lookup[mixed_radix(rows[:, window.columns(placed)], k)]
        if np.any(np.isnan(total)):
            raise ValueError(f"potential {self.name} evaluated on a pattern outside its table")
        return total

    def integrate(self, masses: Mapping[Tuple[int, ...], float]) -> float:
        """∫f dμ from the D_f-marginal of μ (pattern values → probability)."""
        total = 0.0
        for key in sorted(masses):
            mass = masses[key]
            if mass == 0.0:
                continue
            if key not in self.table:
                raise ValueError(f"potential {self.name} has no value for charged pattern {key}")
            total += mass * float(self.table[key])
        return total

    def __add__(self, other: "Potential") -> "Potential":
        if other.alphabet != self.alphabet:
            raise ValueError("potentials over different alphabets")
        window = union_window(self.window, other.window)
        mine = window.columns(self.window.points)
        theirs = window.columns(other.window.points)
        table = {}
        for key in itertools.product(range(len(self.alphabet)), repeat=len(window)):
            a = tuple(key[c] for c in mine)
            b = tuple(key[c] for c in theirs)
            if a in self.table and b in other.table:
                table[key] = float(self.table[a]) + float(other.table[b])
        return Potential(alphabet=self.alphabet, window=window, table=table, name=f"{self.name}+{other.name}")

    def scaled(self, c: float) -> "Potential":
        return Potential(
            alphabet=self.alphabet,
            window=self.window,
            table={k: c * float(v) for k, v in self.table.items()},
            name=f"{c:g}*{self.name}",
        )


def constant_potential(alphabet: Alphabet, c: float, dimension: int = 1, name: Optional[str] = None) -> Potential:
    origin = Window.of([(0,) * dimension], dimension=dimension)
    return Potential(
        alphabet=alphabet,
        window=origin,
        table={(i,): float(c) for i in range(len(alphabet))},
        name=name or f"const({c:g})",
    )


def zero_potential(s: Subshift) -> Potential:
    return constant_potential(s.alphabet, 0.0, s.dimension, name="zero")


def single_site_potential(
    alphabet: Alphabet,
    values: Sequence[float],
    dimension: int = 1,
    name: str = "f",
) -> Potential:
    """f(x) = values[x_0]."""
    if len(values) != len(alphabet):
        raise ValueError(f"{len(values)} values for an alphabet of {len(alphabet)} symbols")
    origin = Window.of([(0,) * dimension], dimension=dimension)
    return Potential(
        alphabet=alphabet,
        window=origin,
        table={(i,): float(v) for i, v in enumerate(values)},
        name=name,
    )


def indicator_potential(alphabet: Alphabet, symbol: int, c: float = 1.0, dimension: int = 1) -> Potential:
    """c · 1[x_0 = symbol]."""
    values = [c if i == symbol else 0.0 for i in range(len(alphabet))]
    return single_site_potential(alphabet, values, dimension, name=f"{c:g}*1[{alphabet.symbol(symbol)}]")


@dataclass(frozen=True)
class CylinderSups:
    """Per-cylinder sup of S_F f with the lexicographically least maximizing completion."""
    values: np.ndarray
    window: Window
    completions: np.ndarray

    def completion(self, i: int) -> Pattern:
        return Pattern(window=self.window, values=tuple(int(v) for v in self.completions[i]))


def cylinder_sups(
    f: Potential,
    s: Subshift,
    F: Window,
    cylinders: PatternSet,
    budget: Optional[int] = None,
) -> CylinderSups:
    """
    sup of S_F f over each cylinder, by exhaustive admissible extension.

    Each cylinder (a pattern on C) is extended over the collar
    (C ∪ F ⊕ D_f) ∖ C; extensions are scanned in lexicographic order, so the
    first maximizer is the least one.

    Args:
        f: Potential
        s: Subshift carrying the cylinders
        F: Summation window
        cylinders: Locally admissible patterns on C
        budget: Maximum number of (cylinder, extension) rows

    Returns:
        CylinderSups aligned with ``cylinders``

    Raises:
        EmptyCylinderError: a cylinder has no admissible extension
    """
    if f.dimension != s.dimension or F.dimension != s.dimension:
        raise DimensionMismatchError("potential, subshift and window dimensions differ")
    budget = budget or settings.enumeration_budget
    C = cylinders.window
    W = union_window(C, minkowski_sum(F, f.window))
    collar = difference_window(W, C)
    k = len(s.alphabet)
    n_cyl = len(cylinders)

    m_ext = k ** len(collar)
    if n_cyl * m_ext > budget:
        logger.error(f"Extending {n_cyl} cylinders over a collar of {len(collar)} sites exceeds budget {budget}")
        raise EnumerationBudgetError(bound=n_cyl * m_ext, budget=budget, what="cylinder extensions")

    rows = np.empty((n_cyl * m_ext, len(W)), dtype=SYMBOL_DTYPE)
    rows[:, W.columns(C.points)] = np.repeat(cylinders.rows, m_ext, axis=0)
    if len(collar):
        ext = np.array(list(itertools.product(range(k), repeat=len(collar))), dtype=SYMBOL_DTYPE)
        rows[:, W.columns(collar.points)] = np.tile(ext, (n_cyl, 1))

    sums = f.evaluate_rows(rows, W, F)
    if s.forbidden and len(collar):
        sums = np.where(admissible_mask(s, W, rows), sums, -np.inf)

    grid = sums.reshape(n_cyl, m_ext)
    best = grid.argmax(axis=1)
    values = grid[np.arange(n_cyl), best]
    empty = np.flatnonzero(np.isneginf(values))
    if len(empty):
        raise EmptyCylinderError(
            f"{len(empty)} cylinders on {C.describe()} have no admissible extension to {W.describe()}"
        )
    completions = rows.reshape(n_cyl, m_ext, len(W))[np.arange(n_cyl), best]
    logger.debug(f"Cylinder sups of {f.name} over {n_cyl} cylinders, collar {len(collar)}")
    return CylinderSups(values=values, window=W, completions=completions)


def birkhoff_sup(f: Potential, s: Subshift, F: Window, p: Pattern) -> float:
    """
    max of Σ_{g∈F} f(q|_{g+D_f}) over locally admissible extensions q of p.

    Args:
        f: Potential on X_1
        s: Subshift
        F: Summation window
        p: Locally admissible pattern (usually on F)

    Returns:
        The exact supremum in nats
    """
    if not s.is_locally_admissible(p):
        raise EmptyCylinderError(f"pattern {p.values} is not locally admissible in {s.name}")
    single = PatternSet(window=p.window, rows=p.as_array()[None, :])
    return float(cylinder_sups(f, s, F, single).values[0])

