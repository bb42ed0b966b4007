from typing import Dict, List, Optional, Tuple
from dataclasses import dataclass
import logging

import numpy as np

from app.config import settings
from app.errors import DimensionMismatchError, EnumerationBudgetError
from app.geometry.windows import Window, add, negate_point
from app.symbolic.patterns import SYMBOL_DTYPE, Alphabet, Pattern, PatternSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subshift:
    """
    Shift space on Z^d given by a finite list of forbidden patterns.

    An empty forbidden list is the full shift.
    """
    alphabet: Alphabet
    dimension: int = 1
    forbidden: Tuple[Pattern, ...] = ()
    name: str = "X"

    def __post_init__(self):
        for p in self.forbidden:
            if p.window.dimension != self.dimension:
                raise DimensionMismatchError(
                    f"forbidden pattern on a {p.window.dimension}-d window in a {self.dimension}-d subshift"
                )
            if any(v >= len(self.alphabet) for v in p.values):
                raise ValueError(f"forbidden pattern uses a symbol outside the alphabet of {self.name}")

    @property
    def is_full(self) -> bool:
        return not self.forbidden

    @property
    def is_nearest_neighbor(self) -> bool:
        """d=1 and every forbidden pattern lives on one site or two adjacent sites."""
        if self.dimension != 1:
            return False
        for p in self.forbidden:
            xs = [pt[0] for pt in p.window.points]
            if len(xs) > 2 or (len(xs) == 2 and xs[1] - xs[0] != 1):
                return False
        return True

    def adjacency_matrix(self) -> np.ndarray:
        """0/1 transition matrix of a nearest-neighbour SFT (rows: current symbol)."""
        if not self.is_nearest_neighbor:
            raise ValueError(f"{self.name} is not a nearest-neighbour SFT on Z")
        k = len(self.alphabet)
        allowed = np.ones((k, k), dtype=np.int64)
        for p in self.forbidden:
            if len(p.values) == 1:
                s = p.values[0]
                allowed[s, :] = 0
                allowed[:, s] = 0
            else:
                allowed[p.values[0], p.values[1]] = 0
        return allowed

    def placements(self, E: Window) -> Dict[int, List[Tuple[List[int], np.ndarray]]]:
        """
        Every placement of every forbidden pattern fully inside E.

        Returns:
            Map from the largest column of the placement to (columns, values)
        """
        checks: Dict[int, List[Tuple[List[int], np.ndarray]]] = {}
        for p in self.forbidden:
            seen = set()
            for e in E.points:
                for q in p.window.points:
                    g = add(e, negate_point(q))
                    if g in seen:
                        continue
                    seen.add(g)
                    placed = [add(q2, g) for q2 in p.window.points]
                    if all(x in E for x in placed):
                        cols = E.columns(placed)
                        checks.setdefault(max(cols), []).append(
                            (cols, np.asarray(p.values, dtype=SYMBOL_DTYPE))
                        )
        return checks

    def is_locally_admissible(self, pattern: Pattern) -> bool:
        rows = pattern.as_array()[None, :]
        for checks in self.placements(pattern.window).values():
            for cols, vals in checks:
                if np.all(rows[0, cols] == vals):
                    return False
        return True


def enumerate_patterns(s: Subshift, E: Window, budget: Optional[int] = None) -> PatternSet:
    """
    All locally admissible patterns on E in lexicographic order.

    Points are added in window order; after each extension the rows hit by a
    forbidden placement whose last column is the new point are dropped.

    Args:
        s: Subshift
        E: Nonempty window of the same dimension
        budget: Maximum number of rows ever held (defaults to settings.enumeration_budget)

    Returns:
        PatternSet on E
    """
    if E.dimension != s.dimension:
        raise DimensionMismatchError(
            f"window dimension {E.dimension} does not match subshift {s.name} (d={s.dimension})"
        )
    if E.is_empty:
        raise ValueError("cannot enumerate patterns on an empty window")
    budget = budget or settings.enumeration_budget
    k = len(s.alphabet)
    m = len(E)

    checks = s.placements(E) if s.forbidden else {}
    symbols = np.arange(k, dtype=SYMBOL_DTYPE)
    rows = np.zeros((1, 0), dtype=SYMBOL_DTYPE)

    for j in range(m):
        n_rows = rows.shape[0] * k
        if n_rows > budget:
            bound = rows.shape[0] * k ** (m - j)
            logger.error(f"Enumeration on {E.describe()} in {s.name} exceeds budget {budget}")
            raise EnumerationBudgetError(bound=bound, budget=budget)
        rows = np.concatenate(
            [np.repeat(rows, k, axis=0), np.tile(symbols, rows.shape[0])[:, None]],
            axis=1,
        )
        keep = np.ones(rows.shape[0], dtype=bool)
        for cols, vals in checks.get(j, []):
            keep &= ~np.all(rows[:, cols] == vals, axis=1)
        rows = rows[keep]

    logger.debug(f"Enumerated {rows.shape[0]} patterns of {s.name} on {E.describe()}")
    return PatternSet(window=E, rows=rows)


def full_shift(k: int, dimension: int = 1, name: Optional[str] = None) -> Subshift:
    return Subshift(alphabet=Alphabet.of_size(k), dimension=dimension, name=name or f"full-{k}")


def golden_mean_shift() -> Subshift:
    """Binary shift forbidding the word 11."""
    alphabet = Alphabet.of_size(2)
    return Subshift(
        alphabet=alphabet,
        dimension=1,
        forbidden=(Pattern.from_word(alphabet, "11"),),
        name="golden-mean",
    )


def one_point_shift(dimension: int = 1) -> Subshift:
    return Subshift(alphabet=Alphabet(("*",)), dimension=dimension, name="point")


def admissible_mask(s: Subshift, E: Window, rows: np.ndarray) -> np.ndarray:
    """Boolean mask of the rows on E that contain no forbidden placement."""
    keep = np.ones(rows.shape[0], dtype=bool)
    for checks in s.placements(E).values():
        for cols, vals in checks:
            keep &= ~np.all(rows[:, cols] == vals, axis=1)
    return keep
