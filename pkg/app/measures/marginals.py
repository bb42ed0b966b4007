"""
Finite-window marginals of measures and their pushforwards under block codes.
"""

from typing import Dict, List, Optional
from dataclasses import dataclass
import logging

import numpy as np

from app.errors import DimensionMismatchError, MeasureError, WindowError
from app.geometry.windows import Window, interval, union_window
from app.measures.specs import Bernoulli, FiniteSupport, Markov, MeasureSpec, check_family
from app.symbolic.codes import BlockCode
from app.symbolic.patterns import SYMBOL_DTYPE, Alphabet, Pattern, match_rows, unique_rows
from app.symbolic.subshift import Subshift, enumerate_patterns

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MarginalTable:
    """Probabilities of the patterns on a window; rows in lexicographic order."""
    window: Window
    rows: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.window):
            raise WindowError(f"marginal rows of shape {self.rows.shape} do not fit {self.window.describe()}")
        if len(self.probs) != self.rows.shape[0]:
            raise MeasureError("one probability per row required")

    @classmethod
    def grouped(cls, window: Window, rows: np.ndarray, probs: np.ndarray) -> "MarginalTable":
        """Table from possibly repeated rows; masses of equal rows are added."""
        uniq, inverse = unique_rows(rows)
        acc = np.zeros(len(uniq))
        np.add.at(acc, inverse, probs)
        return cls(window=window, rows=uniq, probs=acc)

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def mass(self) -> float:
        return float(np.sum(self.probs))

    def validate(self) -> None:
        if np.any(self.probs < -MASS_TOLERANCE):
            raise MeasureError("negative mass in marginal table")
        if abs(self.mass - 1.0) > MASS_TOLERANCE:
            raise MeasureError(f"marginal on {self.window.describe()} has total mass {self.mass!r}")

    def restrict(self, sub: Window) -> "MarginalTable":
        if not sub.issubset(self.window):
            raise WindowError(f"{sub.describe()} is not inside {self.window.describe()}")
        return MarginalTable.grouped(sub, self.rows[:, self.window.columns(sub.points)], self.probs)

    def translate_to(self, window: Window) -> "MarginalTable":
        """Same table re-indexed on a translate of its window."""
        if len(window) != len(self.window):
            raise WindowError("translate_to needs a window of the same size")
        return MarginalTable(window=window, rows=self.rows, probs=self.probs)

    def probability(self, pattern: Pattern) -> float:
        if pattern.window != self.window:
            pattern = pattern.restrict(self.window)
        idx = match_rows(self.rows, pattern.as_array()[None, :])[0]
        return float(self.probs[idx]) if idx >= 0 else 0.0

    def as_mapping(self) -> Dict[tuple, float]:
        return {tuple(int(v) for v in row): float(p) for row, p in zip(self.rows, self.probs)}

    def total_variation(self, other: "MarginalTable") -> float:
        """Σ |p − q| over the union of both supports (tables on windows of equal size)."""
        if len(other.window) != len(self.window):
            raise WindowError("total variation needs windows of equal size")
        combined = np.concatenate([self.rows, other.rows])
        uniq, inverse = unique_rows(combined)
        diff = np.zeros(len(uniq))
        np.add.at(diff, inverse[: len(self)], self.probs)
        np.add.at(diff, inverse[len(self):], -other.probs)
        return float(np.sum(np.abs(diff)))

    def records(self, alphabet: Alphabet) -> List[Dict[str, object]]:
        return [
            {"pattern": " ".join(alphabet.symbol(int(v)) for v in row), "probability": float(p)}
            for row, p in zip(self.rows, self.probs)
        ]


def marginal(m: MeasureSpec, s: Subshift, E: Window, budget: Optional[int] = None) -> MarginalTable:
    """
    Exact probabilities of the patterns on E.

    Args:
        m: Measure on ``s``
        s: Subshift
        E: Window
        budget: Enumeration budget

    Returns:
        MarginalTable on E

    Raises:
        MeasureError: the measure charges patterns that are not admissible in ``s``
    """
    if E.dimension != s.dimension:
        raise DimensionMismatchError(f"window dimension {E.dimension} does not match {s.name}")
    check_family(m, s)
    if isinstance(m, Bernoulli):
        table = _bernoulli_marginal(m, s, E, budget)
    elif isinstance(m, Markov):
        table = _markov_marginal(m, s, E, budget)
    else:
        table = _finite_support_marginal(m, s, E)
    if abs(table.mass - 1.0) > MASS_TOLERANCE:
        raise MeasureError(
            f"inadmissible support: measure leaves mass {1.0 - table.mass:.3g} outside the language of {s.name}"
        )
    return table


def _bernoulli_marginal(m: Bernoulli, s: Subshift, E: Window, budget: Optional[int]) -> MarginalTable:
    patterns = enumerate_patterns(s, E, budget)
    p = np.asarray(m.probabilities)
    probs = np.prod(p[patterns.rows.astype(np.int64)], axis=1) if len(E) else np.ones(len(patterns))
    return MarginalTable(window=E, rows=patterns.rows, probs=probs)


def _markov_marginal(m: Markov, s: Subshift, E: Window, budget: Optional[int]) -> MarginalTable:
    xs = [pt[0] for pt in E.points]
    hull = interval(min(xs), max(xs) + 1)
    patterns = enumerate_patterns(s, hull, budget)
    rows = patterns.rows.astype(np.int64)
    pi = np.asarray(m.stationary)
    P = m.matrix()
    probs = pi[rows[:, 0]]
    for j in range(1, rows.shape[1]):
        probs = probs * P[rows[:, j - 1], rows[:, j]]
    table = MarginalTable(window=hull, rows=patterns.rows, probs=probs)
    return table if hull == E else table.restrict(E)


def complete_rows(s: Subshift, window: Window, rows: np.ndarray, target: Window) -> np.ndarray:
    """
    Extend support rows from ``window`` to ``window ∪ target`` by the least-symbol rule.

    For d=1 the sites of the interval hull are filled left to right starting
    after the leftmost support site, then leftwards; each site takes the least
    symbol keeping every row locally admissible.

    Returns:
        Rows on the completed window (``window ∪ target`` for d=2, the hull for d=1)
    """
    if s.dimension == 2:
        if not s.is_full:
            raise MeasureError("finite-support completion on Z^2 is only defined for full shifts")
        full = union_window(window, target)
        out = np.zeros((rows.shape[0], len(full)), dtype=SYMBOL_DTYPE)
        out[:, full.columns(window.points)] = rows
        return out

    xs = [pt[0] for pt in window.points] + [pt[0] for pt in target.points]
    lo, hi = min(xs), max(xs) + 1
    hull = interval(lo, hi)
    out = np.zeros((rows.shape[0], len(hull)), dtype=SYMBOL_DTYPE)
    out[:, hull.columns(window.points)] = rows
    if not s.forbidden:
        return out

    start = window.points[0][0]
    order = [x for x in range(start, hi) if (x,) not in window] + [x for x in range(start - 1, lo - 1, -1)]
    assigned = set(window.points)
    k = len(s.alphabet)
    for x in order:
        assigned.add((x,))
        sub = Window.of(sorted(assigned), dimension=1)
        sub_cols = hull.columns(sub.points)
        col = hull.columns([(x,)])[0]
        # only placements touching the new site can newly fail
        checks = [
            (cols, vals)
            for group in s.placements(sub).values()
            for cols, vals in group
            if sub.index[(x,)] in cols
        ]
        pending = np.ones(rows.shape[0], dtype=bool)
        for c in range(k):
            if not pending.any():
                break
            trial = out[pending][:, sub_cols].copy()
            trial[:, sub.index[(x,)]] = c
            ok = np.ones(trial.shape[0], dtype=bool)
            for cols, vals in checks:
                ok &= ~np.all(trial[:, cols] == vals, axis=1)
            idx = np.flatnonzero(pending)[ok]
            out[idx, col] = c
            pending[idx] = False
        if pending.any():
            raise MeasureError(f"{int(pending.sum())} support patterns cannot be completed at site {x}")
    return out


def _finite_support_marginal(m: FiniteSupport, s: Subshift, E: Window) -> MarginalTable:
    if E.issubset(m.window):
        return MarginalTable.grouped(E, m.rows[:, m.window.columns(E.points)], m.weights)
    completed = complete_rows(s, m.window, m.rows, E)
    if s.dimension == 2:
        full = union_window(m.window, E)
    else:
        xs = [pt[0] for pt in m.window.points] + [pt[0] for pt in E.points]
        full = interval(min(xs), max(xs) + 1)
    return MarginalTable.grouped(E, completed[:, full.columns(E.points)], m.weights)


def pushforward(table: MarginalTable, c: BlockCode, E: Window) -> MarginalTable:
    """
    Image of a source marginal under a block code, on the target window E.

    Raises:
        WindowError: the source marginal does not cover E ⊕ D
    """
    needed = c.domain(E)
    if not needed.issubset(table.window):
        raise WindowError(
            f"missing source marginal: {table.window.describe()} does not contain E ⊕ D = {needed.describe()}"
        )
    images = c.apply_rows(table.rows, table.window, E)
    return MarginalTable.grouped(E, images, table.probs)


def level_marginal(
    m: MeasureSpec,
    codes: List[BlockCode],
    E: Window,
    budget: Optional[int] = None,
) -> MarginalTable:
    """
    Marginal on E of the pushforward of ``m`` through ``codes`` (applied in order).

    With no codes this is the plain marginal on the source system.
    """
    if not codes:
        raise ValueError("level_marginal needs at least one code; use marginal() for level 1")
    windows = [E]
    for c in reversed(codes):
        windows.append(c.domain(windows[-1]))
    table = marginal(m, codes[0].source, windows[-1], budget)
    for c, w in zip(codes, reversed(windows[:-1])):
        table = pushforward(table, c, w)
    return table
