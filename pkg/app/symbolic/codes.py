from typing import Dict, List, Mapping, Optional, Tuple
from dataclasses import dataclass
from functools import cached_property
import logging

import numpy as np

from app.errors import (
    DimensionMismatchError,
    SchemeCompatibilityError,
    WindowError,
)
from app.geometry.windows import Window, add, minkowski_sum, negate
from app.symbolic.patterns import SYMBOL_DTYPE, Pattern, PatternSet, mixed_radix
from app.symbolic.subshift import Subshift, enumerate_patterns, one_point_shift

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockCode:
    """
    Sliding block code π: source → target with code window D.

    ``rule`` maps the tuple of source symbol codes on D (in D's column
    order) to a target symbol code.
    """
    source: Subshift
    target: Subshift
    window: Window
    rule: Mapping[Tuple[int, ...], int]
    name: str = "π"

    def __post_init__(self):
        if self.source.dimension != self.target.dimension or self.window.dimension != self.source.dimension:
            raise DimensionMismatchError(f"code {self.name} mixes lattice dimensions")
        k_target = len(self.target.alphabet)
        for key, value in self.rule.items():
            if len(key) != len(self.window):
                raise WindowError(f"rule entry {key} of {self.name} does not fit the code window")
            if not 0 <= value < k_target:
                raise ValueError(f"rule entry {key} -> {value} of {self.name} is outside the target alphabet")
        missing = [
            p for p in enumerate_patterns(self.source, self.window).patterns()
            if p.values not in self.rule
        ]
        if missing:
            raise ValueError(
                f"rule of {self.name} is not total: {len(missing)} admissible patterns on D lack an image"
            )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.window, self.name, tuple(sorted(self.rule.items()))))

    @cached_property
    def lookup(self) -> np.ndarray:
        """Dense rule table indexed by the mixed-radix code of the D-pattern (-1 = undefined)."""
        k = len(self.source.alphabet)
        table = np.full(k ** len(self.window), -1, dtype=np.int64)
        for key, value in self.rule.items():
            idx = 0
            for v in key:
                idx = idx * k + v
            table[idx] = value
        return table

    def domain(self, target_window: Window) -> Window:
        """E ⊕ D, the source window needed to code a target window E."""
        return minkowski_sum(target_window, self.window)

    def apply_rows(self, rows: np.ndarray, source_window: Window, target_window: Window) -> np.ndarray:
        """
        Vectorized coding of many source patterns.

        Args:
            rows: Source patterns on ``source_window`` (one per row)
            source_window: Must contain target_window ⊕ D
            target_window: Window of the image patterns

        Returns:
            Image rows on ``target_window``
        """
        k = len(self.source.alphabet)
        out = np.empty((rows.shape[0], len(target_window)), dtype=SYMBOL_DTYPE)
        for j, g in enumerate(target_window.points):
            placed = [add(d, g) for d in self.window.points]
            if not all(p in source_window for p in placed):
                raise WindowError(
                    f"source window {source_window.describe()} does not contain {g} + D for code {self.name}"
                )
            codes = mixed_radix(rows[:, source_window.columns(placed)], k)
            images = self.lookup[codes]
            if np.any(images < 0):
                raise ValueError(f"code {self.name} applied to a pattern outside its rule table")
            out[:, j] = images
        return out


def apply_code(c: BlockCode, p: Pattern, target_window: Optional[Window] = None) -> Pattern:
    """
    Apply a block code to one pattern.

    Args:
        c: Block code
        p: Source pattern on a window containing E ⊕ D
        target_window: E; defaults to every g with g + D inside p's window

    Returns:
        Image pattern on E
    """
    if target_window is None:
        candidates = [
            g for g in minkowski_sum(p.window, negate(c.window)).points
            if all(add(d, g) in p.window for d in c.window.points)
        ]
        if not candidates:
            raise WindowError(f"pattern window {p.window.describe()} is too small for code {c.name}")
        target_window = Window.of(candidates, dimension=p.window.dimension)
    images = c.apply_rows(p.as_array()[None, :], p.window, target_window)
    return Pattern(window=target_window, values=tuple(int(v) for v in images[0]))


def identity_code(s: Subshift) -> BlockCode:
    origin = Window.of([(0,) * s.dimension], dimension=s.dimension)
    rule = {(i,): i for i in range(len(s.alphabet))}
    return BlockCode(source=s, target=s, window=origin, rule=rule, name="id")


def symbol_map_code(source: Subshift, target: Subshift, mapping: Mapping[int, int], name: str = "π") -> BlockCode:
    """Single-site code s ↦ mapping[s]."""
    origin = Window.of([(0,) * source.dimension], dimension=source.dimension)
    return BlockCode(
        source=source,
        target=target,
        window=origin,
        rule={(s,): int(t) for s, t in mapping.items()},
        name=name,
    )


@dataclass(frozen=True)
class SystemChain:
    """X_1 → X_2 → … → X_r linked by block codes π_1 … π_{r-1}."""
    systems: Tuple[Subshift, ...]
    codes: Tuple[BlockCode, ...]

    def __post_init__(self):
        if len(self.systems) < 2:
            raise ValueError("a chain needs at least two systems")
        if len(self.codes) != len(self.systems) - 1:
            raise ValueError(f"{len(self.systems)} systems need {len(self.systems) - 1} codes, got {len(self.codes)}")
        dims = {s.dimension for s in self.systems}
        if len(dims) != 1:
            raise DimensionMismatchError(f"chain mixes dimensions {sorted(dims)}")
        for i, c in enumerate(self.codes):
            if c.source != self.systems[i] or c.target != self.systems[i + 1]:
                raise ValueError(f"code {c.name} does not link level {i + 1} to level {i + 2}")

    @property
    def r(self) -> int:
        return len(self.systems)

    @property
    def dimension(self) -> int:
        return self.systems[0].dimension

    def system(self, level: int) -> Subshift:
        """X_level, 1-based."""
        return self.systems[level - 1]

    def code(self, level: int) -> BlockCode:
        """π_level: X_level → X_{level+1}, 1-based."""
        return self.codes[level - 1]

    def composed_window(self, level: int) -> Window:
        """Window of π^{(level-1)} = π_{level-1} ∘ … ∘ π_1 (the origin for level 1)."""
        w = Window.of([(0,) * self.dimension], dimension=self.dimension)
        for i in range(1, level):
            w = minkowski_sum(w, self.code(i).window)
        return w


@dataclass(frozen=True)
class FiberMap:
    """Level-i cylinders grouped under their level-(i+1) image."""
    source: PatternSet
    target: PatternSet
    parent: np.ndarray  # parent[v] = index in target of the image of source row v

    def fiber_sizes(self) -> np.ndarray:
        return np.bincount(self.parent, minlength=len(self.target))

    def empty_fibers(self) -> np.ndarray:
        return np.flatnonzero(self.fiber_sizes() == 0)


def check_compatible(code: BlockCode, E_source: Window, E_target: Window) -> None:
    """E_i ⊇ E_{i+1} ⊕ D_i."""
    needed = minkowski_sum(E_target, code.window)
    if not needed.issubset(E_source):
        raise SchemeCompatibilityError(
            f"window {E_source.describe()} does not contain {E_target.describe()} ⊕ D of code {code.name}"
        )


def build_fiber_map(code: BlockCode, source: PatternSet, target: PatternSet) -> FiberMap:
    """
    Group source patterns by their image inside an enumerated target set.

    Raises:
        SchemeCompatibilityError: windows incompatible or an image is not a target pattern
    """
    check_compatible(code, source.window, target.window)
    images = code.apply_rows(source.rows, source.window, target.window)
    parent = target.index_of(images)
    if np.any(parent < 0):
        bad = int(np.sum(parent < 0))
        raise SchemeCompatibilityError(
            f"{bad} images under {code.name} are not admissible patterns of {code.target.name}"
        )
    return FiberMap(source=source, target=target, parent=parent)


def fiber_decomposition(
    chain: SystemChain,
    level: int,
    E_i: Window,
    E_next: Window,
    budget: Optional[int] = None,
) -> Dict[Pattern, List[Pattern]]:
    """
    Partition level-i patterns on E_i by their image on E_{i+1}.

    Args:
        chain: System chain
        level: i (1-based, 1 <= i < r)
        E_i: Level-i window
        E_next: Level-(i+1) window with E_i ⊇ E_next ⊕ D_i
        budget: Enumeration budget

    Returns:
        Map from every level-(i+1) pattern to its (possibly empty) fiber, in lexicographic order
    """
    if not 1 <= level < chain.r:
        raise ValueError(f"level {level} has no outgoing code in a chain of length {chain.r}")
    code = chain.code(level)
    check_compatible(code, E_i, E_next)
    source = enumerate_patterns(chain.system(level), E_i, budget)
    target = enumerate_patterns(chain.system(level + 1), E_next, budget)
    fmap = build_fiber_map(code, source, target)

    fibers: Dict[Pattern, List[Pattern]] = {target.pattern(u): [] for u in range(len(target))}
    keys = list(fibers)
    for v, u in enumerate(fmap.parent):
        fibers[keys[int(u)]].append(source.pattern(v))
    empty = fmap.empty_fibers()
    if len(empty):
        logger.warning(f"{len(empty)} empty fibers at level {level + 1} on {E_next.describe()}")
    return fibers


def point_code(source: Subshift) -> BlockCode:
    """Factor onto the one-point system."""
    target = one_point_shift(source.dimension)
    return symbol_map_code(source, target, {i: 0 for i in range(len(source.alphabet))}, name="to-point")
