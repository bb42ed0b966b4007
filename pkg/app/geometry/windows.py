from typing import Dict, Iterable, Iterator, List, Optional, Tuple
from dataclasses import dataclass, field
from functools import cached_property
import itertools
import logging

from app.errors import DimensionMismatchError, WindowError

logger = logging.getLogger(__name__)

# A lattice point of Z^d, d in {1, 2}. The group operation is coordinatewise addition.
GroupPoint = Tuple[int, ...]

SUPPORTED_DIMENSIONS = (1, 2)


@dataclass(frozen=True)
class Window:
    """
    Finite set of lattice points with a fixed dimension.

    Points are stored sorted lexicographically; that order is the column
    order of every pattern array defined on the window.
    """
    points: Tuple[GroupPoint, ...]
    dimension: int

    def __post_init__(self):
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise DimensionMismatchError(f"unsupported lattice dimension {self.dimension}")
        for p in self.points:
            if len(p) != self.dimension:
                raise DimensionMismatchError(
                    f"point {p} does not have dimension {self.dimension}"
                )
        if list(self.points) != sorted(set(self.points)):
            raise WindowError("window points must be sorted and free of duplicates")

    @classmethod
    def of(cls, points: Iterable[Iterable[int]], dimension: Optional[int] = None) -> "Window":
        """Build a nonempty window from any iterable of points (ints allowed for d=1)."""
        normalized = []
        for p in points:
            normalized.append((int(p),) if isinstance(p, int) else tuple(int(c) for c in p))
        if not normalized:
            raise WindowError("a window must contain at least one point")
        if len(set(normalized)) != len(normalized):
            raise WindowError(f"duplicate points in window: {sorted(normalized)}")
        d = dimension if dimension is not None else len(normalized[0])
        return cls(points=tuple(sorted(normalized)), dimension=d)

    @classmethod
    def empty(cls, dimension: int) -> "Window":
        """Empty point set; only produced as a boundary set."""
        return cls(points=(), dimension=dimension)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[GroupPoint]:
        return iter(self.points)

    def __contains__(self, point: object) -> bool:
        return point in self.index

    @cached_property
    def index(self) -> Dict[GroupPoint, int]:
        """Column index of each point."""
        return {p: i for i, p in enumerate(self.points)}

    @property
    def is_empty(self) -> bool:
        return not self.points

    def columns(self, points: Iterable[GroupPoint]) -> List[int]:
        """Column indices of ``points``; raises if a point is outside the window."""
        try:
            return [self.index[p] for p in points]
        except KeyError as e:
            raise WindowError(f"point {e.args[0]} is not in the window") from None

    def issubset(self, other: "Window") -> bool:
        _check_same_dimension(self, other)
        return all(p in other for p in self.points)

    def translate(self, g: GroupPoint) -> "Window":
        return translate_window(self, g)

    def describe(self) -> str:
        if self.is_empty:
            return "∅"
        if self.dimension == 1 and len(self) == self.points[-1][0] - self.points[0][0] + 1:
            return f"[{self.points[0][0]},{self.points[-1][0] + 1})"
        return "{" + ", ".join(str(p[0] if self.dimension == 1 else p) for p in self.points) + "}"


def _check_same_dimension(*windows: Window) -> None:
    dims = {w.dimension for w in windows}
    if len(dims) > 1:
        raise DimensionMismatchError(f"windows of mixed dimensions {sorted(dims)}")


def add(g: GroupPoint, h: GroupPoint) -> GroupPoint:
    return tuple(a + b for a, b in zip(g, h))


def negate_point(g: GroupPoint) -> GroupPoint:
    return tuple(-a for a in g)


def interval(start: int, stop: int) -> Window:
    """The d=1 window [start, stop)."""
    return Window.of(range(start, stop), dimension=1)


def window_from_box(lo: int, hi: int, dimension: int) -> Window:
    """The box [lo, hi)^d."""
    points = itertools.product(range(lo, hi), repeat=dimension)
    return Window.of(points, dimension=dimension)


def translate_window(window: Window, g: GroupPoint) -> Window:
    """K + g."""
    if len(g) != window.dimension:
        raise DimensionMismatchError(f"translation {g} does not match dimension {window.dimension}")
    if window.is_empty:
        return window
    return Window.of((add(p, g) for p in window.points), dimension=window.dimension)


def negate(window: Window) -> Window:
    """−K, the additive form of K^{-1}."""
    return Window.of((negate_point(p) for p in window.points), dimension=window.dimension)


def minkowski_sum(a: Window, b: Window) -> Window:
    """A ⊕ B = {x + y : x ∈ A, y ∈ B}."""
    _check_same_dimension(a, b)
    return Window.of({add(x, y) for x in a.points for y in b.points}, dimension=a.dimension)


def union_window(*windows: Window) -> Window:
    _check_same_dimension(*windows)
    points = set()
    for w in windows:
        points.update(w.points)
    return Window.of(points, dimension=windows[0].dimension)


def difference_window(a: Window, b: Window) -> Window:
    """A ∖ B (possibly empty)."""
    _check_same_dimension(a, b)
    points = [p for p in a.points if p not in b]
    return Window(points=tuple(points), dimension=a.dimension)


def boundary(F: Window, K: Window) -> Window:
    """
    B(F, K): all g whose translate K + g meets both F and its complement.

    Args:
        F: Finite window
        K: Finite window of the same dimension

    Returns:
        The boundary set, possibly empty
    """
    _check_same_dimension(F, K)
    # K + g meets F only if g ∈ F − K
    candidates = {add(f, negate_point(k)) for f in F.points for k in K.points}
    straddling = []
    for g in candidates:
        inside = [add(k, g) in F for k in K.points]
        if any(inside) and not all(inside):
            straddling.append(g)
    return Window(points=tuple(sorted(straddling)), dimension=F.dimension)


@dataclass(frozen=True)
class FolnerSchedule:
    """
    Growing box sequence F_n.

    ``kind="origin"`` gives [0, n)^d, ``kind="centered"`` gives [-n, n)^d.
    """
    kind: str = "origin"
    dimension: int = 1
    n_min: int = 1
    n_max: int = 10

    def __post_init__(self):
        if self.kind not in ("origin", "centered"):
            raise ValueError(f"unknown Følner schedule kind '{self.kind}'")
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise DimensionMismatchError(f"unsupported lattice dimension {self.dimension}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError(f"invalid index range {self.n_min}..{self.n_max}")

    def indices(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def window(self, n: int) -> Window:
        if n not in self.indices():
            raise ValueError(f"index {n} outside schedule range {self.n_min}..{self.n_max}")
        if self.kind == "origin":
            return window_from_box(0, n, self.dimension)
        return window_from_box(-n, n, self.dimension)

    def size(self, n: int) -> int:
        side = n if self.kind == "origin" else 2 * n
        return side ** self.dimension

    def with_range(self, n_min: Optional[int] = None, n_max: Optional[int] = None) -> "FolnerSchedule":
        return FolnerSchedule(
            kind=self.kind,
            dimension=self.dimension,
            n_min=self.n_min if n_min is None else n_min,
            n_max=self.n_max if n_max is None else n_max,
        )


def folner_ratio(schedule: FolnerSchedule, K: Window, n: int) -> float:
    """|B(F_n, K)| / |F_n|."""
    F = schedule.window(n)
    return len(boundary(F, K)) / len(F)


@dataclass(frozen=True)
class FolnerProfile:
    """Boundary ratios of a schedule against a fixed window K."""
    ratios: Dict[int, float]
    constant: float  # c_K = max_n n * ratio(n)
    eventually_nonincreasing: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "ratios": {str(n): r for n, r in self.ratios.items()},
            "constant": self.constant,
            "eventually_nonincreasing": self.eventually_nonincreasing,
        }


def folner_profile(schedule: FolnerSchedule, K: Window) -> FolnerProfile:
    """
    Ratios over the whole schedule and the reported constant c_K.

    Args:
        schedule: Box schedule
        K: Fixed window

    Returns:
        FolnerProfile with ratio(n) <= c_K / n for every n in range
    """
    ratios = {n: folner_ratio(schedule, K, n) for n in schedule.indices()}
    constant = max(n * r for n, r in ratios.items())
    values = list(ratios.values())
    # non-increasing over the second half of the range
    tail = values[len(values) // 2:]
    eventually = all(b <= a + 1e-15 for a, b in zip(tail, tail[1:]))
    logger.debug(f"Følner profile for |K|={len(K)}: c_K={constant:.4f}, eventually non-increasing={eventually}")
    return FolnerProfile(ratios=ratios, constant=constant, eventually_nonincreasing=eventually)
