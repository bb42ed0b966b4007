"""
Nested partition function Z_F and pressure estimates along Følner schedules.

Level-i cylinders over F are the locally admissible patterns of X_i on
F ⊕ E_i. Each level-i cylinder has a unique image cylinder at level i+1,
which gives the fiber tree the nested sum runs over:

    log Z^(1)(U) = logsumexp_{V ∈ fiber(U)} sup_V S_F f
    log Z^(i)(U) = logsumexp_{V ∈ fiber(U)} a_{i-1} log Z^(i-1)(V)
    log Z_F      = logsumexp_{U at level r} a_{r-1} log Z^(r-1)(U)
"""

from typing import Dict, List, Optional, Sequence, Tuple
from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import logsumexp

from app.errors import DimensionMismatchError, EmptyFiberError, SchemeCompatibilityError
from app.geometry.subadditive import subadditive_limit
from app.geometry.windows import FolnerSchedule, Window, minkowski_sum, window_from_box
from app.pressure.potentials import CylinderSups, Potential, cylinder_sups, zero_potential
from app.pressure.weights import ExponentVector
from app.symbolic.codes import FiberMap, SystemChain, build_fiber_map
from app.symbolic.patterns import PatternSet
from app.symbolic.subshift import enumerate_patterns

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CylinderScheme:
    """Base windows E_1 … E_r with E_i ⊇ E_{i+1} ⊕ D_i."""
    windows: Tuple[Window, ...]
    refinement: int = 1

    def __post_init__(self):
        if any(w.is_empty for w in self.windows):
            raise ValueError("cylinder scheme windows must be nonempty")

    @classmethod
    def refined(cls, chain: SystemChain, refinement: int = 1) -> "CylinderScheme":
        """
        E_r = [0, m)^d and E_i = E_{i+1} ⊕ D_i, the coarsest compatible scheme at scale m.
        """
        if refinement < 1:
            raise ValueError(f"refinement index must be >= 1, got {refinement}")
        windows = [window_from_box(0, refinement, chain.dimension)]
        for level in range(chain.r - 1, 0, -1):
            windows.append(minkowski_sum(windows[-1], chain.code(level).window))
        return cls(windows=tuple(reversed(windows)), refinement=refinement)

    def window(self, level: int) -> Window:
        """E_level, 1-based."""
        return self.windows[level - 1]

    def validate(self, chain: SystemChain) -> None:
        if len(self.windows) != chain.r:
            raise SchemeCompatibilityError(f"scheme has {len(self.windows)} windows for a chain of length {chain.r}")
        for w in self.windows:
            if w.dimension != chain.dimension:
                raise DimensionMismatchError(f"scheme window {w.describe()} does not match chain dimension")
        for level in range(1, chain.r):
            needed = minkowski_sum(self.window(level + 1), chain.code(level).window)
            if not needed.issubset(self.window(level)):
                raise SchemeCompatibilityError(
                    f"E_{level} = {self.window(level).describe()} does not contain "
                    f"E_{level + 1} ⊕ D_{level} = {needed.describe()}"
                )

    def describe(self) -> List[str]:
        return [w.describe() for w in self.windows]


@dataclass(frozen=True)
class FiberTree:
    """
    Cylinders of every level over F with their parent maps.

    ``cylinders[i-1]`` holds the level-i cylinders, ``fibers[i-1]`` maps
    level i into level i+1, and ``sups`` carries sup S_F f per level-1 cylinder.
    """
    F: Window
    cylinders: Tuple[PatternSet, ...]
    fibers: Tuple[FiberMap, ...]
    sups: CylinderSups

    @property
    def r(self) -> int:
        return len(self.cylinders)

    def ancestors(self, level: int) -> np.ndarray:
        """Index of the level-``level`` ancestor of every level-1 cylinder."""
        idx = np.arange(len(self.cylinders[0]))
        for j in range(1, level):
            idx = self.fibers[j - 1].parent[idx]
        return idx

    def push_masses(self, masses: np.ndarray) -> List[np.ndarray]:
        """Masses on level-1 cylinders pushed to every level; entry i-1 is level i."""
        out = [np.asarray(masses, dtype=float)]
        for fmap in self.fibers:
            nxt = np.zeros(len(fmap.target))
            np.add.at(nxt, fmap.parent, out[-1])
            out.append(nxt)
        return out


def build_fiber_tree(
    chain: SystemChain,
    f: Potential,
    F: Window,
    scheme: CylinderScheme,
    budget: Optional[int] = None,
) -> FiberTree:
    """
    Enumerate cylinders at every level and link them by the codes.

    Raises:
        SchemeCompatibilityError: the scheme or an image violates compatibility
        EmptyFiberError: some cylinder has no preimage cylinder
        EmptyCylinderError: a level-1 cylinder has no admissible extension
    """
    scheme.validate(chain)
    cylinders = []
    for level in range(1, chain.r + 1):
        window = minkowski_sum(F, scheme.window(level))
        cylinders.append(enumerate_patterns(chain.system(level), window, budget))

    fibers = []
    for level in range(1, chain.r):
        fmap = build_fiber_map(chain.code(level), cylinders[level - 1], cylinders[level])
        empty = fmap.empty_fibers()
        if len(empty):
            example = cylinders[level].pattern(int(empty[0]))
            logger.error(f"Empty fiber at level {level + 1} over {F.describe()}: {example.values}")
            raise EmptyFiberError(
                f"{len(empty)} level-{level + 1} cylinders have no level-{level} preimage "
                f"(first: {example.values} on {example.window.describe()})"
            )
        fibers.append(fmap)

    sups = cylinder_sups(f, chain.system(1), F, cylinders[0], budget)
    logger.debug(
        f"Fiber tree over {F.describe()}: " + ", ".join(str(len(c)) for c in cylinders) + " cylinders per level"
    )
    return FiberTree(F=F, cylinders=tuple(cylinders), fibers=tuple(fibers), sups=sups)


def grouped_logsumexp(values: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    """log Σ exp(values) within each group; -inf for empty groups."""
    peak = np.full(n_groups, -np.inf)
    np.maximum.at(peak, groups, values)
    safe = np.where(np.isfinite(peak), peak, 0.0)
    acc = np.zeros(n_groups)
    np.add.at(acc, groups, np.exp(values - safe[groups]))
    with np.errstate(divide="ignore"):
        return safe + np.log(acc)


@dataclass(frozen=True)
class LevelSums:
    """log Z^(i) on level-(i+1) cylinders for i = 1 … r−1, and log Z_F."""
    log_z_levels: Tuple[np.ndarray, ...]
    log_z: float


def level_sums(tree: FiberTree, a: ExponentVector) -> LevelSums:
    """Bottom-up evaluation of the nested sums over a fiber tree."""
    if len(a) != tree.r - 1:
        raise ValueError(f"exponent vector of length {len(a)} for a chain of length {tree.r}")
    levels = []
    current = tree.sups.values
    for i, fmap in enumerate(tree.fibers, start=1):
        weighted = current if i == 1 else a[i - 1] * current
        current = grouped_logsumexp(weighted, fmap.parent, len(fmap.target))
        levels.append(current)
    log_z = float(logsumexp(a[tree.r - 1] * current))
    return LevelSums(log_z_levels=tuple(levels), log_z=log_z)


def nested_partition_function(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    F: Window,
    scheme: CylinderScheme,
    budget: Optional[int] = None,
) -> float:
    """
    log Z_F for the chain, potential and exponents.

    Args:
        chain: System chain X_1 → … → X_r
        f: Potential on X_1
        a: Exponents a_1 … a_{r-1}
        F: Window from the Følner schedule
        scheme: Compatible cylinder scheme
        budget: Enumeration budget

    Returns:
        log Z_F in nats
    """
    tree = build_fiber_tree(chain, f, F, scheme, budget)
    return level_sums(tree, a).log_z


@dataclass(frozen=True)
class PressureEstimate:
    """Per-scale readout of log Z_{F_n}/|F_n| at one scheme refinement."""
    indices: List[int]
    sizes: List[int]
    log_z: List[float]
    values: List[float]
    running_inf: List[float]
    estimate: float
    spread: float
    refinement: int
    exponents: List[float]
    potential: str
    schedule: str = "origin"

    def to_dict(self) -> Dict[str, object]:
        return {
            "indices": list(self.indices),
            "sizes": list(self.sizes),
            "log_z": list(self.log_z),
            "values": list(self.values),
            "running_inf": list(self.running_inf),
            "estimate": self.estimate,
            "spread": self.spread,
            "refinement": self.refinement,
            "exponents": list(self.exponents),
            "potential": self.potential,
            "schedule": self.schedule,
        }

    def rows(self) -> List[Dict[str, object]]:
        """CSV rows (n, size, refinement, log_Z, value, running_inf)."""
        return [
            {
                "n": n,
                "size": size,
                "refinement": self.refinement,
                "log_Z": lz,
                "value": v,
                "running_inf": ri,
            }
            for n, size, lz, v, ri in zip(self.indices, self.sizes, self.log_z, self.values, self.running_inf)
        ]


def pressure_estimate(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    schedule: FolnerSchedule,
    scheme: CylinderScheme,
    budget: Optional[int] = None,
) -> PressureEstimate:
    """
    log Z_{F_n}/|F_n| over the schedule with its running infimum.

    Args:
        chain: System chain
        f: Potential on X_1
        a: Exponent vector
        schedule: Følner schedule (its full index range is swept)
        scheme: Cylinder scheme at one refinement
        budget: Enumeration budget

    Returns:
        PressureEstimate
    """
    log_z: Dict[int, float] = {}
    sizes: Dict[int, int] = {}
    for n in schedule.indices():
        F = schedule.window(n)
        log_z[n] = nested_partition_function(chain, f, a, F, scheme, budget)
        sizes[n] = len(F)
        logger.debug(f"n={n} |F|={len(F)} refinement={scheme.refinement}: log Z = {log_z[n]:.12g}")

    readout = subadditive_limit(log_z, sizes)
    logger.info(
        f"Pressure of {f.name} at a={a.to_list()} refinement={scheme.refinement}: "
        f"{readout.estimate:.12g} (spread {readout.spread:.3g})"
    )
    return PressureEstimate(
        indices=readout.indices,
        sizes=[sizes[n] for n in readout.indices],
        log_z=[log_z[n] for n in readout.indices],
        values=readout.values,
        running_inf=readout.running_inf,
        estimate=readout.estimate,
        spread=readout.spread,
        refinement=scheme.refinement,
        exponents=a.to_list(),
        potential=f.name,
        schedule=schedule.kind,
    )


def pressure_sweep(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    schedule: FolnerSchedule,
    refinements: Sequence[int],
    budget: Optional[int] = None,
) -> List[PressureEstimate]:
    """Pressure estimates with n swept inside each scheme refinement."""
    return [
        pressure_estimate(chain, f, a, schedule, CylinderScheme.refined(chain, m), budget)
        for m in refinements
    ]


def weighted_entropy_estimate(
    chain: SystemChain,
    a: ExponentVector,
    schedule: FolnerSchedule,
    scheme: CylinderScheme,
    budget: Optional[int] = None,
) -> PressureEstimate:
    """Topological entropy of exponent a, the pressure of the zero potential."""
    return pressure_estimate(chain, zero_potential(chain.system(1)), a, schedule, scheme, budget)
