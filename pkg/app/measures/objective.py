from typing import Dict, List, Optional
from dataclasses import dataclass
import logging

from app.geometry.windows import FolnerSchedule, Window
from app.measures.entropy import EntropyBounds, level_entropy_rate
from app.measures.marginals import marginal
from app.measures.specs import MeasureSpec, check_family, describe_measure, require_invariant
from app.pressure.potentials import Potential
from app.pressure.weights import ExponentVector, weights_from_exponents
from app.symbolic.codes import SystemChain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveInterval:
    """[Σ w_i lower_i + w_1∫f dμ, Σ w_i upper_i + w_1∫f dμ] with the per-level brackets."""
    lower: float
    upper: float
    integral: float
    weights: List[float]
    levels: List[Optional[EntropyBounds]]
    measure: str

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, object]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "integral": self.integral,
            "weights": list(self.weights),
            "levels": [b.to_dict() if b is not None else None for b in self.levels],
            "measure": self.measure,
        }


def integrate_potential(m: MeasureSpec, chain: SystemChain, f: Potential, budget: Optional[int] = None) -> float:
    """∫f dμ, exactly from the D_f-marginal."""
    table = marginal(m, chain.system(1), f.window, budget)
    return f.integrate(table.as_mapping())


def weighted_objective(
    chain: SystemChain,
    m: MeasureSpec,
    f: Potential,
    a: ExponentVector,
    schedule: FolnerSchedule,
    E_base: Optional[Window] = None,
    budget: Optional[int] = None,
) -> ObjectiveInterval:
    """
    Σ w_i h_{μ_i} + w_1 ∫f dμ with μ_i the image of μ at level i, as an interval.

    Levels with zero weight are skipped.

    Args:
        chain: System chain
        m: Invariant measure on X_1
        f: Potential on X_1
        a: Exponent vector
        schedule: Følner schedule for the entropy brackets
        E_base: Generating window (defaults to the origin)
        budget: Enumeration budget

    Returns:
        ObjectiveInterval
    """
    check_family(m, chain.system(1))
    require_invariant(m, "weighted objective")
    w = weights_from_exponents(a)
    E = E_base or Window.of([(0,) * chain.dimension], dimension=chain.dimension)
    integral = integrate_potential(m, chain, f, budget)

    lower = w[1] * integral
    upper = w[1] * integral
    levels: List[Optional[EntropyBounds]] = []
    for i in range(1, chain.r + 1):
        if w[i] == 0.0:
            levels.append(None)
            continue
        codes = [chain.code(j) for j in range(1, i)]
        bounds = level_entropy_rate(m, chain.system(1), codes, schedule, E, budget)
        levels.append(bounds)
        lower += w[i] * bounds.interval[0]
        upper += w[i] * bounds.interval[1]

    logger.debug(f"Objective of {describe_measure(m)}: [{lower:.12g}, {upper:.12g}]")
    return ObjectiveInterval(
        lower=lower,
        upper=upper,
        integral=integral,
        weights=w.to_list(),
        levels=levels,
        measure=describe_measure(m),
    )
