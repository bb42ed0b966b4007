from typing import Dict, List, Optional, Sequence
from dataclasses import dataclass
import logging

import numpy as np

from app.config import settings
from app.geometry.windows import FolnerSchedule
from app.measures.objective import ObjectiveInterval, integrate_potential, weighted_objective
from app.measures.specs import MeasureSpec, describe_measure
from app.pressure.partition import CylinderScheme, pressure_estimate
from app.pressure.potentials import Potential, zero_potential
from app.pressure.weights import ExponentVector, weights_from_exponents
from app.symbolic.codes import SystemChain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualityEntry:
    potential: str
    pressure: float
    integral: float
    gap: float

    def to_dict(self) -> Dict[str, object]:
        return {"potential": self.potential, "pressure": self.pressure, "integral": self.integral, "gap": self.gap}


@dataclass(frozen=True)
class DualityReport:
    """
    One-sided check of P(f) − w_1∫f dμ_0 ≥ h^a_{μ_0} over a finite potential family.

    ``minimum`` is the smallest P(f) − w_1∫f dμ_0 over the family, an upper
    estimate for h^a_{μ_0}; ``gap_at_zero`` is that quantity minus h^a_{μ_0} for f = 0.
    """
    measure: str
    weighted_entropy: ObjectiveInterval
    entries: List[DualityEntry]
    minimum: float
    gap_at_zero: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e.gap >= -self.tolerance for e in self.entries)

    def to_dict(self) -> Dict[str, object]:
        return {
            "measure": self.measure,
            "weighted_entropy": [self.weighted_entropy.lower, self.weighted_entropy.upper],
            "entries": [e.to_dict() for e in self.entries],
            "minimum": self.minimum,
            "gap_at_zero": self.gap_at_zero,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "scope": "finite potential family (one-sided)",
        }


def _is_zero(f: Potential) -> bool:
    return bool(np.all(np.asarray(list(f.table.values()), dtype=float) == 0.0))


def duality_check(
    chain: SystemChain,
    a: ExponentVector,
    mu0: MeasureSpec,
    f_family: Sequence[Potential],
    schedule: FolnerSchedule,
    scheme: Optional[CylinderScheme] = None,
    tolerance: Optional[float] = None,
    budget: Optional[int] = None,
) -> DualityReport:
    """
    Compare pressures of a potential family against the weighted entropy of μ_0.

    Args:
        chain: System chain
        a: Exponent vector
        mu0: Invariant measure on X_1
        f_family: Potentials to test; the zero potential is added when missing
        schedule: Følner schedule for both pressure and entropy
        scheme: Cylinder scheme (coarsest compatible one by default)
        tolerance: Allowed negative gap
        budget: Enumeration budget

    Returns:
        DualityReport
    """
    scheme = scheme or CylinderScheme.refined(chain, 1)
    tolerance = settings.identity_tolerance if tolerance is None else tolerance
    w = weights_from_exponents(a)
    s = chain.system(1)

    family = list(f_family)
    if not any(_is_zero(f) for f in family):
        family.append(zero_potential(s))

    h = weighted_objective(chain, mu0, zero_potential(s), a, schedule, budget=budget)
    entries: List[DualityEntry] = []
    gap_at_zero: Optional[float] = None
    for f in family:
        p = pressure_estimate(chain, f, a, schedule, scheme, budget).estimate
        integral = integrate_potential(mu0, chain, f, budget)
        gap = p - w[1] * integral - h.upper
        entries.append(DualityEntry(potential=f.name, pressure=p, integral=integral, gap=gap))
        if _is_zero(f) and gap_at_zero is None:
            gap_at_zero = gap
        logger.debug(f"Duality {f.name}: P={p:.12g} ∫f={integral:.12g} gap={gap:.3g}")

    minimum = min(e.pressure - w[1] * e.integral for e in entries)
    report = DualityReport(
        measure=describe_measure(mu0),
        weighted_entropy=h,
        entries=entries,
        minimum=minimum,
        gap_at_zero=float(gap_at_zero),
        tolerance=tolerance,
    )
    if report.passed:
        logger.info(f"Duality check passed for {report.measure}: minimum {minimum:.12g}, gap at 0 {gap_at_zero:.3g}")
    else:
        worst = min(entries, key=lambda e: e.gap)
        logger.warning(f"Duality check failed for {report.measure}: {worst.potential} has gap {worst.gap:.3g}")
    return report
