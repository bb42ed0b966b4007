"""
The finite-window measure ν_n behind the partition function, its shift
average μ_n and the entropy identities tying both to log Z.

ν_n puts on each level-1 cylinder V the mass

    exp(sup_V S_F f + Σ_j (a_j − 1) log Z^(j)(ancestor_{j+1}(V)) − log Z_F)

at the least maximizing completion x_V. Pushing ν_n down the fiber tree
gives ν_n^(i) on the level-i cylinders, and with Ŵ_j = W^(j)/Z_F

    H(ν_n^(1)) = log Z − ∫S_F f dν_n − Σ_j (a_j − 1) Ŵ_j
    H(ν_n^(i)) = log Z − a_{i−1} Ŵ_{i−1} − Σ_{j≥i} (a_j − 1) Ŵ_j
"""

from typing import Dict, List, Optional, Tuple
from dataclasses import dataclass
import logging

import numpy as np
from scipy.stats import entropy as shannon_entropy

from app.errors import MeasureError, WindowError
from app.geometry.windows import (
    GroupPoint,
    Window,
    difference_window,
    interval,
    minkowski_sum,
    translate_window,
    union_window,
)
from app.measures.entropy import partition_entropy
from app.measures.marginals import MarginalTable, complete_rows, pushforward
from app.measures.specs import FiniteSupport
from app.pressure.partition import CylinderScheme, build_fiber_tree, level_sums
from app.pressure.potentials import Potential
from app.pressure.weights import ExponentVector, WeightVector, coefficient_check, weights_from_exponents
from app.symbolic.codes import SystemChain
from app.symbolic.subshift import Subshift

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class LogZReport:
    """log Z_F together with the ν_n entropies and the identity residuals."""
    window: str
    size: int
    log_z: float
    w_hat: List[float]
    entropies: List[float]
    integral: float
    exponents: List[float]
    weights: List[float]
    residual: float
    level_residuals: List[float]
    coefficients: List[float]
    support_size: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "window": self.window,
            "size": self.size,
            "log_Z": self.log_z,
            "W_hat": list(self.w_hat),
            "entropies": list(self.entropies),
            "integral": self.integral,
            "exponents": list(self.exponents),
            "weights": list(self.weights),
            "residual": self.residual,
            "level_residuals": list(self.level_residuals),
            "coefficients": list(self.coefficients),
            "support_size": self.support_size,
        }


def _aggregate_residual(entropies: List[float], integral: float, log_z: float, w: WeightVector) -> float:
    total = sum(w[i] * h for i, h in enumerate(entropies, start=1))
    return total + w[1] * integral - log_z


def construct_nu_n(
    chain: SystemChain,
    f: Potential,
    a: ExponentVector,
    F_n: Window,
    scheme: CylinderScheme,
    budget: Optional[int] = None,
) -> Tuple[FiniteSupport, LogZReport]:
    """
    Build ν_n over F_n and the report of its entropy identities.

    Args:
        chain: System chain
        f: Potential on X_1
        a: Exponent vector
        F_n: Window of the Følner schedule
        scheme: Compatible cylinder scheme
        budget: Enumeration budget

    Returns:
        (ν_n as a finite-support measure on the completion window, LogZReport)

    Raises:
        MeasureError: the weights do not sum to 1
    """
    tree = build_fiber_tree(chain, f, F_n, scheme, budget)
    sums = level_sums(tree, a)
    r = tree.r

    log_nu = tree.sups.values - sums.log_z
    for j in range(1, r):
        log_nu = log_nu + (a[j] - 1.0) * sums.log_z_levels[j - 1][tree.ancestors(j + 1)]
    weights = np.exp(log_nu)
    total = float(np.sum(weights))
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        logger.error(f"ν_n over {F_n.describe()} has total mass {total!r}")
        raise MeasureError(f"ν_n weights sum to {total!r}, not 1")
    weights = weights / total

    masses = tree.push_masses(weights)
    entropies = [float(shannon_entropy(m[m > 0])) for m in masses]
    integral = float(np.dot(weights, tree.sups.values))
    # Ŵ_j lives on the level-(j+1) cylinders
    w_hat = [float(np.dot(masses[j], sums.log_z_levels[j - 1])) for j in range(1, r)]

    level_residuals = []
    for i in range(1, r + 1):
        tail = sum((a[j] - 1.0) * w_hat[j - 1] for j in range(i, r))
        if i == 1:
            expected = sums.log_z - integral - tail
        else:
            expected = sums.log_z - a[i - 1] * w_hat[i - 2] - tail
        level_residuals.append(entropies[i - 1] - expected)

    w = weights_from_exponents(a)
    residual = _aggregate_residual(entropies, integral, sums.log_z, w)
    nu = FiniteSupport(window=tree.sups.window, rows=tree.sups.completions, weights=weights)
    report = LogZReport(
        window=F_n.describe(),
        size=len(F_n),
        log_z=sums.log_z,
        w_hat=w_hat,
        entropies=entropies,
        integral=integral,
        exponents=a.to_list(),
        weights=w.to_list(),
        residual=residual,
        level_residuals=level_residuals,
        coefficients=coefficient_check(a),
        support_size=nu.size,
    )
    logger.info(f"ν_n over {F_n.describe()}: {nu.size} atoms, log Z={sums.log_z:.12g}, residual={residual:.3g}")
    return nu, report


def verify_logZ_identity(report: LogZReport, a: ExponentVector, w: Optional[WeightVector] = None) -> float:
    """|Σ w_i H(ν_n^(i)) + w_1 ∫S_F f dν_n − log Z_F| recomputed from the report."""
    w = w or weights_from_exponents(a)
    if w.r != len(report.entropies):
        raise ValueError(f"weight vector of length {w.r} for a report with {len(report.entropies)} levels")
    return abs(_aggregate_residual(report.entropies, report.integral, report.log_z, w))


def _completed(nu: FiniteSupport, s: Subshift, target: Window) -> Tuple[Window, np.ndarray]:
    """Rows of ν completed over ``target``, with the window they live on."""
    if target.issubset(nu.window):
        return nu.window, nu.rows
    rows = complete_rows(s, nu.window, nu.rows, target)
    if s.dimension == 2:
        return union_window(nu.window, target), rows
    xs = [p[0] for p in nu.window.points] + [p[0] for p in target.points]
    return interval(min(xs), max(xs) + 1), rows


def _translate_tables(nu: FiniteSupport, s: Subshift, F_n: Window, E: Window) -> List[MarginalTable]:
    """Marginals of ν on E+g for g ∈ F_n, each re-indexed on E."""
    if len(E) > len(F_n):
        raise WindowError(f"query window {E.describe()} is too large for {F_n.describe()}")
    full, rows = _completed(nu, s, minkowski_sum(F_n, E))
    tables = []
    for g in F_n.points:
        cols = full.columns(translate_window(E, g).points)
        tables.append(MarginalTable.grouped(E, rows[:, cols], nu.weights))
    return tables


def invariantize(nu: FiniteSupport, s: Subshift, F_n: Window, E: Window) -> MarginalTable:
    """
    Marginal on E of μ_n = (1/|F_n|) Σ_{g∈F_n} g·ν.

    Raises:
        WindowError: E has more sites than F_n
    """
    tables = _translate_tables(nu, s, F_n, E)
    rows = np.concatenate([t.rows for t in tables])
    probs = np.concatenate([t.probs for t in tables]) / len(F_n)
    return MarginalTable.grouped(E, rows, probs)


def translation_defect(nu: FiniteSupport, s: Subshift, F_n: Window, E: Window, g: GroupPoint) -> Tuple[float, float]:
    """
    Σ|μ_n(E) − μ_n(E+g)| and its bound 2·|F_n Δ (F_n − g)|/|F_n|.
    """
    here = invariantize(nu, s, F_n, E)
    moved = translate_window(E, g)
    shifted = _translate_tables(nu, s, F_n, moved)
    rows = np.concatenate([t.rows for t in shifted])
    probs = np.concatenate([t.probs for t in shifted]) / len(F_n)
    there = MarginalTable.grouped(E, rows, probs)
    back = translate_window(F_n, tuple(-v for v in g))
    sym = len(difference_window(F_n, back)) + len(difference_window(back, F_n))
    return here.total_variation(there), 2.0 * sym / len(F_n)


def nu_objective(
    chain: SystemChain,
    nu: FiniteSupport,
    F_n: Window,
    E: Window,
    f: Potential,
    a: ExponentVector,
) -> float:
    """Σ w_i H(μ_n^(i) on E)/|E| + w_1 ∫f dμ_n for the shift average of ν."""
    s = chain.system(1)
    w = weights_from_exponents(a)
    value = w[1] * f.integrate(invariantize(nu, s, F_n, f.window).as_mapping())
    for i in range(1, chain.r + 1):
        if w[i] == 0.0:
            continue
        windows = [E]
        for level in range(i - 1, 0, -1):
            windows.append(chain.code(level).domain(windows[-1]))
        table = invariantize(nu, s, F_n, windows[-1])
        for level, target in zip(range(1, i), reversed(windows[:-1])):
            table = pushforward(table, chain.code(level), target)
        value += w[i] * partition_entropy(table) / len(E)
    return value


def concavity_gap(nu: FiniteSupport, s: Subshift, F_n: Window, E: Window) -> float:
    """H(μ_n on E) − mean over g ∈ F_n of H(ν on E+g); nonnegative by concavity."""
    averaged = partition_entropy(invariantize(nu, s, F_n, E))
    pieces = [partition_entropy(t) for t in _translate_tables(nu, s, F_n, E)]
    return averaged - float(np.mean(pieces))


