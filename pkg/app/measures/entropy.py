"""
Partition entropies, entropy-rate brackets and the finite subadditivity check.

All entropies are in nats with 0·log 0 = 0.
"""

from typing import Dict, List, Optional, Tuple
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.stats import entropy as shannon_entropy

from app.errors import MeasureError, WindowError
from app.geometry.windows import (
    FolnerSchedule,
    Window,
    boundary,
    interval,
    minkowski_sum,
    negate,
    translate_window,
)
from app.measures.marginals import MarginalTable, marginal
from app.measures.specs import Bernoulli, MeasureSpec, closed_form_entropy, require_invariant
from app.symbolic.codes import BlockCode
from app.symbolic.patterns import unique_rows
from app.symbolic.subshift import Subshift

logger = logging.getLogger(__name__)

BRACKET_TOLERANCE = 1e-10


def partition_entropy(t: MarginalTable) -> float:
    """H = −Σ p log p over the cells of the table."""
    probs = np.asarray(t.probs, dtype=float)
    probs = probs[probs > 0]
    if len(probs) == 0:
        return 0.0
    return float(shannon_entropy(probs))


def conditional_entropy(joint: MarginalTable, given: Window) -> float:
    """
    H(α | β) = H(α ∨ β) − H(β), where ``joint`` is the α ∨ β table and β is
    the partition by patterns on ``given`` ⊆ joint.window.
    """
    if not given.issubset(joint.window):
        raise WindowError(f"conditioning window {given.describe()} is not inside {joint.window.describe()}")
    joint.validate()
    value = partition_entropy(joint) - partition_entropy(joint.restrict(given))
    return max(value, 0.0) if value > -1e-12 else value


def joint_entropy(rows: np.ndarray, probs: np.ndarray) -> float:
    """Entropy of the partition whose cells are the distinct rows."""
    uniq, inverse = unique_rows(rows)
    acc = np.zeros(len(uniq))
    np.add.at(acc, inverse, probs)
    acc = acc[acc > 0]
    return float(shannon_entropy(acc)) if len(acc) else 0.0


@dataclass(frozen=True)
class EntropyBounds:
    """
    Bracket for an entropy rate.

    ``upper`` is H(α_{F_n})/|F_n|; ``increment`` is H(α_{F_n + one site}) − H(α_{F_n})
    (d=1, an upper bound for stationary processes); ``lower`` is the
    conditioned increment (equal to ``increment`` on the base level).
    """
    indices: List[int]
    upper: List[float]
    increment: List[Optional[float]]
    lower: List[float]
    interval: tuple
    closed_form: Optional[float] = None

    @property
    def gap(self) -> float:
        return self.interval[1] - self.interval[0]

    def to_dict(self) -> Dict[str, object]:
        return {
            "indices": list(self.indices),
            "upper": list(self.upper),
            "increment": list(self.increment),
            "lower": list(self.lower),
            "interval": list(self.interval),
            "closed_form": self.closed_form,
            "gap": self.gap,
        }

    def rows(self) -> List[Dict[str, object]]:
        return [
            {"n": n, "upper": u, "increment": inc, "lower": lo}
            for n, u, inc, lo in zip(self.indices, self.upper, self.increment, self.lower)
        ]


def _compose_window(codes: List[BlockCode], dimension: int) -> Window:
    w = Window.of([(0,) * dimension], dimension=dimension)
    for c in codes:
        w = minkowski_sum(w, c.window)
    return w


def _image_rows(codes: List[BlockCode], rows: np.ndarray, source: Window, target: Window) -> np.ndarray:
    """Push rows on ``source`` through ``codes`` down to ``target``."""
    windows = [target]
    for c in reversed(codes):
        windows.append(c.domain(windows[-1]))
    current_rows, current_window = rows, source
    for c, w in zip(codes, reversed(windows[:-1])):
        current_rows = c.apply_rows(current_rows, current_window, w)
        current_window = w
    return current_rows


def level_entropy_rate(
    m: MeasureSpec,
    source: Subshift,
    codes: List[BlockCode],
    schedule: FolnerSchedule,
    E_base: Window,
    budget: Optional[int] = None,
) -> EntropyBounds:
    """
    Entropy bracket of the pushforward of ``m`` through ``codes``.

    For d=1 the lower sequence conditions on the source block at the left
    end of the window, which gives a lower bound for hidden-Markov images of
    Bernoulli and Markov sources; without codes it reduces to the plain
    increment. For d=2 the lower sequence is the closed form when the image
    is Bernoulli (single-site codes), otherwise 0.

    Args:
        m: Measure on ``source``
        source: Level-1 subshift
        codes: Codes from level 1 down to the level of interest (possibly empty)
        schedule: Følner schedule
        E_base: Window whose patterns generate the partition α
        budget: Enumeration budget

    Returns:
        EntropyBounds

    Raises:
        MeasureError: ``m`` is not invariant, or the bounds cross beyond rounding
    """
    require_invariant(m, "entropy rate")
    d = source.dimension
    D = _compose_window(codes, d)
    closed = _image_closed_form(m, codes, D)

    indices, upper, increment, lower = [], [], [], []
    for n in schedule.indices():
        size = schedule.size(n)
        if d == 1:
            block = minkowski_sum(interval(0, size), E_base)
            longer = minkowski_sum(interval(0, size + 1), E_base)
            hull_D = interval(min(p[0] for p in D.points), max(p[0] for p in D.points) + 1)
            state = translate_window(hull_D, block.points[0])
            source_window = _cover(minkowski_sum(longer, D), state)
            table = marginal(m, source, source_window, budget)

            y_long = _image_rows(codes, table.rows, source_window, longer)
            y_short = y_long[:, longer.columns(block.points)]
            s_cols = table.rows[:, source_window.columns(state.points)]

            h_short = joint_entropy(y_short, table.probs)
            h_long = joint_entropy(y_long, table.probs)
            upper.append(h_short / size)
            increment.append(h_long - h_short)
            lower.append(
                joint_entropy(np.concatenate([y_long, s_cols], axis=1), table.probs)
                - joint_entropy(np.concatenate([y_short, s_cols], axis=1), table.probs)
            )
        else:
            F = schedule.window(n)
            block = minkowski_sum(F, E_base)
            source_window = minkowski_sum(block, D)
            table = marginal(m, source, source_window, budget)
            y = _image_rows(codes, table.rows, source_window, block)
            upper.append(joint_entropy(y, table.probs) / size)
            increment.append(None)
            lower.append(closed if closed is not None else 0.0)
        indices.append(n)
        logger.debug(f"n={n}: upper={upper[-1]:.12g} lower={lower[-1]:.12g}")

    if d == 2 and closed is None:
        logger.warning("No closed form for a 2-d image measure; lower entropy bound set to 0")

    return EntropyBounds(
        indices=indices,
        upper=upper,
        increment=increment,
        lower=lower,
        interval=bracket_interval(upper, increment, lower),
        closed_form=closed,
    )


def bracket_interval(
    upper: List[float],
    increment: List[Optional[float]],
    lower: List[float],
) -> Tuple[float, float]:
    """
    (max lower, min of upper and increments).

    Crossings within BRACKET_TOLERANCE are rounding and collapse onto the
    upper end; wider crossings raise MeasureError.
    """
    hi = min(upper)
    finite_increments = [v for v in increment if v is not None]
    if finite_increments:
        hi = min(hi, min(finite_increments))
    lo = max(lower)
    if lo > hi + BRACKET_TOLERANCE:
        logger.error(f"Entropy bounds cross: lower {lo!r} > upper {hi!r} (upper={upper}, lower={lower})")
        raise MeasureError(f"entropy bounds cross by {lo - hi:.3g}: lower {lo!r}, upper {hi!r}")
    return min(lo, hi), hi


def _cover(a: Window, b: Window) -> Window:
    xs = [p[0] for p in a.points] + [p[0] for p in b.points]
    return interval(min(xs), max(xs) + 1)


def _image_closed_form(m: MeasureSpec, codes: List[BlockCode], D: Window) -> Optional[float]:
    """Closed-form entropy of the image when it is again Bernoulli or the identity image."""
    if not codes:
        return closed_form_entropy(m)
    if isinstance(m, Bernoulli) and len(D) == 1:
        p = np.asarray(m.probabilities)
        for c in codes:
            image = np.zeros(len(c.target.alphabet))
            np.add.at(image, c.lookup[np.arange(len(p))], p)
            p = image
        return float(shannon_entropy(p)) if len(p) > 1 else 0.0
    return None


def entropy_rate(
    m: MeasureSpec,
    s: Subshift,
    schedule: FolnerSchedule,
    E_base: Window,
    budget: Optional[int] = None,
) -> EntropyBounds:
    """
    Bracketing interval for h_μ on ``s``.

    For Bernoulli and Markov measures the closed form lies inside the interval.
    """
    bounds = level_entropy_rate(m, s, [], schedule, E_base, budget)
    logger.info(f"Entropy bracket [{bounds.interval[0]:.12g}, {bounds.interval[1]:.12g}]")
    return bounds


def entropy_subadditivity_check(
    m: MeasureSpec,
    s: Subshift,
    F: Window,
    A: Window,
    budget: Optional[int] = None,
) -> float:
    """
    Slack of H(α_F) ≤ Σ_{g∈F} H(α_{A+g})/|A| + |B(F, −A)|·log|α|.

    α is the partition by the symbol at the origin. Nonnegative when the
    origin lies in A.

    Returns:
        right-hand side minus left-hand side

    Raises:
        MeasureError: ``m`` is not invariant
    """
    require_invariant(m, "entropy subadditivity check")
    if (0,) * A.dimension not in A:
        logger.warning(f"A = {A.describe()} does not contain the origin; the bound may fail")
    lhs = partition_entropy(marginal(m, s, F, budget))
    # H(α_{A+g}) depends only on A for invariant measures
    h_A = partition_entropy(marginal(m, s, A, budget))
    rhs = len(F) * h_A / len(A) + len(boundary(F, negate(A))) * math.log(len(s.alphabet))
    return rhs - lhs
