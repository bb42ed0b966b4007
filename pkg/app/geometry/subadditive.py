from typing import Dict, List, Mapping, Optional
from dataclasses import dataclass
import logging

from app.config import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubadditiveReadout:
    """Per-index normalized values φ(F_n)/|F_n| with the running-infimum limit estimate."""
    indices: List[int]
    values: List[float]
    running_inf: List[float]
    estimate: float
    spread: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "indices": list(self.indices),
            "values": list(self.values),
            "running_inf": list(self.running_inf),
            "estimate": self.estimate,
            "spread": self.spread,
        }


def subadditive_limit(
    values: Mapping[int, float],
    sizes: Mapping[int, int],
    trailing: Optional[int] = None,
) -> SubadditiveReadout:
    """
    Estimate lim φ(F_n)/|F_n| for a G-invariant subadditive φ.

    The running infimum of the normalized values is the reported estimate;
    the spread is max minus min of the normalized values over the last
    ``trailing`` indices.

    Args:
        values: φ(F_n) keyed by index n
        sizes: |F_n| keyed by index n
        trailing: Width of the trailing window (defaults to settings.trailing_window)

    Returns:
        SubadditiveReadout
    """
    if not values:
        raise ValueError("subadditive_limit needs at least one value")
    k = trailing or settings.trailing_window

    indices = sorted(values)
    normalized = []
    for n in indices:
        size = sizes.get(n)
        if size is None or size <= 0:
            raise ValueError(f"missing or non-positive size for index {n}")
        normalized.append(values[n] / size)

    running_inf = []
    current = float("inf")
    for v in normalized:
        current = min(current, v)
        running_inf.append(current)

    tail = normalized[-k:]
    spread = max(tail) - min(tail)

    logger.debug(f"Subadditive readout over n={indices[0]}..{indices[-1]}: "
                 f"estimate={running_inf[-1]:.12g}, spread={spread:.3g}")

    return SubadditiveReadout(
        indices=indices,
        values=normalized,
        running_inf=running_inf,
        estimate=running_inf[-1],
        spread=spread,
    )
