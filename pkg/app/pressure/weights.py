from typing import List, Sequence, Tuple
from dataclasses import dataclass
import logging
import math

from app.errors import ExponentRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExponentVector:
    """a = (a_1, …, a_{r-1}) with every a_i in [0, 1]."""
    values: Tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("exponent vector needs at least one component (r >= 2)")
        for i, a in enumerate(self.values, start=1):
            if not (0.0 <= a <= 1.0) or math.isnan(a):
                raise ExponentRangeError(f"exponent outside [0,1]: a_{i}={a}")

    @classmethod
    def of(cls, values: Sequence[float]) -> "ExponentVector":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        """a_i, 1-based."""
        return self.values[i - 1]

    @property
    def r(self) -> int:
        return len(self.values) + 1

    def to_list(self) -> List[float]:
        return list(self.values)


@dataclass(frozen=True)
class WeightVector:
    """Probability vector w = (w_1, …, w_r) derived from the exponents."""
    values: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        """w_i, 1-based."""
        return self.values[i - 1]

    @property
    def r(self) -> int:
        return len(self.values)

    def to_list(self) -> List[float]:
        return list(self.values)


def weights_from_exponents(a: ExponentVector) -> WeightVector:
    """
    w_1 = a_1⋯a_{r-1}, w_i = (1 − a_{i−1}) a_i⋯a_{r-1}, w_r = 1 − a_{r-1}.

    Args:
        a: Exponent vector of a chain of length r

    Returns:
        WeightVector of length r
    """
    r = a.r
    w = []
    for i in range(1, r + 1):
        tail = math.prod(a[j] for j in range(i, r))
        head = 1.0 if i == 1 else 1.0 - a[i - 1]
        w.append(head * tail)
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-12:
        logger.warning(f"Weight vector {w} sums to {total!r}")
    return WeightVector(tuple(w))


def coefficient_check(a: ExponentVector) -> List[float]:
    """
    w_{k+1} a_k + (a_k − 1) Σ_{i≤k} w_i for k = 1 … r−1.

    Every entry vanishes; this is the cancellation behind the log Z identity.
    """
    w = weights_from_exponents(a)
    out = []
    for k in range(1, a.r):
        head = math.fsum(w[i] for i in range(1, k + 1))
        out.append(w[k + 1] * a[k] + (a[k] - 1.0) * head)
    return out
