"""
Subshifts, pattern enumeration and sliding block codes.

Patterns on a window are rows of a ``uint8`` array kept in lexicographic
order; every enumeration and fiber grouping preserves that order.
"""

from .patterns import Alphabet, Pattern, PatternSet, unique_rows, match_rows
from .subshift import (
    Subshift,
    enumerate_patterns,
    admissible_mask,
    full_shift,
    golden_mean_shift,
    one_point_shift,
)
from .codes import (
    BlockCode,
    SystemChain,
    FiberMap,
    apply_code,
    build_fiber_map,
    fiber_decomposition,
    identity_code,
    symbol_map_code,
    point_code,
)

__all__ = [
    "Alphabet",
    "Pattern",
    "PatternSet",
    "unique_rows",
    "match_rows",
    "Subshift",
    "enumerate_patterns",
    "admissible_mask",
    "full_shift",
    "golden_mean_shift",
    "one_point_shift",
    "BlockCode",
    "SystemChain",
    "FiberMap",
    "apply_code",
    "build_fiber_map",
    "fiber_decomposition",
    "identity_code",
    "symbol_map_code",
    "point_code",
]
