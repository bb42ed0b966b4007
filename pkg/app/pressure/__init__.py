"""
Weighted topological pressure.

Potentials and their cylinder suprema, the exponent/weight vectors, and the
nested partition function evaluated over fiber trees.
"""

from .potentials import (
    Potential,
    birkhoff_sup,
    cylinder_sups,
    constant_potential,
    zero_potential,
    single_site_potential,
    indicator_potential,
)
from .weights import ExponentVector, WeightVector, weights_from_exponents, coefficient_check
from .partition import (
    CylinderScheme,
    FiberTree,
    PressureEstimate,
    build_fiber_tree,
    level_sums,
    nested_partition_function,
    pressure_estimate,
    pressure_sweep,
    weighted_entropy_estimate,
)

__all__ = [
    "Potential",
    "birkhoff_sup",
    "cylinder_sups",
    "constant_potential",
    "zero_potential",
    "single_site_potential",
    "indicator_potential",
    "ExponentVector",
    "WeightVector",
    "weights_from_exponents",
    "coefficient_check",
    "CylinderScheme",
    "FiberTree",
    "PressureEstimate",
    "build_fiber_tree",
    "level_sums",
    "nested_partition_function",
    "pressure_estimate",
    "pressure_sweep",
    "weighted_entropy_estimate",
]
