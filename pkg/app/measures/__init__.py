"""
Invariant measures, their finite-window marginals, and entropy functionals.
"""

from .specs import (
    Bernoulli,
    Markov,
    FiniteSupport,
    MeasureSpec,
    parry_measure,
    closed_form_entropy,
    check_family,
    require_invariant,
    stationary_distribution,
)
from .marginals import MarginalTable, marginal, pushforward, level_marginal
from .entropy import (
    EntropyBounds,
    partition_entropy,
    conditional_entropy,
    entropy_rate,
    level_entropy_rate,
    entropy_subadditivity_check,
)
from .objective import ObjectiveInterval, weighted_objective, integrate_potential

__all__ = [
    "Bernoulli",
    "Markov",
    "FiniteSupport",
    "MeasureSpec",
    "parry_measure",
    "closed_form_entropy",
    "check_family",
    "require_invariant",
    "stationary_distribution",
    "MarginalTable",
    "marginal",
    "pushforward",
    "level_marginal",
    "EntropyBounds",
    "partition_entropy",
    "conditional_entropy",
    "entropy_rate",
    "level_entropy_rate",
    "entropy_subadditivity_check",
    "ObjectiveInterval",
    "weighted_objective",
    "integrate_potential",
]
