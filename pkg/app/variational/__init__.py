"""
Variational side: optimization over measure families, the measures ν_n and
μ_n built from the partition function, and the duality check.
"""

from .optimizer import (
    OptimizerConfig,
    OptimizationResult,
    RestartTrace,
    optimize,
    optimize_objective,
    project_simplex,
    soundness_gap,
)
from .construction import (
    LogZReport,
    construct_nu_n,
    verify_logZ_identity,
    invariantize,
    translation_defect,
    nu_objective,
    concavity_gap,
)
from .duality import DualityEntry, DualityReport, duality_check

__all__ = [
    "OptimizerConfig",
    "OptimizationResult",
    "RestartTrace",
    "optimize",
    "optimize_objective",
    "project_simplex",
    "soundness_gap",
    "LogZReport",
    "construct_nu_n",
    "verify_logZ_identity",
    "invariantize",
    "translation_defect",
    "nu_objective",
    "concavity_gap",
    "DualityEntry",
    "DualityReport",
    "duality_check",
]
