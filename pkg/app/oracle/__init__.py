from .brute_force import (
    OracleResult,
    brute_force_logZ,
    oracle_logZ,
    transfer_matrix_count,
    grid_search_objective,
    walters_inequality,
    instance_digest,
)

__all__ = [
    "OracleResult",
    "brute_force_logZ",
    "oracle_logZ",
    "transfer_matrix_count",
    "grid_search_objective",
    "walters_inequality",
    "instance_digest",
]
