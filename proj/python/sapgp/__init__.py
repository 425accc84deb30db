"""Sketch-and-project solvers for Gaussian process regression."""

from ._sapgp import (
    ConfigError,
    ContractError,
    Error,
    NumericalError,
    __version__,
    kernel_matrix,
    nystrom_apply_inv,
    posterior_samples,
    rand_nystrom,
    sample_kdpp,
    solve_dense,
    solve_kernel,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "Error",
    "NumericalError",
    "kernel_matrix",
    "nystrom_apply_inv",
    "posterior_samples",
    "rand_nystrom",
    "sample_kdpp",
    "solve_dense",
    "solve_kernel",
]
