"""Python bindings for the robust mean-field control solver."""

from ._core import (
    ConfigError,
    DomainError,
    Error,
    NumericError,
    SolverError,
    ValidationError,
    Scenario,
    builtin_names,
    duality,
    evaluate,
    john_nirenberg_bound,
    mp_residual,
    optimize,
    p_m_from_norm,
    psi,
    reverse_holder_K,
    run_cli,
    validate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "NumericError",
    "SolverError",
    "ValidationError",
    "Scenario",
    "builtin_names",
    "duality",
    "evaluate",
    "john_nirenberg_bound",
    "mp_residual",
    "optimize",
    "p_m_from_norm",
    "psi",
    "reverse_holder_K",
    "run_cli",
    "validate",
]
