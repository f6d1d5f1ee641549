"""Backstepping synthesis and incremental-stability verification.

The extension module does the work; this package re-exports its surface.
"""

from ._core import (
    ConfigurationError,
    Controller,
    ExpressionSyntaxError,
    MathDomainError,
    UnboundVariable,
    builtin_controller,
    cascade_controller,
    config_digest,
    decay_check,
    evaluate,
    free_variables,
    integrate,
    iss_check,
    reference_control,
    reference_metric,
    strict_controller,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "Controller",
    "ExpressionSyntaxError",
    "MathDomainError",
    "UnboundVariable",
    "builtin_controller",
    "cascade_controller",
    "config_digest",
    "decay_check",
    "evaluate",
    "free_variables",
    "integrate",
    "iss_check",
    "reference_control",
    "reference_metric",
    "strict_controller",
    "verify",
]
