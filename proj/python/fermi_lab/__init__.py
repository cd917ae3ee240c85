"""Fermionic weak-coupling toolkit (Python bindings)."""

from ._core import (
    ConfigError,
    ConvergenceError,
    Experiment,
    GuardError,
    Partition,
    annihilation,
    bell_number,
    car_check,
    creation,
    limit_coefficients,
    matching_count,
    normal_order,
    sign_demo,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "Experiment",
    "GuardError",
    "Partition",
    "annihilation",
    "bell_number",
    "car_check",
    "creation",
    "limit_coefficients",
    "matching_count",
    "normal_order",
    "sign_demo",
]
