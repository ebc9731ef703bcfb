"""Expectation values of non-Hermitian operators from weak values of their
polar factors, with the worked examples built on that protocol."""

__version__ = "0.1.0"

from .errors import DomainError, InvariantViolation, OrthogonalSelection, WeakValError
from .linalg import PolarFactors, polar_decompose, psd_sqrt
from .weak import (
    WeakValueResult,
    expectation_via_left_polar,
    expectation_via_right_polar,
    matrix_element_via_weak,
    weak_value,
    weak_value_nonhermitian,
)

__all__ = [
    "__version__",
    "DomainError",
    "InvariantViolation",
    "OrthogonalSelection",
    "WeakValError",
    "PolarFactors",
    "polar_decompose",
    "psd_sqrt",
    "WeakValueResult",
    "expectation_via_left_polar",
    "expectation_via_right_polar",
    "matrix_element_via_weak",
    "weak_value",
    "weak_value_nonhermitian",
]
