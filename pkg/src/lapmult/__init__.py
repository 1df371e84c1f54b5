"""Laplace-transform-type spectral multipliers for the Hermite, Laguerre and
Ornstein-Uhlenbeck operators, in eigenexpansion and singular-integral form."""

from .heatkernels import (
    CLASSICAL,
    HERMITE,
    ORNSTEIN_UHLENBECK,
    KernelFamily,
    heat_kernel,
    heat_kernel_dt,
    laguerre,
    near_diagonal_mass,
    pv_weight,
)
from .quadrature import (
    MaxSubdivisionsExceeded,
    QuadratureResult,
    Tolerance,
    adaptive_integrate,
    inner_product,
    meda_time_integrate,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSICAL",
    "HERMITE",
    "ORNSTEIN_UHLENBECK",
    "KernelFamily",
    "MaxSubdivisionsExceeded",
    "QuadratureResult",
    "Tolerance",
    "adaptive_integrate",
    "heat_kernel",
    "heat_kernel_dt",
    "inner_product",
    "laguerre",
    "meda_time_integrate",
    "near_diagonal_mass",
    "pv_weight",
]
