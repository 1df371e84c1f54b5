"""Spectral multipliers of Laplace transform type.

Two independent representations are provided: the truncated eigenfunction
series (:mod:`.spectral`) and the principal-value singular integral
(:mod:`.singular`).  :mod:`.ornstein` holds the Ornstein-Uhlenbeck splitting
and the conjugation back to the Hermite operator.
"""

from __future__ import annotations

import numpy as np

from ..heatkernels import KernelFamily
from .grid import GridFunction, bump_corpus, polynomial_bump
from .ornstein import (
    OUDecomposition,
    hermite_via_ou,
    ou_decomposition,
    ou_multiplier_part,
    remainder_apply,
    remainder_eigenvalue,
    remainder_kernel,
    shifted_ou_values,
)
from .singular import (
    DEFAULT_SCHEDULE,
    DiagonalEvaluation,
    NotConverged,
    PVResult,
    lambda_schedule,
    multiplier_kernel,
    pv_apply,
)
from .spectral import (
    DEFAULT_MODES,
    SpectralCoefficients,
    SpectralTruncation,
    multiplier_sequence,
    spectral_apply,
    spectral_coefficients,
    spectral_values,
)
from .symbols import (
    MultiplierSymbol,
    damped,
    exp_decay,
    imaginary_power_symbol,
    indicator,
    one,
    parse_symbol,
    symbol_m,
)


def imaginary_power(
    family: KernelFamily,
    gamma: float,
    f: GridFunction,
    mode: str = "spectral",
    grid=None,
    trunc: SpectralTruncation = SpectralTruncation(),
) -> GridFunction:
    """``L^{i gamma} f`` sampled on ``grid`` (default: the grid of ``f``)."""
    if family.tag not in ("Hermite", "Laguerre"):
        raise ValueError("imaginary powers need a positive spectrum (Hermite or Laguerre)")
    grid = f.grid if grid is None else np.asarray(grid, dtype=float)
    if gamma == 0:
        same = grid.shape == f.grid.shape and np.array_equal(grid, f.grid)
        values = f.values if same else f(grid)
        return GridFunction(grid, values.astype(complex), f.domain)
    symbol = imaginary_power_symbol(gamma)
    if mode == "spectral":
        return spectral_apply(family, symbol, f, trunc, grid)
    if mode == "pv":
        return GridFunction(grid, pv_apply(family, symbol, f, grid).value, f.domain)
    raise ValueError(f"unknown mode {mode!r}")


__all__ = [
    "DEFAULT_MODES",
    "DEFAULT_SCHEDULE",
    "DiagonalEvaluation",
    "GridFunction",
    "MultiplierSymbol",
    "NotConverged",
    "OUDecomposition",
    "PVResult",
    "SpectralCoefficients",
    "SpectralTruncation",
    "bump_corpus",
    "damped",
    "exp_decay",
    "hermite_via_ou",
    "imaginary_power",
    "imaginary_power_symbol",
    "indicator",
    "lambda_schedule",
    "multiplier_kernel",
    "multiplier_sequence",
    "one",
    "ou_decomposition",
    "ou_multiplier_part",
    "parse_symbol",
    "polynomial_bump",
    "pv_apply",
    "remainder_apply",
    "remainder_eigenvalue",
    "remainder_kernel",
    "shifted_ou_values",
    "spectral_apply",
    "spectral_coefficients",
    "spectral_values",
    "symbol_m",
]
