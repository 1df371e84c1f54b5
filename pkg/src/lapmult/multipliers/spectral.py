"""Eigenfunction expansions: coefficients and truncated multiplier series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..heatkernels import KernelFamily
from ..quadrature import Tolerance, adaptive_integrate, gaussian_window
from .grid import GridFunction
from .symbols import MultiplierSymbol, symbol_m

__all__ = [
    "SpectralTruncation",
    "SpectralCoefficients",
    "spectral_coefficients",
    "spectral_values",
    "spectral_apply",
    "multiplier_sequence",
    "series_values",
    "DEFAULT_MODES",
]

DEFAULT_MODES = 400
COEFFICIENT_TOLERANCE = Tolerance(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=100000)
_KNOTS_PER_CHUNK = 64
_EVAL_CHUNK = 2048


@dataclass(frozen=True)
class SpectralTruncation:
    K: int = DEFAULT_MODES
    coefficient_tail_bound: float = 0.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("need at least one eigenmode")


@dataclass
class SpectralCoefficients:
    """``c_k`` for ``k = 0..K`` (trailing axis = coordinates) and the Parseval defect."""

    family: KernelFamily
    coefficients: np.ndarray
    norm_squared: np.ndarray
    parseval_defect: np.ndarray

    @property
    def truncation(self) -> SpectralTruncation:
        return SpectralTruncation(self.coefficients.shape[0] - 1, float(np.max(self.parseval_defect)))


def _weight(family, x):
    return np.exp(-x * x) if family.measure == "gaussian" else np.ones_like(x)


def spectral_coefficients(
    family: KernelFamily, f: GridFunction, K: int = DEFAULT_MODES, tol: Tolerance = COEFFICIENT_TOLERANCE
) -> SpectralCoefficients:
    """``c_k = int f phi_k dmu`` for ``k <= K``.

    The spline is cubic between knots, so the knots are the initial panel
    edges.  The support is processed in chunks of knots to bound memory; the
    squared norm is integrated alongside for the Parseval defect.
    """
    if family.tag == "Classical":
        raise ValueError("the classical family has no eigenexpansion")
    if family.domain != f.domain:
        raise ValueError(f"grid function lives on {f.domain!r}, family on {family.domain!r}")
    knots = f.grid
    if family.measure == "gaussian":
        # the weight makes contributions past the Gaussian window negligible
        window = gaussian_window(tol.abs_tol)
        knots = knots[np.abs(knots) <= window]
        if knots.size < 2:
            knots = np.array([max(f.grid[0], -window), min(f.grid[-1], window)])
    vector = f.values.ndim == 2

    def integrand(x):
        fx = f(x)
        if not vector:
            fx = fx[:, None]
        w = _weight(family, x)[:, None]
        basis = family.eigenfunctions(K, x).T
        prod = (fx[:, None, :] * basis[:, :, None]) * w[:, :, None]
        sq = (np.abs(fx) ** 2 * w)[:, None, :]
        return np.concatenate([prod, sq], axis=1)

    total = 0.0
    starts = list(range(0, knots.size - 1, _KNOTS_PER_CHUNK))
    for s in starts:
        piece = knots[s : s + _KNOTS_PER_CHUNK + 1]
        res = adaptive_integrate(integrand, piece[0], piece[-1], tol, points=piece[1:-1])
        total = total + res.value
    coeffs = total[:-1]
    norm2 = total[-1].real
    defect = np.abs(norm2 - np.sum(np.abs(coeffs) ** 2, axis=0))
    if not vector:
        coeffs, norm2, defect = coeffs[:, 0], norm2[0], defect[0]
    return SpectralCoefficients(family, coeffs, norm2, defect)


def multiplier_sequence(family: KernelFamily, symbol: MultiplierSymbol, K: int) -> np.ndarray:
    """``m(nu_k)`` for ``k <= K``; a zero eigenvalue is sent to ``m(0) = 0``."""
    nu = family.eigenvalue(np.arange(K + 1))
    out = np.zeros(K + 1, dtype=complex)
    pos = nu > 0
    out[pos] = symbol_m(symbol, nu[pos])
    return out


def series_values(family: KernelFamily, amplitudes: np.ndarray, x) -> np.ndarray:
    """``sum_k amplitudes[k] phi_k(x)`` summed in the fixed order ``k = 0..K``."""
    x = np.asarray(x, dtype=float)
    K = amplitudes.shape[0] - 1
    flat = x.ravel()
    out = np.zeros((flat.size,) + amplitudes.shape[1:], dtype=complex)
    for s in range(0, flat.size, _EVAL_CHUNK):
        xs = flat[s : s + _EVAL_CHUNK]
        basis = family.eigenfunctions(K, xs)
        out[s : s + _EVAL_CHUNK] = np.tensordot(basis.T, amplitudes, axes=(1, 0))
    return out.reshape(x.shape + amplitudes.shape[1:])


def spectral_values(
    family: KernelFamily,
    symbol: MultiplierSymbol,
    f: GridFunction,
    x,
    trunc: SpectralTruncation = SpectralTruncation(),
    coefficients: SpectralCoefficients | None = None,
):
    """``sum_{k<=K} m(nu_k) c_k(f) phi_k(x)`` at arbitrary points."""
    if coefficients is None:
        coefficients = spectral_coefficients(family, f, trunc.K)
    K = coefficients.coefficients.shape[0] - 1
    m = multiplier_sequence(family, symbol, K)
    c = coefficients.coefficients
    amp = c * m.reshape((-1,) + (1,) * (c.ndim - 1))
    return series_values(family, amp, x)


def spectral_apply(
    family: KernelFamily,
    symbol: MultiplierSymbol,
    f: GridFunction,
    trunc: SpectralTruncation = SpectralTruncation(),
    grid=None,
) -> GridFunction:
    """Apply the multiplier through the truncated eigenexpansion.

    The result is sampled on ``grid`` (default: the grid of ``f``).  Note the
    output is in general not supported where ``f`` is, so pass a wider grid
    when the result feeds a norm or a second operator.
    """
    grid = f.grid if grid is None else np.asarray(grid, dtype=float)
    return GridFunction(grid, spectral_values(family, symbol, f, grid, trunc), f.domain)
