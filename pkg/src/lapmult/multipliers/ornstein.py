r"""Ornstein-Uhlenbeck side: the shifted multiplier and its splitting.

With normalized Hermite polynomials :math:`\tilde H_k = e^{x^2/2} h_k`
(orthonormal for :math:`e^{-x^2}dx`), the shifted operator

.. math:: \mathbb T_m f = \sum_k m(k + 1/2)\, c_k(f)\, \tilde H_k

splits as :math:`T_M f + A_\phi f`, where :math:`M(\lambda) = \lambda\int
e^{-\lambda t} e^{-t/2}\phi(t)\,dt` acts on the OU spectrum ``k`` and
:math:`A_\phi` has kernel :math:`\tfrac12\int\phi(t) W^O_t(x,y) e^{-t/2}dt`
against :math:`e^{-y^2}dy`.  Hermite multipliers are recovered by conjugation
with :math:`e^{\pm x^2/2}`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..heatkernels import ORNSTEIN_UHLENBECK, heat_kernel
from ..quadrature import Tolerance, adaptive_integrate
from .grid import GridFunction
from .singular import KERNEL_TOLERANCE, grouped_time_integral
from .spectral import DEFAULT_MODES, series_values, spectral_coefficients
from .symbols import MultiplierSymbol, damped, symbol_m

__all__ = [
    "OUDecomposition",
    "shifted_ou_values",
    "ou_multiplier_part",
    "remainder_kernel",
    "remainder_apply",
    "remainder_eigenvalue",
    "ou_decomposition",
    "hermite_via_ou",
]

REMAINDER_TOLERANCE = Tolerance(abs_tol=1e-12, rel_tol=1e-10, max_subdivisions=50000)


@dataclass
class OUDecomposition:
    x: np.ndarray
    direct: np.ndarray
    multiplier_part: np.ndarray
    remainder_part: np.ndarray

    @property
    def combined(self):
        return self.multiplier_part + self.remainder_part

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.combined - self.direct)))


def _ou_coefficients(f, K):
    return spectral_coefficients(ORNSTEIN_UHLENBECK, f, K).coefficients


def shifted_ou_values(symbol: MultiplierSymbol, f: GridFunction, x, K: int = DEFAULT_MODES, coefficients=None):
    """``sum_k m(k + 1/2) c_k(f) H_k(x)``."""
    c = _ou_coefficients(f, K) if coefficients is None else coefficients
    m = symbol_m(symbol, np.arange(c.shape[0]) + 0.5)
    return series_values(ORNSTEIN_UHLENBECK, c * m, x)


def ou_multiplier_part(symbol: MultiplierSymbol, f: GridFunction, x, K: int = DEFAULT_MODES, coefficients=None):
    """``sum_{k>=1} M(k) c_k(f) H_k(x)``; ``M(0) = 0``."""
    c = _ou_coefficients(f, K) if coefficients is None else coefficients
    M = np.zeros(c.shape[0], dtype=complex)
    M[1:] = symbol_m(damped(symbol, 0.5), np.arange(1, c.shape[0]))
    return series_values(ORNSTEIN_UHLENBECK, c * M, x)


def remainder_eigenvalue(symbol: MultiplierSymbol, k) -> np.ndarray:
    """``(1/2) int phi(t) exp(-(k + 1/2) t) dt = m(k + 1/2) / (2k + 1)``."""
    k = np.asarray(k, dtype=float)
    return symbol_m(symbol, k + 0.5) / (2.0 * k + 1.0)


def remainder_kernel(symbol: MultiplierSymbol, x, y, tol: Tolerance = KERNEL_TOLERANCE):
    """``(1/2) int phi(t) W^O_t(x, y) exp(-t/2) dt``; finite on the diagonal too."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    xf, yf = x.ravel(), y.ravel()
    # on the diagonal the time integrand is ~ t^{-1/2}; the floor only sets breakpoints
    d = np.maximum(np.abs(xf - yf), 1e-8)

    def make(idx):
        xi, yi = xf[idx], yf[idx]

        def integrand(t):
            w = heat_kernel(ORNSTEIN_UHLENBECK, t[:, None], xi[None, :], yi[None, :])
            return 0.5 * (symbol.phi(t) * np.exp(-0.5 * t))[:, None] * w

        return integrand

    res = grouped_time_integral(
        make, d, tol, zero_exponent=-0.5, rate=0.5, extra_breaks=symbol.breakpoints
    )
    return res.value.reshape(shape)[()]


def remainder_apply(symbol: MultiplierSymbol, f: GridFunction, x, tol: Tolerance = REMAINDER_TOLERANCE):
    """``int A(x, y) f(y) exp(-y^2) dy``, split at ``y = x`` where the kernel has a kink."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = f.support
    vector = f.values.ndim == 2
    out = np.zeros((x.size,) + f.values.shape[1:], dtype=complex)
    for i, xi in enumerate(x):

        def integrand(y, xi=xi):
            k = remainder_kernel(symbol, xi, y) * np.exp(-y * y)
            fy = f(y)
            return k[:, None] * fy if vector else k * fy

        out[i] = adaptive_integrate(integrand, a, b, tol, points=[xi]).value
    return out


def ou_decomposition(symbol: MultiplierSymbol, f: GridFunction, x, K: int = DEFAULT_MODES) -> OUDecomposition:
    """Shifted OU multiplier at ``x`` directly and as ``T_M f + A_phi f``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = _ou_coefficients(f, K)
    direct = shifted_ou_values(symbol, f, x, K, coefficients=c)
    mult = ou_multiplier_part(symbol, f, x, K, coefficients=c)
    rem = remainder_apply(symbol, f, x)
    return OUDecomposition(x, direct, mult, rem)


def hermite_via_ou(
    symbol: MultiplierSymbol, f: GridFunction, x, K: int = DEFAULT_MODES, route: str = "decomposition"
):
    """Hermite multiplier as ``exp(-x^2/2) T(exp(y^2/2) f)(x)`` with the shifted OU operator.

    ``route`` selects how the shifted operator is evaluated: ``"decomposition"``
    (``T_M`` plus the ``A_phi`` integral) or ``"spectral"`` (its own series).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    weight = np.exp(0.5 * f.grid**2)
    g = f.with_values(f.values * (weight[:, None] if f.values.ndim == 2 else weight))
    if route == "decomposition":
        c = _ou_coefficients(g, K)
        inner = ou_multiplier_part(symbol, g, x, K, coefficients=c) + remainder_apply(symbol, g, x)
    elif route == "spectral":
        inner = shifted_ou_values(symbol, g, x, K)
    else:
        raise ValueError(f"unknown route {route!r}")
    scale = np.exp(-0.5 * x * x)
    return inner * (scale[:, None] if inner.ndim == 2 else scale)
