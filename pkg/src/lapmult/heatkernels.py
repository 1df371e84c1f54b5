r"""Closed-form heat kernels and their time derivatives.

Write :math:`r = e^{-t}` and :math:`D = 1 - r^2`.  The kernels are

* Classical: :math:`(2\pi t)^{-1/2} e^{-(x-y)^2/(2t)}` on :math:`\mathbb R`,
* Hermite: :math:`\pi^{-1/2}(r/D)^{1/2} e^{-N/(2D)}` with
  :math:`N = (1+r^2)(x-y)^2 + 2xy(1-r)^2`,
* Ornstein-Uhlenbeck (measure :math:`e^{-y^2}dy`):
  :math:`\pi^{-1/2} D^{-1/2} e^{Q/D}`, :math:`Q = 2rxy - r^2(x^2+y^2)`,
* Laguerre of type :math:`\alpha` on :math:`(0,\infty)`:
  :math:`(2r/D)^{1/2}\sqrt z\,\tilde I_\alpha(z)\,e^{-N/(2D)}` with
  :math:`z = 2xyr/D` and :math:`\tilde I_\alpha(z) = e^{-z}I_\alpha(z)`.

Every kernel is evaluated as ``exp(log W)`` and every derivative as
``W * d/dt log W`` so the individually huge exponents never materialize.
``N`` and ``Q`` are written in the forms above because they stay accurate
near the diagonal for small ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erf

from .specfun import (
    bessel_i_scaled,
    bessel_log_derivative,
    hermite_functions,
    laguerre_functions,
    LaguerreBasis,
)

__all__ = [
    "KernelFamily",
    "CLASSICAL",
    "HERMITE",
    "ORNSTEIN_UHLENBECK",
    "laguerre",
    "heat_kernel",
    "heat_kernel_dt",
    "log_heat_kernel",
    "near_diagonal_mass",
    "pv_weight",
]

_TAGS = ("Classical", "Hermite", "OrnsteinUhlenbeck", "Laguerre")
_LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class KernelFamily:
    tag: str
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown family {self.tag!r}; expected one of {_TAGS}")
        if self.tag == "Laguerre":
            if self.alpha is None or not self.alpha > -0.5:
                raise ValueError(f"Laguerre family needs alpha > -1/2, got {self.alpha}")
        elif self.alpha is not None:
            raise ValueError(f"alpha only applies to the Laguerre family")

    @property
    def domain(self) -> str:
        return "positive" if self.tag == "Laguerre" else "real"

    @property
    def measure(self) -> str:
        return "gaussian" if self.tag == "OrnsteinUhlenbeck" else "lebesgue"

    @property
    def name(self) -> str:
        return f"Laguerre({self.alpha:g})" if self.tag == "Laguerre" else self.tag

    def eigenvalue(self, k):
        k = np.asarray(k, dtype=float)
        if self.tag == "Classical":
            raise ValueError("the classical heat semigroup has continuous spectrum")
        if self.tag == "Hermite":
            return k + 0.5
        if self.tag == "OrnsteinUhlenbeck":
            return k
        return 2.0 * k + self.alpha + 1.0

    def eigenfunctions(self, K: int, x) -> np.ndarray:
        """Orthonormal eigenfunctions ``0..K`` at ``x``, shape ``(K+1, *x.shape)``."""
        x = np.asarray(x, dtype=float)
        if self.tag == "Hermite":
            return hermite_functions(K, x)
        if self.tag == "OrnsteinUhlenbeck":
            return hermite_functions(K, x) * np.exp(0.5 * x * x)
        if self.tag == "Laguerre":
            return laguerre_functions(LaguerreBasis(self.alpha, K), x)
        raise ValueError("the classical heat semigroup has no eigenfunctions")

    def check_points(self, *points):
        for p in points:
            p = np.asarray(p, dtype=float)
            if not np.all(np.isfinite(p)):
                raise ValueError("points must be finite")
            if self.domain == "positive" and np.any(p <= 0):
                raise ValueError(f"{self.name} points must lie in (0, inf)")


CLASSICAL = KernelFamily("Classical")
HERMITE = KernelFamily("Hermite")
ORNSTEIN_UHLENBECK = KernelFamily("OrnsteinUhlenbeck")


def laguerre(alpha: float) -> KernelFamily:
    return KernelFamily("Laguerre", float(alpha))


def _prepare(family, t, x, y):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("heat kernels need t > 0")
    family.check_points(x, y)
    t, x, y = np.broadcast_arrays(t, np.asarray(x, float), np.asarray(y, float))
    return t, x, y


def _log_sqrt_z_bessel(alpha, log_z, z):
    """``log(sqrt(z) * exp(-z) I_alpha(z))`` and ``z * d/dz`` of it."""
    small = z < 1e-10
    logv = np.empty_like(z)
    zg = np.empty_like(z)
    if np.any(small):
        lz = log_z[small]
        zs = z[small]
        logv[small] = (alpha + 0.5) * lz - alpha * math.log(2.0) - math.lgamma(alpha + 1.0) - zs
        zg[small] = alpha + 0.5 - zs
    big = ~small
    if np.any(big):
        zb = z[big]
        logv[big] = 0.5 * np.log(zb) + np.log(bessel_i_scaled(alpha, zb))
        zg[big] = zb * bessel_log_derivative(alpha, zb)
    return logv, zg


def _log_kernel_and_rate(family, t, x, y):
    """``log W`` and ``d/dt log W`` on broadcast arrays."""
    if family.tag == "Classical":
        d2 = (x - y) ** 2
        logw = -0.5 * np.log(2.0 * math.pi * t) - d2 / (2.0 * t)
        rate = -0.5 / t + d2 / (2.0 * t * t)
        return logw, rate
    r = np.exp(-t)
    D = -np.expm1(-2.0 * t)
    dD = 2.0 * r * r
    one_minus_r = -np.expm1(-t)
    d2 = (x - y) ** 2
    xy = x * y
    if family.tag == "OrnsteinUhlenbeck":
        Q = -r * r * d2 + 2.0 * r * xy * one_minus_r
        dQ = 2.0 * r * r * d2 + 2.0 * xy * r * (2.0 * r - 1.0)
        logw = -_LOG_SQRT_PI - 0.5 * np.log(D) + Q / D
        rate = -0.5 * dD / D + (dQ * D - Q * dD) / (D * D)
        return logw, rate
    N = (1.0 + r * r) * d2 + 2.0 * xy * one_minus_r**2
    dN = -2.0 * r * r * d2 + 4.0 * xy * r * one_minus_r
    E = -N / (2.0 * D)
    dE = -(dN * D - N * dD) / (2.0 * D * D)
    if family.tag == "Hermite":
        logw = -_LOG_SQRT_PI + 0.5 * (-t - np.log(D)) + E
        rate = -0.5 - 0.5 * dD / D + dE
        return logw, rate
    alpha = family.alpha
    log_z = math.log(2.0) + np.log(xy) - t - np.log(D)
    z = np.exp(log_z)
    logb, zg = _log_sqrt_z_bessel(alpha, log_z, z)
    logw = 0.5 * (math.log(2.0) - t - np.log(D)) + logb + E
    # d/dt log z = -1 - D'/D
    rate = -0.5 - 0.5 * dD / D + zg * (-1.0 - dD / D) + dE
    return logw, rate


def log_heat_kernel(family: KernelFamily, t, x, y):
    t, x, y = _prepare(family, t, x, y)
    logw, _ = _log_kernel_and_rate(family, t, x, y)
    return logw[()]


def heat_kernel(family: KernelFamily, t, x, y):
    """``W_t(x, y)``; broadcasts over ``t``, ``x`` and ``y``."""
    return np.exp(log_heat_kernel(family, t, x, y))


def heat_kernel_dt(family: KernelFamily, t, x, y, *, with_kernel: bool = False):
    """Analytic ``d/dt W_t(x, y)``.  With ``with_kernel`` returns ``(W, dW)``."""
    t, x, y = _prepare(family, t, x, y)
    logw, rate = _log_kernel_and_rate(family, t, x, y)
    w = np.exp(logw)
    dw = (w * rate)[()]
    return (w[()], dw) if with_kernel else dw


def near_diagonal_mass(epsilon, t):
    """Mass of the classical heat kernel within ``epsilon`` of its centre."""
    epsilon = np.asarray(epsilon, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(epsilon > 0)) or np.any(~(t > 0)):
        raise ValueError("epsilon and t must be positive")
    return erf(epsilon / np.sqrt(2.0 * t))[()]


def pv_weight(epsilon, t):
    """``-d/dt near_diagonal_mass(epsilon, t)``; a probability density in ``t``."""
    epsilon = np.asarray(epsilon, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(epsilon > 0)) or np.any(~(t > 0)):
        raise ValueError("epsilon and t must be positive")
    return (epsilon / math.sqrt(2.0 * math.pi) * t**-1.5 * np.exp(-epsilon**2 / (2.0 * t)))[()]
