r"""Singular-integral side of a Laplace-transform-type multiplier.

The kernel is

.. math:: K_\phi(x,y) = \int_0^\infty \phi(t)\,(-\partial_t W_t(x,y))\,dt,

and the operator is recovered as the limit of the truncations

.. math:: \Lambda(\varepsilon) f(x) + \int_{|x-y|>\varepsilon} K_\phi(x,y) f(y)\,dy,

where :math:`\Lambda(\varepsilon) = \int_0^\infty \phi(t)\,w_\varepsilon(t)\,dt`
and :math:`w_\varepsilon` is the time density of the classical heat mass
leaving the ball of radius :math:`\varepsilon` (see
:func:`lapmult.heatkernels.pv_weight`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..heatkernels import KernelFamily, heat_kernel_dt, pv_weight
from ..quadrature import QuadratureResult, Tolerance, adaptive_integrate, meda_breakpoints, meda_time_integrate
from .grid import GridFunction
from .symbols import MultiplierSymbol

__all__ = [
    "DiagonalEvaluation",
    "NotConverged",
    "PVResult",
    "KERNEL_TOLERANCE",
    "PV_TOLERANCE",
    "DEFAULT_SCHEDULE",
    "decay_rate",
    "grouped_time_integral",
    "multiplier_kernel",
    "lambda_schedule",
    "pv_apply",
]

KERNEL_TOLERANCE = Tolerance(abs_tol=1e-15, rel_tol=1e-10, max_subdivisions=50000)
PV_TOLERANCE = Tolerance(abs_tol=1e-10, rel_tol=1e-9, max_subdivisions=50000)
LAMBDA_TOLERANCE = Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=50000)
DEFAULT_SCHEDULE = 2.0 ** -np.arange(3, 13)
DEFAULT_PV_TOL = 1e-6


class DiagonalEvaluation(ValueError):
    """The kernel was requested on the diagonal ``x == y``."""


class NotConverged(RuntimeWarning):
    """Successive truncations did not settle; ``increments`` holds the evidence."""

    def __init__(self, message, increments=None):
        super().__init__(message)
        self.increments = increments


def decay_rate(family: KernelFamily):
    """Exponential rate of ``d/dt W_t`` as ``t -> inf`` (``None``: algebraic)."""
    return {
        "Classical": None,
        "Hermite": 0.5,
        "OrnsteinUhlenbeck": 1.0,
        "Laguerre": (family.alpha or 0.0) + 1.0,
    }[family.tag]


def grouped_time_integral(make_integrand, distance, tol, *, zero_exponent=None, rate=None, extra_breaks=()):
    """Time integrals for many components, batched by ``|x - y|`` scale.

    ``make_integrand(idx)`` returns the vectorized time integrand for the
    components ``idx``.  Components whose distances share a factor-4 band
    run through one adaptive integration; each band seeds the time axis with
    geometric breakpoints starting well below ``d_min**2``.
    """
    distance = np.asarray(distance, dtype=float)
    n = distance.size
    value = np.zeros(n, dtype=complex)
    error = np.zeros(n)
    nodes = 0
    band = np.floor(np.log(distance) / math.log(4.0)).astype(int)
    for b in np.unique(band):
        idx = np.nonzero(band == b)[0]
        d_lo, d_hi = distance[idx].min(), distance[idx].max()
        t_hi = max(40.0, 4.0 * d_hi**2)
        breaks = tuple(meda_breakpoints(d_lo**2 / 50.0, t_hi)) + tuple(extra_breaks)
        res = meda_time_integrate(
            make_integrand(idx),
            tol,
            zero_exponent=zero_exponent,
            decay_rate=rate,
            tail_power=1.5 if rate is None else None,
            breakpoints=breaks,
        )
        value[idx] = res.value
        error[idx] = res.error_estimate
        nodes += res.nodes_used
    return QuadratureResult(value, error, nodes)


def multiplier_kernel(
    family: KernelFamily,
    symbol: MultiplierSymbol,
    x,
    y,
    tol: Tolerance = KERNEL_TOLERANCE,
) -> QuadratureResult:
    """``K_phi(x, y)`` off the diagonal; broadcasts ``x`` against ``y``.

    ``value`` and ``error_estimate`` have the broadcast shape.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    xf, yf = x.ravel(), y.ravel()
    family.check_points(xf, yf)
    d = np.abs(xf - yf)
    if np.any(d == 0):
        raise DiagonalEvaluation("the kernel is singular on the diagonal x == y")

    def make(idx):
        xi, yi = xf[idx], yf[idx]

        def integrand(t):
            dw = heat_kernel_dt(family, t[:, None], xi[None, :], yi[None, :])
            return -symbol.phi(t)[:, None] * dw

        return integrand

    res = grouped_time_integral(
        make, d, tol, rate=decay_rate(family), extra_breaks=symbol.breakpoints
    )
    res.value = res.value.reshape(shape)[()]
    res.error_estimate = res.error_estimate.reshape(shape)[()]
    return res


def lambda_schedule(symbol: MultiplierSymbol, epsilon, tol: Tolerance = LAMBDA_TOLERANCE):
    """``Lambda(eps) = int phi(t) pv_weight(eps, t) dt``; vectorized over ``eps``."""
    eps = np.asarray(epsilon, dtype=float)
    if np.any(~(eps > 0)):
        raise ValueError("epsilon must be positive")
    flat = eps.ravel()

    def make(idx):
        e = flat[idx]

        def integrand(t):
            return symbol.phi(t)[:, None] * pv_weight(e[None, :], t[:, None])

        return integrand

    res = grouped_time_integral(make, flat, tol, rate=None, extra_breaks=symbol.breakpoints)
    return res.value.reshape(eps.shape)[()]


@dataclass
class PVResult:
    """Truncations along the schedule.

    ``values[j]`` is the truncation at ``epsilons[j]``; ``value`` is the last
    one.  Leading axis of ``value`` runs over the evaluation points, a
    trailing axis (if any) over coordinates of ``f``.
    """

    x: np.ndarray
    epsilons: np.ndarray
    values: np.ndarray
    increments: np.ndarray
    converged: np.ndarray
    error_estimate: np.ndarray

    @property
    def value(self):
        return self.values[-1]


def _band_edges(eps, reach):
    far = [eps[0]]
    while far[-1] < reach:
        far.append(2.0 * far[-1])
    return np.asarray(far)


def pv_apply(
    family: KernelFamily,
    symbol: MultiplierSymbol,
    f: GridFunction,
    x,
    schedule=DEFAULT_SCHEDULE,
    *,
    tol: float = DEFAULT_PV_TOL,
    quad_tol: Tolerance = PV_TOLERANCE,
    kernel_tol: Tolerance = KERNEL_TOLERANCE,
    warn: bool = True,
) -> PVResult:
    """Principal-value application at the points ``x``.

    The ``y``-integral is split into annuli ``eps_{j+1} < |x-y| < eps_j``
    between consecutive schedule entries and dyadic shells beyond the largest
    one, reaching the edge of the support of ``f``.  Each annulus is an
    adaptive integral in ``log|x - y|`` over both sides of ``x``; its
    integrand is only evaluated where ``f(y) != 0`` and ``y`` lies in the
    domain.  Truncations for every ``eps`` are partial sums of the annuli.

    A :class:`NotConverged` warning is issued (not raised) when the last two
    truncations differ by ``tol`` or more.
    """
    if family.tag == "OrnsteinUhlenbeck":
        raise ValueError(
            "the Ornstein-Uhlenbeck kernel does not telescope to zero; use ou_decomposition"
        )
    if family.domain != f.domain:
        raise ValueError(f"grid function lives on {f.domain!r}, family on {family.domain!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    family.check_points(x)
    eps = np.sort(np.asarray(schedule, dtype=float))[::-1]
    if eps.size == 0 or np.any(eps <= 0) or np.unique(eps).size != eps.size:
        raise ValueError("schedule must be distinct positive radii")
    a, b = f.support
    reach = max(np.max(x - a), np.max(b - x))
    far = _band_edges(eps, reach)
    vector = f.values.ndim == 2
    positive = family.domain == "positive"
    support_breaks = np.abs(np.concatenate([x - a, b - x]))

    def band_integral(lo, hi):
        def integrand(v):
            d = np.exp(v)
            out = None
            for sign in (1.0, -1.0):
                yv = x[None, :] + sign * d[:, None]
                fy = f(yv)
                live = np.abs(fy) > 0
                if vector:
                    live = live.any(axis=-1)
                if positive:
                    live &= yv > 0
                kern = np.zeros(yv.shape, dtype=complex)
                if np.any(live):
                    xs = np.broadcast_to(x[None, :], yv.shape)[live]
                    kern[live] = multiplier_kernel(family, symbol, xs, yv[live], kernel_tol).value
                kern *= d[:, None]
                term = kern[..., None] * fy if vector else kern * fy
                out = term if out is None else out + term
            return out

        inside = support_breaks[(support_breaks > lo) & (support_breaks < hi)]
        return adaptive_integrate(
            integrand, math.log(lo), math.log(hi), quad_tol, points=np.log(inside)
        )

    shape = (x.size, f.values.shape[1]) if vector else (x.size,)
    far_total = np.zeros(shape, dtype=complex)
    err = np.zeros(shape)
    for lo, hi in zip(far[:-1], far[1:]):
        r = band_integral(lo, hi)
        far_total += r.value
        err += r.error_estimate
    annuli = []
    for lo, hi in zip(eps[1:], eps[:-1]):
        r = band_integral(lo, hi)
        annuli.append(r.value)
        err += r.error_estimate
    lam = np.atleast_1d(lambda_schedule(symbol, eps))
    fx = f(x)
    values = np.empty((eps.size,) + shape, dtype=complex)
    acc = far_total.copy()
    for j in range(eps.size):
        if j > 0:
            acc = acc + annuli[j - 1]
        values[j] = lam[j] * fx + acc
    increments = np.abs(np.diff(values, axis=0))
    if increments.size:
        last = increments[-1]
        converged = last < tol if not vector else np.all(last < tol, axis=-1)
    else:
        converged = np.zeros(x.size, dtype=bool)
    if warn and not np.all(converged):
        worst = float(np.max(increments[-1])) if increments.size else float("nan")
        warnings.warn(
            NotConverged(
                f"principal-value truncations still moving by {worst:.2e} at eps={eps[-1]:.3g}",
                increments,
            ),
            stacklevel=2,
        )
    return PVResult(x, eps, values, increments, converged, err)
