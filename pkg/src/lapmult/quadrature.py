"""Error-controlled quadrature.

The workhorse is :func:`adaptive_integrate`, a globally adaptive bisection
scheme built on the 7-point Gauss / 15-point Kronrod pair.  Integrands are
vectorized: they receive a 1-D array of nodes and return an array whose first
axis runs over the nodes.  Trailing axes are treated as independent
components sharing one panel structure, so a whole family of integrals
(a kernel at many points, a Gram matrix, ...) costs one adaptive run.

:func:`meda_time_integrate` maps ``(0, inf)`` onto ``(0, 1)`` with
``t = log((1+s)/(1-s))`` and :func:`inner_product` integrates against the
measure of a kernel family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "Tolerance",
    "QuadratureResult",
    "MaxSubdivisionsExceeded",
    "adaptive_integrate",
    "meda_time_integrate",
    "meda_breakpoints",
    "inner_product",
    "gaussian_window",
]

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes on [-1, 1] in increasing order, with matching weights
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_WK = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[13, 11, 9]] = _WG[:3]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Target accuracy: ``err <= max(abs_tol, rel_tol * |value|)``."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not (0 < self.abs_tol < 1 and 0 < self.rel_tol < 1):
            raise ValueError("abs_tol and rel_tol must lie in (0, 1)")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass
class QuadratureResult:
    value: complex | np.ndarray
    error_estimate: float | np.ndarray
    nodes_used: int
    interval: Optional[tuple] = None
    panels: Optional[tuple] = field(default=None, repr=False)

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.nodes_used + other.nodes_used,
        )


class MaxSubdivisionsExceeded(RuntimeError):
    """Adaptive integration did not reach its tolerance.

    ``result`` holds the best value found and its (too large) error estimate.
    """

    def __init__(self, message: str, result: QuadratureResult):
        super().__init__(message)
        self.result = result


def _power_for(beta) -> int:
    # t = h w^p turns (t)^beta dt into w^(p(1+beta)-1) dw
    if beta is None:
        return 1
    if beta <= -1:
        raise ValueError(f"endpoint exponent must exceed -1, got {beta}")
    if beta >= 0 and float(beta).is_integer():
        return 1
    # prefer a power that makes the mapped integrand smooth, p (1 + beta) integer
    for p in range(2, 9):
        if abs(p * (1.0 + beta) - round(p * (1.0 + beta))) < 1e-12:
            return p
    return max(2, math.ceil(1.0 / (1.0 + beta) - 1e-12))


def _as_values(fx, n):
    arr = np.asarray(fx)
    if arr.ndim == 0:
        arr = np.broadcast_to(arr, (n,))
    if arr.shape[0] != n:
        raise ValueError("integrand must return one row per node")
    return arr


def _evaluate(f, lo, hi, kind, powers):
    """Kronrod and Gauss sums on a batch of panels.

    ``kind`` is 0 (regular), 1 (power map at lo) or 2 (power map at hi).
    """
    npan = lo.size
    width = hi - lo
    xi = np.broadcast_to(_NODES, (npan, 15))
    w01 = 0.5 * (xi + 1.0)
    p = powers[:, None].astype(float)
    x = np.empty((npan, 15))
    jac = np.empty((npan, 15))
    reg = kind == 0
    x[reg] = 0.5 * (lo[reg] + hi[reg])[:, None] + 0.5 * width[reg][:, None] * xi[reg]
    jac[reg] = 0.5 * width[reg][:, None]
    left = kind == 1
    if np.any(left):
        wp = w01[left] ** p[left]
        x[left] = lo[left][:, None] + width[left][:, None] * wp
        jac[left] = 0.5 * width[left][:, None] * p[left] * w01[left] ** (p[left] - 1.0)
    right = kind == 2
    if np.any(right):
        wp = w01[right] ** p[right]
        x[right] = hi[right][:, None] - width[right][:, None] * wp
        jac[right] = 0.5 * width[right][:, None] * p[right] * w01[right] ** (p[right] - 1.0)
    fx = _as_values(f(x.ravel()), x.size)
    fx = fx.reshape((npan, 15) + fx.shape[1:])
    # nodes that round onto a declared singular endpoint carry the mapped
    # integrand's limit there, which is zero
    collapsed = ((kind == 1)[:, None] & (x == lo[:, None])) | ((kind == 2)[:, None] & (x == hi[:, None]))
    if np.any(collapsed):
        fx = fx.copy()
        fx[collapsed] = 0.0
    extra = (None,) * (fx.ndim - 2)
    wj = jac[(Ellipsis,) + extra]
    k15 = np.sum(fx * (_WK[(slice(None),) + extra] * wj), axis=1)
    g7 = np.sum(fx * (_WG15[(slice(None),) + extra] * wj), axis=1)
    resabs = np.sum(np.abs(fx) * (_WK[(slice(None),) + extra] * wj), axis=1)
    return k15, np.abs(k15 - g7), resabs


def adaptive_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Tolerance = Tolerance(),
    *,
    singular: tuple = (None, None),
    points: Sequence[float] = (),
    return_panels: bool = False,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]``.

    Parameters
    ----------
    f
        Vectorized integrand, ``f(x)`` with ``x`` of shape ``(n,)`` returns an
        array of shape ``(n, ...)``.
    singular
        Declared endpoint exponents ``(beta_a, beta_b)``: the integrand behaves
        like ``|x - a|**beta_a`` near ``a`` (``None`` means regular).  The panel
        touching a declared endpoint is integrated after the substitution
        ``x = a + h w**p`` which removes the singular factor.
    points
        Interior breakpoints (discontinuities, kinks, known peaks).
    return_panels
        Attach ``(lo, hi, values)`` of the final partition to the result.

    Raises
    ------
    MaxSubdivisionsExceeded
        If the panel budget runs out before the tolerance is met.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    edges = np.unique(np.concatenate([[a], [p for p in points if a < p < b], [b]]))
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    kind = np.zeros(lo.size, dtype=int)
    powers = np.ones(lo.size, dtype=int)
    pa, pb = _power_for(singular[0]), _power_for(singular[1])
    if pa > 1:
        kind[0], powers[0] = 1, pa
    if pb > 1:
        if lo.size == 1 and kind[0] == 1:
            # one panel, both ends singular: split so each end gets its own map
            mid = 0.5 * (a + b)
            lo, hi = np.array([a, mid]), np.array([mid, b])
            kind, powers = np.array([1, 0]), np.array([pa, 1])
        kind[-1], powers[-1] = 2, pb

    val, err, rab = _evaluate(f, lo, hi, kind, powers)
    nodes = 15 * lo.size
    while True:
        order = np.argsort(lo, kind="stable")
        lo, hi, kind, powers = lo[order], hi[order], kind[order], powers[order]
        val, err, rab = val[order], err[order], rab[order]
        total = np.sum(val, axis=0)
        total_err = np.sum(err, axis=0)
        roundoff = 50.0 * _EPS * np.sum(rab, axis=0)
        target = np.maximum(np.maximum(tol.abs_tol, tol.rel_tol * np.abs(total)), roundoff)
        if np.all(total_err <= target):
            break
        comp_axes = tuple(range(1, err.ndim))
        score = err / target
        score = np.max(score, axis=comp_axes) if comp_axes else score
        splittable = (hi - lo) > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        pick = (score > 0.5 / lo.size) & splittable
        if not np.any(pick):
            result = QuadratureResult(total, total_err + roundoff, nodes)
            raise MaxSubdivisionsExceeded("no splittable panel left above tolerance", result)
        if lo.size + np.count_nonzero(pick) > tol.max_subdivisions:
            result = QuadratureResult(total, total_err + roundoff, nodes)
            raise MaxSubdivisionsExceeded(
                f"more than {tol.max_subdivisions} panels needed on [{a}, {b}]", result
            )
        mid = 0.5 * (lo[pick] + hi[pick])
        nlo = np.concatenate([lo[pick], mid])
        nhi = np.concatenate([mid, hi[pick]])
        # the singular map stays with the half touching the endpoint
        k_old, p_old = kind[pick], powers[pick]
        nkind = np.concatenate([np.where(k_old == 1, 1, 0), np.where(k_old == 2, 2, 0)])
        npow = np.concatenate([np.where(k_old == 1, p_old, 1), np.where(k_old == 2, p_old, 1)])
        nval, nerr, nrab = _evaluate(f, nlo, nhi, nkind, npow)
        nodes += 15 * nlo.size
        keep = ~pick
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        kind = np.concatenate([kind[keep], nkind])
        powers = np.concatenate([powers[keep], npow])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        rab = np.concatenate([rab[keep], nrab])
    result = QuadratureResult(total, total_err + roundoff, nodes)
    if return_panels:
        result.panels = (lo, hi, val)
    return result


def meda_breakpoints(t_min: float, t_max: float = 40.0, ratio: float = 4.0) -> np.ndarray:
    """Geometric time breakpoints; seeds the adaptive partition so boundary
    layers at ``t ~ |x - y|**2`` are never missed."""
    if t_min >= t_max:
        return np.array([t_max])
    n = int(math.ceil(math.log(t_max / t_min) / math.log(ratio)))
    return t_min * ratio ** np.arange(n + 1)


def _s_of_t(t):
    return np.tanh(0.5 * np.asarray(t, dtype=float))


def _sigma_of_t(t):
    # 1 - tanh(t/2), accurate for large t
    e = np.exp(-np.asarray(t, dtype=float))
    return 2.0 * e / (1.0 + e)


def meda_time_integrate(
    g: Callable[[np.ndarray], np.ndarray],
    tol: Tolerance = Tolerance(),
    *,
    zero_exponent: Optional[float] = None,
    decay_rate: Optional[float] = None,
    tail_power: Optional[float] = None,
    breakpoints: Sequence[float] = (),
) -> QuadratureResult:
    """``int_0^inf g(t) dt`` through ``t = log((1+s)/(1-s))``.

    The s-interval is handled in two halves; on ``[1/2, 1)`` the complement
    ``sigma = 1 - s`` is the integration variable so that ``t`` stays exact
    for large times.

    Parameters
    ----------
    zero_exponent
        ``g(t) ~ t**zero_exponent`` as ``t -> 0`` (e.g. ``-0.5``).
    decay_rate
        ``g(t) ~ exp(-decay_rate t)`` as ``t -> inf``; in the ``s`` variable
        this is the endpoint singularity ``(1-s)**(decay_rate-1)``.
    tail_power
        Declares algebraic decay ``g(t) ~ t**-tail_power`` (``> 1``) instead.
        Times beyond ``T0 = max(1, breakpoints)`` are then integrated with
        ``t = T0 u**(-1/(tail_power-1))``, which maps the tail to a bounded
        integrand on ``(0, 1]``.
    breakpoints
        Times where ``g`` has kinks, jumps or sharp features.
    """
    bps = np.asarray([t for t in breakpoints if t > 0], dtype=float)
    t_split = None
    if tail_power is not None:
        if tail_power <= 1:
            raise ValueError("tail_power must exceed 1")
        t_split = max(1.0, float(bps.max()) if bps.size else 1.0)
        bps = bps[bps < t_split]

    def in_s(s):
        t = np.log1p(2.0 * s / (1.0 - s))
        return _scale(g(t), 2.0 / ((1.0 - s) * (1.0 + s)))

    def in_sigma(sig):
        with np.errstate(divide="ignore", over="ignore"):
            t = np.log1p(2.0 * (1.0 - sig) / sig)
            factor = 2.0 / (sig * (2.0 - sig))
        # nodes this close to sigma = 0 sit at t = inf, where g has decayed
        far = ~(np.isfinite(t) & np.isfinite(factor))
        if np.any(far):
            t = np.where(far, 1.0, t)
            out = _scale(g(t), np.where(far, 0.0, factor))
            return np.where(far.reshape(far.shape + (1,) * (out.ndim - 1)), 0.0, out)
        return _scale(g(t), factor)

    s_split = 0.5
    if t_split is not None:
        s_end = float(_s_of_t(t_split))
        sig_end = float(_sigma_of_t(t_split))
    else:
        s_end, sig_end = 1.0, 0.0

    s_bps = _s_of_t(bps)
    total = None
    hi_s = min(s_split, s_end)
    total = adaptive_integrate(
        in_s, 0.0, hi_s, tol,
        singular=(zero_exponent, None),
        points=s_bps[s_bps < hi_s],
    )
    if s_end > s_split:
        sig_bps = _sigma_of_t(bps[s_bps >= s_split]) if bps.size else np.array([])
        beta = None
        if t_split is None and decay_rate is not None:
            beta = decay_rate - 1.0
            if beta >= 0 and float(beta).is_integer():
                beta = None
        total = total + adaptive_integrate(
            in_sigma, sig_end, 1.0 - s_split, tol,
            singular=(beta, None),
            points=sig_bps[(sig_bps > sig_end) & (sig_bps < 1.0 - s_split)],
        )
    if t_split is not None:
        q = 1.0 / (tail_power - 1.0)

        def in_u(u):
            t = t_split * u**-q
            return _scale(g(t), t_split * q * u ** (-q - 1.0))

        total = total + adaptive_integrate(in_u, 0.0, 1.0, tol)
    return total


def _scale(values, factor):
    values = np.asarray(values)
    if values.ndim == 0:
        values = np.broadcast_to(values, factor.shape)
    extra = (None,) * (values.ndim - 1)
    return values * factor[(Ellipsis,) + extra]


def gaussian_window(abs_tol: float, degree: int = 0) -> float:
    """Half-width ``X`` beyond which products of degree-``degree`` Hermite type
    functions carry less than ``abs_tol / 10``.

    Past the turning point ``sqrt(2 degree + 1)`` the functions decay at
    least like ``exp(-(x - x_turn)**2 / 2)``; the tail bound is solved for
    that Gaussian.
    """
    x_turn = math.sqrt(2.0 * degree + 1.0)
    return x_turn + math.sqrt(2.0 * math.log(10.0 / abs_tol)) + 1.0


def inner_product(f, g, family, tol: Tolerance = Tolerance(), *, degree: int = 0, points=()):
    """``int_Omega f conj(g) dmu`` for the domain and measure of ``family``.

    ``f`` and ``g`` are vectorized callables or grid functions; their values
    broadcast against each other so Gram matrices come out of a single call
    (pass shapes ``(n, J, 1)`` and ``(n, 1, K)``).  If either has a compact
    ``support`` the integral runs over it with its grid nodes as breakpoints;
    otherwise the domain is cut at the Gaussian window of
    :func:`gaussian_window` and the window is reported in ``interval``.
    """
    lo, hi = (0.0, math.inf) if family.domain == "positive" else (-math.inf, math.inf)
    bps = list(points)
    for h in (f, g):
        support = getattr(h, "support", None)
        if support is not None:
            lo, hi = max(lo, support[0]), min(hi, support[1])
            bps.extend(np.asarray(h.grid).tolist())
    if not math.isfinite(hi):
        hi = gaussian_window(tol.abs_tol, degree)
    if not math.isfinite(lo):
        lo = -gaussian_window(tol.abs_tol, degree)
    if lo >= hi:
        return QuadratureResult(0.0, 0.0, 1, interval=(lo, hi))
    weighted = family.measure == "gaussian"

    def integrand(x):
        fx = np.asarray(f(x))
        gx = np.asarray(g(x))
        out = fx * np.conj(gx)
        if weighted:
            out = _scale(out, np.exp(-x * x))
        return out

    left = None
    if lo == 0.0 and getattr(family, "alpha", None) is not None:
        left = 2.0 * family.alpha + 1.0
    res = adaptive_integrate(integrand, lo, hi, tol, singular=(left, None), points=bps)
    res.interval = (lo, hi)
    return res
