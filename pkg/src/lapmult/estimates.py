"""Empirical kernel bounds and the auxiliary averaging operators.

A scan evaluates a ratio (kernel times the reciprocal of the claimed bound)
on a rectangular grid, at two resolutions ``n`` and ``2n - 1`` (the finer
grid contains the coarser one).  The reported constant is the sup on the
fine grid, normalized by ``phi_sup``; the drift is its relative change
between the two resolutions.  Nothing here proves a bound: a scan whose
drift exceeds 5% is marked inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .heatkernels import HERMITE, KernelFamily, laguerre
from .multipliers import GridFunction, MultiplierSymbol, multiplier_kernel, pv_apply
from .quadrature import MaxSubdivisionsExceeded, Tolerance, adaptive_integrate

__all__ = [
    "ScanGrid",
    "ScanReport",
    "RegionSpec",
    "ScanFailure",
    "DRIFT_LIMIT",
    "cz_scan",
    "laguerre_bound_scan",
    "hardy_h0",
    "hardy_hinf",
    "op_n",
    "op_n_constant",
    "op_n_lp_constant",
    "n_lp_probe",
    "lp_norm_half_line",
    "maximal_truncation_scan",
]

DRIFT_LIMIT = 0.05
# constants below this (relative to phi_sup) count as zero for drift purposes
ZERO_FLOOR = 1e-8
AVERAGING_TOLERANCE = Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=20000)


class ScanFailure(RuntimeError):
    def __init__(self, message, node):
        super().__init__(f"{message} at (x, y) = {node}")
        self.node = node


@dataclass(frozen=True)
class ScanGrid:
    """Tensor grid with ``resolution`` nodes per axis at the coarse level.

    With ``relative=True`` the second axis is the ratio ``u = y/x`` and
    ``y_range`` is a range of ratios; zones bounded by lines through the
    origin are then sampled on their boundary at every resolution.
    """

    x_range: tuple
    y_range: tuple
    resolution: int = 17
    relative: bool = False

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("resolution must be at least 3")
        for lo, hi in (self.x_range, self.y_range):
            if not lo < hi:
                raise ValueError("ranges must be increasing")

    def axes(self, level: int = 0):
        n = (self.resolution - 1) * 2**level + 1
        return np.linspace(*self.x_range, n), np.linspace(*self.y_range, n)

    def points(self, level: int = 0):
        xs, second = self.axes(level)
        X, S = np.meshgrid(xs, second, indexing="ij")
        return (X, X * S) if self.relative else (X, S)

    @property
    def spacing(self) -> float:
        """Diagonal margin: the largest coarse step in ``x`` or ``y``."""
        xs, second = self.axes(0)
        step = second[1] - second[0]
        if self.relative:
            step *= max(abs(xs[0]), abs(xs[-1]))
        return max(xs[1] - xs[0], step)


@dataclass(frozen=True)
class RegionSpec:
    """Zones of the quarter plane (and of the plane, for ``opposite_sign`` and ``N_s``).

    ``global`` is the union of ``global_below`` and ``global_above``.
    """

    region: str
    s: float | None = None

    _KNOWN = ("local", "global_below", "global_above", "global", "opposite_sign", "N_s")

    def __post_init__(self):
        if self.region not in self._KNOWN:
            raise ValueError(f"unknown region {self.region!r}")
        if self.region == "N_s" and not (self.s is not None and self.s > 0):
            raise ValueError("N_s needs s > 0")

    def contains(self, x, y, closed: bool = False):
        """Membership; ``closed`` admits the bounding lines ``y = x/2`` and ``y = 2x``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        pos = (x > 0) & (y > 0)
        lt = np.less_equal if closed else np.less
        if self.region == "local":
            return pos & lt(x / 2, y) & lt(y, 2 * x)
        if self.region == "global_below":
            return pos & lt(y, x / 2)
        if self.region == "global_above":
            return pos & lt(2 * x, y)
        if self.region == "global":
            return pos & (lt(y, x / 2) | lt(2 * x, y))
        if self.region == "opposite_sign":
            return x * y < 0
        return np.abs(x - y) <= self.s / (1 + np.abs(x) + np.abs(y))


@dataclass
class ScanReport:
    id: str
    x_range: tuple
    y_range: tuple
    resolution: tuple
    excluded_band: float
    empirical_constant: float
    coarse_constant: float
    refinement_drift: float
    worst_point: tuple
    points: np.ndarray = field(repr=False)

    @property
    def inconclusive(self) -> bool:
        return not self.refinement_drift <= DRIFT_LIMIT

    def summary(self) -> dict:
        return {
            "id": self.id,
            "x_range": list(self.x_range),
            "y_range": list(self.y_range),
            "resolution": list(self.resolution),
            "excluded_band": self.excluded_band,
            "empirical_constant": self.empirical_constant,
            "coarse_constant": self.coarse_constant,
            "refinement_drift": self.refinement_drift,
            "worst_point": list(self.worst_point),
            "inconclusive": self.inconclusive,
        }


def _kernel(family, symbol, x, y):
    try:
        return multiplier_kernel(family, symbol, x, y).value
    except MaxSubdivisionsExceeded:
        for xi, yi in zip(np.ravel(x), np.ravel(y)):
            try:
                multiplier_kernel(family, symbol, xi, yi)
            except MaxSubdivisionsExceeded as exc:
                raise ScanFailure(f"kernel quadrature failed: {exc}", (float(xi), float(yi))) from exc
        raise


def _drift(fine, coarse):
    if max(fine, coarse) < ZERO_FLOOR:
        return 0.0
    return abs(fine - coarse) / max(fine, coarse)


def _scan(ident, grid, mask_fn, ratio_fn):
    results = []
    for level in (0, 1):
        X, Y = grid.points(level)
        mask = mask_fn(X, Y)
        px, py = X[mask], Y[mask]
        if px.size == 0:
            raise ValueError(f"scan {ident!r} has no admissible grid points")
        ratio = ratio_fn(px, py)
        results.append((px, py, ratio))
    (cx, cy, cr), (fx, fy, fr) = results
    i = int(np.argmax(fr))
    fine_c, coarse_c = float(fr[i]), float(np.max(cr))
    n = grid.resolution
    return ScanReport(
        id=ident,
        x_range=tuple(grid.x_range),
        y_range=tuple(grid.y_range),
        resolution=(n, 2 * n - 1),
        excluded_band=grid.spacing,
        empirical_constant=fine_c,
        coarse_constant=coarse_c,
        refinement_drift=_drift(fine_c, coarse_c),
        worst_point=(float(fx[i]), float(fy[i])),
        points=np.column_stack([fx, fy, fr]),
    )


def _band_mask(family, delta):
    def mask(X, Y):
        keep = np.abs(X - Y) >= delta * (1 - 1e-9)
        if family.domain == "positive":
            keep &= (X > 0) & (Y > 0)
        return keep

    return mask


def cz_scan(family: KernelFamily, symbol: MultiplierSymbol, grid: ScanGrid):
    """Size and smoothness constants of the kernel.

    Returns two reports: ``sup |x-y| |K|`` and
    ``sup |x-y|^2 (|d_x K| + |d_y K|)``, both divided by ``phi_sup``.
    Points within ``delta`` (the coarse spacing) of the diagonal are
    excluded at both resolutions; derivatives are central differences with
    step ``delta / 10``.
    """
    delta = grid.spacing
    h = delta / 10.0
    mask = _band_mask(family, delta)
    cache = {}

    def both(px, py):
        key = (px.size, float(px.sum()), float(py.sum()))
        if key not in cache:
            xs = np.concatenate([px, px + h, px - h, px, px])
            ys = np.concatenate([py, py, py, py + h, py - h])
            k = _kernel(family, symbol, xs, ys).reshape(5, -1)
            d = np.abs(px - py)
            size = d * np.abs(k[0]) / symbol.phi_sup
            dx = np.abs(k[1] - k[2]) / (2 * h)
            dy = np.abs(k[3] - k[4]) / (2 * h)
            smooth = d * d * (dx + dy) / symbol.phi_sup
            cache[key] = (size, smooth)
        return cache[key]

    tag = f"{family.name}/{symbol.name}"
    size = _scan(f"CZ1 {tag}", grid, mask, lambda x, y: both(x, y)[0])
    smooth = _scan(f"CZ2 {tag}", grid, mask, lambda x, y: both(x, y)[1])
    return size, smooth


_INEQUALITY_REGION = {
    "a": RegionSpec("global"),
    "b": RegionSpec("opposite_sign"),
    "c": RegionSpec("global"),
    "d": RegionSpec("local"),
}


def laguerre_bound_scan(alpha: float, symbol: MultiplierSymbol, inequality: str, grid: ScanGrid) -> ScanReport:
    """Scan one of the four Hermite/Laguerre kernel bounds.

    ``a``: ``|K^H| max(x, y)`` on the global zone ``y < x/2`` or ``y > 2x``;
    ``b``: ``|K^H| (|x| + |y|)`` for ``xy < 0``;
    ``c``: ``|K^L| max^(alpha+3/2) / min^(alpha+1/2)`` on the global zone;
    ``d``: ``|K^L - K^H| x / (1 + sqrt(x/|y - x|))`` on the local zone
    ``x/2 < y < 2x``, minus the band ``|y - x| < delta``.

    Zones are taken closed (sup over the closure) so that a relative grid
    puts nodes on their boundary at both resolutions.
    """
    if inequality not in _INEQUALITY_REGION:
        raise ValueError(f"inequality must be one of a, b, c, d; got {inequality!r}")
    region = _INEQUALITY_REGION[inequality]
    family = laguerre(alpha)
    delta = grid.spacing
    sup = symbol.phi_sup

    def mask(X, Y):
        keep = region.contains(X, Y, closed=True)
        if inequality == "d":
            keep &= np.abs(X - Y) >= delta * (1 - 1e-9)
        return keep

    def ratio(x, y):
        if inequality == "a":
            return np.abs(_kernel(HERMITE, symbol, x, y)) * np.maximum(x, y) / sup
        if inequality == "b":
            return np.abs(_kernel(HERMITE, symbol, x, y)) * (np.abs(x) + np.abs(y)) / sup
        if inequality == "c":
            lo, hi = np.minimum(x, y), np.maximum(x, y)
            k = np.abs(_kernel(family, symbol, x, y))
            return k * hi ** (alpha + 1.5) / lo ** (alpha + 0.5) / sup
        diff = np.abs(_kernel(family, symbol, x, y) - _kernel(HERMITE, symbol, x, y))
        return diff * x / (1 + np.sqrt(x / np.abs(y - x))) / sup

    return _scan(f"({inequality}) {family.name}/{symbol.name}", grid, mask, ratio)


def _as_callable(f):
    if isinstance(f, GridFunction) or callable(f):
        return f
    raise TypeError("f must be callable or a GridFunction")


def hardy_h0(eta: float, f, x: float, *, exponent_at_zero: float = 0.0, tol: Tolerance = AVERAGING_TOLERANCE):
    """``x^(-eta-1) int_0^x y^eta f(y) dy``.

    ``exponent_at_zero`` declares ``f(y) ~ y^beta`` as ``y -> 0`` so the
    endpoint singularity of the integrand is mapped out.
    """
    if not eta > -1:
        raise ValueError("eta must exceed -1")
    if not x > 0:
        raise ValueError("x must be positive")
    f = _as_callable(f)
    beta = eta + exponent_at_zero
    res = adaptive_integrate(lambda y: y**eta * f(y), 0.0, x, tol, singular=(beta, None))
    return x ** (-eta - 1) * res.value


def hardy_hinf(eta: float, f, x: float, *, decay_exponent: float | None = None, tol: Tolerance = AVERAGING_TOLERANCE):
    """``x^eta int_x^inf f(y) y^(-eta-1) dy``, computed as ``int_0^1 f(x/u) u^(eta-1) du``.

    ``decay_exponent`` declares ``f(y) ~ y^(-beta)`` as ``y -> inf``.
    """
    if not eta > -1:
        raise ValueError("eta must exceed -1")
    if not x > 0:
        raise ValueError("x must be positive")
    f = _as_callable(f)
    singular = None if decay_exponent is None else eta + decay_exponent - 1.0
    res = adaptive_integrate(lambda u: f(x / u) * u ** (eta - 1.0), 0.0, 1.0, tol, singular=(singular, None))
    return res.value


def op_n(f, x: float, tol: Tolerance = AVERAGING_TOLERANCE):
    """``int_{x/2}^{2x} (1/y) (1 + sqrt(x/|x-y|)) |f(y)| dy``.

    The inverse square root at ``y = x`` is removed by substituting
    ``y = x -+ v^2`` on either side, which leaves the smooth integrand
    ``2 (v + sqrt(x)) |f(y)| / y`` in ``v``.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    f = _as_callable(f)
    root = math.sqrt(x)

    def side(sign):
        def integrand(v):
            y = x + sign * v * v
            return 2.0 * (v + root) * np.abs(f(y)) / y

        return integrand

    left = adaptive_integrate(side(-1.0), 0.0, math.sqrt(x / 2), tol)
    right = adaptive_integrate(side(1.0), 0.0, root, tol)
    return float(np.real(left.value + right.value))


def op_n_constant() -> float:
    """``N(1)``: ``log 4 + 2 log(1 + sqrt 2) + pi/2`` (independent of ``x``)."""
    return math.log(4.0) + 2.0 * math.log1p(math.sqrt(2.0)) + 0.5 * math.pi


def op_n_lp_constant(p: float, tol: Tolerance = AVERAGING_TOLERANCE) -> float:
    """Dilation bound for ``N`` on ``L^p(0, inf)``.

    With ``y = xu``, ``Nf(x) = int_{1/2}^2 k(u) |f(xu)| du`` and
    ``||f(.u)||_p = u^(-1/p) ||f||_p``, so Minkowski's inequality gives
    ``||Nf||_p <= int k(u) u^(-1/p) du ||f||_p``.  The constant is sharp
    (approached by dilation-invariant profiles) and tends to ``N(1)`` only
    as ``p -> inf``.
    """
    if not p >= 1:
        raise ValueError("p must be at least 1")
    inv = 0.0 if math.isinf(p) else 1.0 / p

    def k(u):
        with np.errstate(divide="ignore"):
            return (1.0 + np.abs(1.0 - u) ** -0.5) * u ** (-1.0 - inv)

    left = adaptive_integrate(k, 0.5, 1.0, tol, singular=(None, -0.5))
    right = adaptive_integrate(k, 1.0, 2.0, tol, singular=(-0.5, None))
    return float(left.value + right.value)


def lp_norm_half_line(values, grid, p: float) -> float:
    """Composite Simpson ``(int |v|^p)^(1/p)`` on an odd-length uniform grid."""
    return float(simpson(np.abs(values) ** p, x=grid) ** (1.0 / p))


def n_lp_probe(f, grid, p: float):
    """``||N f||_p / ||f||_p`` with both norms on ``grid`` (``f >= 0`` assumed).

    Returns ``(ratio, N(1), sharp constant)``.
    """
    grid = np.asarray(grid, dtype=float)
    nf = np.array([op_n(f, xi) for xi in grid])
    ratio = lp_norm_half_line(nf, grid, p) / lp_norm_half_line(f(grid), grid, p)
    return ratio, op_n_constant(), op_n_lp_constant(p)


@dataclass
class MaximalTruncation:
    x: float
    epsilons: np.ndarray
    magnitudes: np.ndarray
    pv_value: complex

    @property
    def sup(self) -> float:
        return float(np.max(self.magnitudes))


def maximal_truncation_scan(family: KernelFamily, symbol: MultiplierSymbol, f: GridFunction, x: float, epsilons):
    """``|Lambda(eps) f(x) + int_{|x-y|>eps} K f|`` for each ``eps`` and their sup."""
    res = pv_apply(family, symbol, f, [x], epsilons, warn=False)
    mags = np.abs(res.values[:, 0])
    if mags.ndim > 1:
        mags = np.linalg.norm(mags, axis=-1)
    return MaximalTruncation(float(x), res.epsilons, mags, complex(np.ravel(res.values[-1, 0])[0]))
