"""Vector-valued functions with values in finite-dimensional ``l^q``.

Operators act coordinatewise, which is exactly the algebraic tensor
extension ``T (x) id``.  Norms are Bochner norms ``(int ||f(x)||_q^p dmu)^(1/p)``
computed by composite Simpson quadrature on the sample grid.  The probe
reports empirical norm ratios only; it never decides anything about the
geometry of the coordinate space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .heatkernels import KernelFamily
from .multipliers import (
    GridFunction,
    MultiplierSymbol,
    SpectralTruncation,
    imaginary_power_symbol,
    polynomial_bump,
    pv_apply,
    spectral_apply,
    spectral_coefficients,
    spectral_values,
)

__all__ = [
    "CoordinateSpace",
    "BochnerNorm",
    "bochner_lp_norm",
    "vector_apply",
    "CoordinateError",
    "default_corpus",
    "gamma_norm_probe",
    "ProbeRow",
]


@dataclass(frozen=True)
class CoordinateSpace:
    """``C^n`` with the ``l^q`` norm, ``1 <= q <= inf``."""

    q: float
    n: int

    def __post_init__(self):
        if not (self.q >= 1):
            raise ValueError("q must be in [1, inf]")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    def norm(self, v) -> np.ndarray:
        """Norm along the last axis."""
        v = np.asarray(v)
        if v.shape[-1] != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {v.shape[-1]}")
        return np.linalg.norm(v, ord=self.q, axis=-1)


@dataclass(frozen=True)
class BochnerNorm:
    p: float
    space: CoordinateSpace
    measure: str = "lebesgue"

    def __post_init__(self):
        if not (1 < self.p < math.inf):
            raise ValueError("p must be in (1, inf)")
        if self.measure not in ("lebesgue", "gaussian"):
            raise ValueError(f"unknown measure {self.measure!r}")


def _vector_values(f: GridFunction):
    return f.values[:, None] if f.values.ndim == 1 else f.values


def bochner_lp_norm(bn: BochnerNorm, f: GridFunction) -> float:
    """``(int ||f||_q^p dmu)^(1/p)`` by composite Simpson on the grid of ``f``."""
    vals = _vector_values(f)
    if vals.shape[1] != bn.space.n:
        raise ValueError(f"function has {vals.shape[1]} coordinates, space has {bn.space.n}")
    pointwise = bn.space.norm(vals) ** bn.p
    if bn.measure == "gaussian":
        pointwise = pointwise * np.exp(-f.grid**2)
    return float(simpson(pointwise, x=f.grid) ** (1.0 / bn.p))


class CoordinateError(RuntimeError):
    def __init__(self, index, cause):
        super().__init__(f"coordinate {index}: {cause}")
        self.index = index


def vector_apply(
    family: KernelFamily,
    symbol: MultiplierSymbol,
    f: GridFunction,
    mode: str = "spectral",
    grid=None,
    trunc: SpectralTruncation = SpectralTruncation(),
) -> GridFunction:
    """Apply the scalar operator to each coordinate of ``f``."""
    grid = f.grid if grid is None else np.asarray(grid, dtype=float)
    vals = _vector_values(f)
    columns = []
    for i in range(vals.shape[1]):
        fi = GridFunction(f.grid, vals[:, i], f.domain)
        try:
            if mode == "spectral":
                columns.append(spectral_apply(family, symbol, fi, trunc, grid).values)
            elif mode == "pv":
                columns.append(pv_apply(family, symbol, fi, grid, warn=False).value)
            else:
                raise ValueError(f"unknown mode {mode!r}")
        except ValueError as exc:
            if str(exc).startswith("unknown mode"):
                raise
            raise CoordinateError(i, exc) from exc
        except ArithmeticError as exc:
            raise CoordinateError(i, exc) from exc
    out = np.stack(columns, axis=1)
    if f.values.ndim == 1:
        out = out[:, 0]
    return GridFunction(grid, out, f.domain)


def default_corpus(n: int, domain: str = "real", seed: int = 20240501, nodes: int = 801):
    """Tensor bumps ``b e_i`` and mixed bumps with oscillating coordinates.

    The grid is wide enough to carry the operator outputs; the mixed bumps
    draw centers, widths and frequencies from a seeded generator.
    """
    rng = np.random.default_rng(seed)
    if domain == "real":
        grid = np.linspace(-3.0, 3.0, nodes)
        base_center, lo, hi = 0.0, -0.8, 0.8
    else:
        grid = np.linspace(0.25, 5.0, nodes)
        base_center, lo, hi = 2.5, 1.8, 3.2
    corpus = []
    bump = polynomial_bump(base_center, 2.0)(grid)
    for i in range(min(n, 2)):
        v = np.zeros((grid.size, n), dtype=complex)
        v[:, i] = bump
        corpus.append(GridFunction(grid, v, domain))
    for _ in range(2):
        v = np.zeros((grid.size, n), dtype=complex)
        for i in range(n):
            c = rng.uniform(lo, hi)
            w = rng.uniform(1.2, min(2.0, c - grid[0]) if domain == "positive" else 2.0)
            freq = rng.uniform(0.0, 3.0)
            phase = rng.uniform(0.0, 2 * math.pi)
            v[:, i] = polynomial_bump(c, w)(grid) * np.exp(1j * (freq * grid + phase))
        corpus.append(GridFunction(grid, v, domain))
    return corpus


@dataclass
class ProbeRow:
    gamma: float
    max_ratio: float
    ratios: tuple


def gamma_norm_probe(
    family: KernelFamily,
    p: float,
    space: CoordinateSpace,
    gammas,
    corpus,
    *,
    output_grid=None,
    trunc: SpectralTruncation = SpectralTruncation(),
):
    """For each ``gamma``: ``max_f ||L^{i gamma} f|| / ||f||`` in ``L^p(l^q)``.

    Outputs are sampled on ``output_grid`` (default: a window wide enough
    for the operator tails) and both norms use their own sample grids.
    A lower bound on the operator norm, nothing more.
    """
    if not corpus:
        raise ValueError("corpus must not be empty")
    bn = BochnerNorm(p, space)
    if output_grid is None:
        output_grid = np.linspace(-16.0, 16.0, 6401) if family.domain == "real" else np.linspace(0.01, 16.0, 3201)
    if family.tag not in ("Hermite", "Laguerre"):
        raise ValueError("imaginary powers need a positive spectrum (Hermite or Laguerre)")
    # coefficients do not depend on gamma; every coordinate is expanded at once
    coefficients = [spectral_coefficients(family, f, trunc.K) for f in corpus]
    base = [bochner_lp_norm(bn, f) for f in corpus]
    rows = []
    for g in gammas:
        ratios = []
        for f, c, norm in zip(corpus, coefficients, base):
            if g == 0:
                out = f
            else:
                vals = spectral_values(family, imaginary_power_symbol(g), f, output_grid, coefficients=c)
                out = GridFunction(output_grid, vals, f.domain)
            ratios.append(bochner_lp_norm(bn, out) / norm)
        rows.append(ProbeRow(float(g), float(max(ratios)), tuple(ratios)))
    return rows
