"""Sampled functions and the bump test corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["GridFunction", "polynomial_bump", "bump_corpus"]


@dataclass
class GridFunction:
    """Samples of a (possibly vector valued) function on a 1-D grid.

    Calling the object evaluates the not-a-knot cubic spline through the
    samples and returns zero outside ``[grid[0], grid[-1]]``.  Values of
    shape ``(n,)`` are scalar; ``(n, d)`` stores ``d`` coordinates.
    """

    grid: np.ndarray
    values: np.ndarray
    domain: str = "real"
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.dtype.kind not in "fc":
            self.values = self.values.astype(float)
        if self.grid.ndim != 1 or self.grid.size < 4:
            raise ValueError("grid must be 1-D with at least 4 nodes")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.values.shape[0] != self.grid.size or self.values.ndim > 2:
            raise ValueError("values must have shape (n,) or (n, d) matching the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if self.domain not in ("real", "positive"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.domain == "positive" and self.grid[0] <= 0:
            raise ValueError("grid for the half line must be positive")
        self._spline = CubicSpline(self.grid, self.values, bc_type="not-a-knot", extrapolate=False)

    @classmethod
    def sample(cls, f, grid, domain="real"):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid)), domain)

    @property
    def support(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    @property
    def dimension(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._spline(x)
        return np.nan_to_num(out, nan=0.0)

    def coordinate(self, i: int) -> "GridFunction":
        if self.values.ndim == 1:
            if i != 0:
                raise IndexError("scalar grid function has one coordinate")
            return self
        return GridFunction(self.grid, self.values[:, i], self.domain)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.domain)


def polynomial_bump(center: float, width: float, power: int = 8):
    """``(1 - u^2)^power`` on ``|u| < 1`` with ``u = (x - center)/width``.

    High powers on wide supports keep the eigencoefficients small well
    before the default truncation.
    """

    def bump(x):
        u = (np.asarray(x, dtype=float) - center) / width
        return np.clip(1.0 - u * u, 0.0, None) ** power

    return bump


# (center, width) pairs used by the equivalence suite
_CORPUS = {
    "real": ((0.0, 1.5), (0.5, 2.0), (-0.5, 1.75)),
    "positive": ((2.0, 1.5), (2.5, 2.0), (3.0, 2.5)),
}


def bump_corpus(domain: str = "real", nodes: int = 801):
    """Three compactly supported bumps sampled on their supports."""
    out = []
    for c, w in _CORPUS[domain]:
        grid = np.linspace(c - w, c + w, nodes)
        if domain == "positive":
            grid = grid[grid > 0]
        out.append(GridFunction.sample(polynomial_bump(c, w), grid, domain))
    return out
