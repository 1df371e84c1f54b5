r"""Laplace-transform-type symbols.

A symbol is a bounded function :math:`\phi` on :math:`(0,\infty)`; the
multiplier it generates is

.. math:: m(\lambda) = \lambda \int_0^\infty e^{-\lambda t}\phi(t)\,dt .
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from ..quadrature import Tolerance, meda_time_integrate
from ..specfun import log_gamma_complex

__all__ = [
    "MultiplierSymbol",
    "one",
    "exp_decay",
    "indicator",
    "imaginary_power_symbol",
    "damped",
    "parse_symbol",
    "symbol_m",
    "SYMBOL_TOLERANCE",
]

SYMBOL_TOLERANCE = Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=20000)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """``phi`` must be vectorized and bounded by ``phi_sup`` in modulus."""

    name: str
    phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    phi_sup: float
    phi_zero_limit: Optional[complex] = None
    breakpoints: tuple = ()

    def __call__(self, t):
        return self.phi(np.asarray(t, dtype=float))


def one() -> MultiplierSymbol:
    return MultiplierSymbol("one", lambda t: np.ones_like(t), 1.0, 1.0)


def exp_decay() -> MultiplierSymbol:
    return MultiplierSymbol("expdecay", lambda t: np.exp(-t), 1.0, 1.0)


def indicator(a: float) -> MultiplierSymbol:
    """``phi = 1`` on ``(0, a)``, ``0`` after."""
    a = float(a)
    if not a > 0:
        raise ValueError("indicator cut must be positive")
    return MultiplierSymbol(f"indicator:{a:g}", lambda t: (t < a).astype(float), 1.0, 1.0, (a,))


def imaginary_power_symbol(gamma: float) -> MultiplierSymbol:
    r"""``phi(t) = t^{-i gamma} / Gamma(1 - i gamma)``, so that ``m(lambda) = lambda^{i gamma}``.

    ``|phi| = 1/|Gamma(1 - i gamma)| = sqrt(sinh(pi gamma) / (pi gamma))``.
    """
    gamma = float(gamma)
    if gamma == 0.0:
        return MultiplierSymbol("imaginary:0", lambda t: np.ones_like(t) + 0j, 1.0, 1.0)
    log_norm = -log_gamma_complex(1.0 - 1j * gamma)
    bound = math.exp(log_norm.real)

    def phi(t):
        return np.exp(log_norm - 1j * gamma * np.log(t))

    return MultiplierSymbol(f"imaginary:{gamma:g}", phi, bound, None)


def damped(symbol: MultiplierSymbol, rate: float) -> MultiplierSymbol:
    """``t -> phi(t) exp(-rate t)``."""
    inner = symbol.phi
    return MultiplierSymbol(
        f"{symbol.name}*exp(-{rate:g}t)",
        lambda t: inner(t) * np.exp(-rate * t),
        symbol.phi_sup,
        symbol.phi_zero_limit,
        symbol.breakpoints,
    )


def parse_symbol(spec: str) -> MultiplierSymbol:
    """Build a symbol from ``one``, ``expdecay``, ``indicator:a`` or ``imaginary:gamma``."""
    spec = spec.strip()
    head, _, arg = spec.partition(":")
    if head == "one" and not arg:
        return one()
    if head == "expdecay" and not arg:
        return exp_decay()
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad symbol {spec!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"bad symbol {spec!r}")
    if head == "indicator":
        return indicator(value)
    if head == "imaginary":
        return imaginary_power_symbol(value)
    raise ValueError(f"bad symbol {spec!r}")


def symbol_m(symbol: MultiplierSymbol, lam, tol: Tolerance = SYMBOL_TOLERANCE):
    """``m(lambda)`` by Laplace quadrature; vectorized over ``lambda > 0``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise ValueError("symbol_m needs lambda > 0")
    flat = tuple(lam.ravel().tolist())
    out = np.array(_symbol_m_cached(symbol, flat, tol)).reshape(lam.shape)
    return out[()]


@lru_cache(maxsize=256)
def _symbol_m_cached(symbol, lams, tol):
    lam = np.array(lams)
    order = np.argsort(lam)
    values = np.empty(lam.size, dtype=complex)
    # one adaptive run per octave keeps the shared panel structure tight
    groups = np.floor(np.log2(lam[order])).astype(int)
    for g in np.unique(groups):
        idx = order[groups == g]
        lg = lam[idx]

        def integrand(t, lg=lg):
            return symbol.phi(t)[:, None] * lg * np.exp(-np.outer(t, lg))

        res = meda_time_integrate(
            integrand,
            tol,
            decay_rate=float(lg.min()),
            breakpoints=tuple(symbol.breakpoints) + tuple(1.0 / lg[[0, -1]]),
        )
        values[idx] = res.value
    return tuple(values.tolist())
