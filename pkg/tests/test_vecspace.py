import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapmult.heatkernels import HERMITE, laguerre
from lapmult.multipliers import (
    GridFunction,
    exp_decay,
    imaginary_power_symbol,
    polynomial_bump,
    pv_apply,
    spectral_apply,
    symbol_m,
)
from lapmult.specfun import hermite_functions
from lapmult.vecspace import (
    BochnerNorm,
    CoordinateError,
    CoordinateSpace,
    bochner_lp_norm,
    default_corpus,
    gamma_norm_probe,
    vector_apply,
)

WIDE = np.linspace(-12.0, 12.0, 2401)
vectors = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=3, max_size=3
)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]), vectors, vectors, vectors)
def test_triangle_inequality(q, a, b, c):
    s = CoordinateSpace(q, 3)
    a, b, c = (np.array(v) for v in (a, b, c))
    assert s.norm(a - c) <= s.norm(a - b) + s.norm(b - c) + 1e-12 * (1 + s.norm(a) + s.norm(b) + s.norm(c))


@settings(max_examples=100, deadline=None)
@given(vectors, vectors)
def test_parallelogram_law(a, b):
    s = CoordinateSpace(2.0, 3)
    a, b = np.array(a), np.array(b)
    lhs = s.norm(a + b) ** 2 + s.norm(a - b) ** 2
    rhs = 2 * s.norm(a) ** 2 + 2 * s.norm(b) ** 2
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)


def test_coordinate_space_validation():
    with pytest.raises(ValueError):
        CoordinateSpace(0.5, 2)
    with pytest.raises(ValueError):
        CoordinateSpace(2.0, 0)
    with pytest.raises(ValueError):
        CoordinateSpace(2.0, 3).norm(np.ones(2))
    with pytest.raises(ValueError):
        BochnerNorm(1.0, CoordinateSpace(2.0, 1))
    with pytest.raises(ValueError):
        BochnerNorm(2.0, CoordinateSpace(2.0, 1), measure="counting")


def _random_vector_function(rng, n, grid):
    vals = np.zeros((grid.size, n), dtype=complex)
    for i in range(n):
        c, w = rng.uniform(-1, 1), rng.uniform(0.5, 1.5)
        amp = rng.normal() + 1j * rng.normal()
        vals[:, i] = amp * np.exp(-(((grid - c) / w) ** 2)) * np.cos(rng.uniform(0, 3) * grid)
    return GridFunction(grid, vals)


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False), st.integers(0, 2**32 - 1))
def test_homogeneity(c, seed):
    f = _random_vector_function(np.random.default_rng(seed), 3, np.linspace(-6, 6, 401))
    bn = BochnerNorm(1.7, CoordinateSpace(3.0, 3))
    scaled = bochner_lp_norm(bn, f.with_values(c * f.values))
    assert abs(scaled - abs(c) * bochner_lp_norm(bn, f)) <= 1e-12 * max(1.0, abs(c) * bochner_lp_norm(bn, f))


def test_norm_vanishes_only_on_zero():
    grid = np.linspace(-1, 1, 41)
    bn = BochnerNorm(2.0, CoordinateSpace(2.0, 2))
    assert bochner_lp_norm(bn, GridFunction(grid, np.zeros((41, 2)))) == 0.0
    v = np.zeros((41, 2))
    v[20, 1] = 1e-3
    assert bochner_lp_norm(bn, GridFunction(grid, v)) > 0


def test_scalar_reduction_and_h0():
    h0 = hermite_functions(0, WIDE)[0]
    f = GridFunction(WIDE, h0[:, None])
    assert bochner_lp_norm(BochnerNorm(2.0, CoordinateSpace(2.0, 1)), f) == pytest.approx(1.0, abs=1e-8)
    # q does not matter in one dimension
    for q in (1.0, 3.0, math.inf):
        a = bochner_lp_norm(BochnerNorm(3.0, CoordinateSpace(q, 1)), f)
        b = bochner_lp_norm(BochnerNorm(3.0, CoordinateSpace(2.0, 1)), GridFunction(WIDE, h0))
        assert a == pytest.approx(b, rel=1e-14)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_identical_coordinates(q):
    grid = np.linspace(-6, 6, 801)
    g = np.exp(-grid**2) * (1 + 0.5j * grid)
    n = 4
    p = 1.5
    vec = bochner_lp_norm(BochnerNorm(p, CoordinateSpace(q, n)), GridFunction(grid, np.tile(g[:, None], (1, n))))
    scalar = bochner_lp_norm(BochnerNorm(p, CoordinateSpace(q, 1)), GridFunction(grid, g))
    assert vec == pytest.approx(n ** (1 / q) * scalar, rel=1e-12)


def test_against_refined_riemann_sum(rng):
    space = CoordinateSpace(3.0, 3)
    bn = BochnerNorm(2.5, space)
    coarse = np.linspace(-7, 7, 401)
    fine = np.linspace(-7, 7, 4 * 400 + 1)
    state = rng.bit_generator.state
    f = _random_vector_function(rng, 3, coarse)
    rng.bit_generator.state = state
    f_fine = _random_vector_function(rng, 3, fine)
    dx = fine[1] - fine[0]
    brute = (np.sum(space.norm(f_fine.values) ** bn.p) * dx) ** (1 / bn.p)
    assert bochner_lp_norm(bn, f) == pytest.approx(brute, rel=1e-4)


def test_gaussian_measure():
    grid = np.linspace(-8, 8, 1601)
    f = GridFunction(grid, np.ones((grid.size, 1)))
    # int e^{-x^2} dx = sqrt(pi)
    v = bochner_lp_norm(BochnerNorm(2.0, CoordinateSpace(2.0, 1), "gaussian"), f)
    assert v == pytest.approx(math.pi**0.25, rel=1e-10)


def test_dimension_mismatch():
    f = GridFunction(np.linspace(0, 1, 11), np.ones((11, 2)))
    with pytest.raises(ValueError):
        bochner_lp_norm(BochnerNorm(2.0, CoordinateSpace(2.0, 3)), f)


def test_vector_apply_on_eigenfunctions():
    h = hermite_functions(3, WIDE)
    f = GridFunction(WIDE, np.stack([h[2], h[3]], axis=1))
    s = exp_decay()
    out = vector_apply(HERMITE, s, f)
    m = symbol_m(s, np.array([2.5, 3.5]))
    np.testing.assert_allclose(out.values[:, 0], m[0] * h[2], atol=1e-10)
    np.testing.assert_allclose(out.values[:, 1], m[1] * h[3], atol=1e-10)


def test_vector_apply_scalar_reduction():
    f = GridFunction(WIDE, polynomial_bump(0.3, 1.5)(WIDE))
    s = imaginary_power_symbol(0.5)
    scalar = spectral_apply(HERMITE, s, f)
    vec = vector_apply(HERMITE, s, f.with_values(f.values[:, None]))
    assert np.max(np.abs(vec.values[:, 0] - scalar.values)) <= 1e-12
    assert vector_apply(HERMITE, s, f).values.ndim == 1

    grid = np.linspace(-2, 2, 401)
    g = GridFunction(grid, polynomial_bump(0.0, 1.5)(grid))
    pts = [-0.9, -0.3, 0.4, 1.1]
    vpv = vector_apply(HERMITE, s, g.with_values(g.values[:, None]), mode="pv", grid=pts)
    spv = pv_apply(HERMITE, s, g, pts, warn=False).value
    assert np.max(np.abs(vpv.values[:, 0] - spv)) <= 1e-12


def test_vector_apply_equivariance(rng):
    f = _random_vector_function(rng, 3, WIDE)
    s = imaginary_power_symbol(1.0)
    out = vector_apply(HERMITE, s, f)
    perm = np.array([2, 0, 1])
    phases = np.exp(1j * rng.uniform(0, 2 * math.pi, 3))
    moved = vector_apply(HERMITE, s, f.with_values(f.values[:, perm] * phases))
    assert np.array_equal(vector_apply(HERMITE, s, f.with_values(f.values[:, perm])).values, out.values[:, perm])
    np.testing.assert_allclose(moved.values, out.values[:, perm] * phases, rtol=0, atol=1e-14)


def test_coordinate_error_names_index():
    grid = np.linspace(0.2, 4, 101)
    vals = np.ones((grid.size, 2))
    f = GridFunction(grid, vals, "positive")
    # the positive half line cannot be expanded in Hermite functions
    with pytest.raises(CoordinateError) as info:
        vector_apply(HERMITE, exp_decay(), f)
    assert info.value.index == 0
    with pytest.raises(ValueError):
        vector_apply(HERMITE, exp_decay(), f.with_values(vals), mode="other")


def test_probe_identity_and_isometry():
    corpus = default_corpus(2)
    rows = gamma_norm_probe(HERMITE, 2.0, CoordinateSpace(2.0, 2), [0.0, 0.5, 2.0], corpus)
    assert all(r == 1.0 for r in rows[0].ratios)
    for row in rows[1:]:
        assert row.max_ratio <= 1 + 1e-6
        assert all(abs(r - 1) <= 1e-6 for r in row.ratios)
    assert [r.gamma for r in rows] == [0.0, 0.5, 2.0]


def test_probe_is_deterministic():
    space = CoordinateSpace(3.0, 3)
    gammas = [0, 0.5, 1, 2, 4]
    a = gamma_norm_probe(HERMITE, 1.5, space, gammas, default_corpus(3))
    b = gamma_norm_probe(HERMITE, 1.5, space, gammas, default_corpus(3))
    assert [(r.gamma, r.max_ratio, r.ratios) for r in a] == [(r.gamma, r.max_ratio, r.ratios) for r in b]


def test_probe_laguerre_and_errors():
    corpus = default_corpus(2, "positive")
    rows = gamma_norm_probe(laguerre(0.5), 2.0, CoordinateSpace(2.0, 2), [0.0, 1.0], corpus)
    assert rows[0].max_ratio == 1.0
    assert rows[1].max_ratio == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        gamma_norm_probe(HERMITE, 2.0, CoordinateSpace(2.0, 2), [0.0], [])
