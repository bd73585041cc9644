from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlsq.convolve import ThetaVector, mconv, mconv_spectral, young_check, young_constant
from mlsq.exponents import Exponent
from mlsq.grid import SampledFunction, TorusGrid, lp_norm, make_trig_poly, random_trig_poly, spectrum, translate
from mlsq.harness.instances import localized_function

E = Exponent.of


def box(grid, lo, hi):
    x = grid.axis()
    return SampledFunction(grid, ((x >= lo) & (x < hi)).astype(float))


def test_theta_vector():
    th = ThetaVector([1, -2, 3])
    assert th.m == 3 and th.integer() == (1, -2, 3)
    with pytest.raises(ValueError):
        ThetaVector([1, 1])
    with pytest.raises(ValueError):
        ThetaVector([0, 1])
    half = ThetaVector([F(1, 2), 1])
    with pytest.raises(ValueError):
        half.integer()
    scaled, D = half.integerize()
    assert D == 2 and scaled.integer() == (1, 2)


def test_indicator_triangle(grid64):
    ind = box(grid64, 0, 1)
    out = mconv([ind], ind, [1]).values.real
    n = grid64.n
    k = np.arange(grid64.N)
    # discrete convolution of two length-n boxes: h * max(0, n - |k - (n - 1)|)
    assert np.allclose(out, np.maximum(0, n - np.abs(k - (n - 1))) / n, atol=1e-15)
    x = grid64.axis()
    tri = np.maximum(0, 1 - np.abs(x - 1))
    assert np.max(np.abs(out - tri)) <= grid64.h + 1e-15
    assert out.max() == pytest.approx(1.0)


def test_delta_limit():
    errs = []
    for n in (32, 64, 128):
        grid = TorusGrid(1, 4, n)
        f1 = make_trig_poly(grid, {1: 1.0, -1: 1.0})
        f2 = make_trig_poly(grid, {0: 1.0, 2: 0.5j})
        g = box(grid, 0, 4 * grid.h)
        g = g.with_values(g.values / lp_norm(g, 1))
        out = mconv([f1, f2], g, [1, 2])
        errs.append(np.max(np.abs(out.values - f1.values * f2.values)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.1)
    delta = SampledFunction(grid, np.eye(1, grid.N, 0).ravel() / grid.h)
    assert np.allclose(mconv([f1, f2], delta, [1, 2]).values, f1.values * f2.values, atol=1e-14)


def test_multilinearity_and_translation(grid64, rng):
    f1, f2, g = (random_trig_poly(grid64, 4, rng) for _ in range(3))
    base = mconv([f1, f2], g, [1, -2]).values
    doubled = mconv([f1 * 2, f2], g, [1, -2]).values
    assert np.array_equal(doubled, 2 * base)
    f3 = random_trig_poly(grid64, 4, rng)
    add = mconv([f1 + f3, f2], g, [1, -2]).values
    assert np.allclose(add, base + mconv([f3, f2], g, [1, -2]).values, rtol=0, atol=1e-13)
    s = 17
    shifted = mconv([translate(f1, s), translate(f2, s)], g, [1, -2]).values
    assert np.array_equal(shifted, np.roll(base, s))


def test_young_monotonicity(grid64, rng):
    for _ in range(5):
        f1 = random_trig_poly(grid64, 4, rng)
        f2, g = localized_function(grid64, rng), localized_function(grid64, rng)
        a = lp_norm(mconv([f1, f2], g, [1, 2]), 2)
        b = lp_norm(mconv([f1.abs(), f2], g, [1, 2]), 2)
        assert b >= a * (1 - 1e-12)


@pytest.mark.parametrize("theta", [(1, 2), (1, -1), (2, -3), (-1, 3)])
def test_spectral_matches_direct(theta, rng):
    grid = TorusGrid(1, 4, 64)
    for _ in range(5):
        f1, f2, g = (random_trig_poly(grid, 8, rng) for _ in range(3))
        d = mconv([f1, f2], g, theta).values
        s = mconv_spectral(f1, f2, g, theta).values
        assert np.max(np.abs(d - s)) <= 1e-10 * np.max(np.abs(d))


def test_spectral_2d(rng):
    grid = TorusGrid(2, 2, 8)
    f1, f2, g = (random_trig_poly(grid, 2, rng) for _ in range(3))
    d = mconv([f1, f2], g, (1, 2)).values
    s = mconv_spectral(f1, f2, g, (1, 2)).values
    assert np.max(np.abs(d - s)) <= 1e-10 * np.max(np.abs(d))


def test_spectral_degenerate_cases(grid64, rng):
    f1, f2 = random_trig_poly(grid64, 5, rng), random_trig_poly(grid64, 5, rng)
    c = SampledFunction(grid64, 0.7 * np.ones(grid64.shape))
    # ĝ lives at 0: only θ1 k1 + θ2 k2 = 0 pairs survive, here k2 = -2 k1 for θ = (2, 1)
    c1, c2 = spectrum(f1), spectrum(f2)
    N = grid64.N
    x = grid64.axis()
    closed = sum(
        c1[k % N] * c2[(-2 * k) % N] * 0.7 * 4 * np.exp(2j * np.pi * (k - 2 * k) * x / 4) for k in range(-2, 3)
    )
    s = mconv_spectral(f1, f2, c, (2, 1)).values
    assert np.allclose(s, closed, atol=1e-12)
    assert np.allclose(mconv([f1, f2], c, (2, 1)).values, closed, atol=1e-12)
    one = make_trig_poly(grid64, {0: 1.0})
    g = random_trig_poly(grid64, 5, rng)
    # f2 ≡ 1 reduces to the one-function multiplier ĝ(θ1 k)
    one_d = mconv([f1], g, [3]).values
    assert np.allclose(mconv_spectral(f1, one, g, (3, 5)).values, one_d, atol=1e-12)


def test_spectral_aliasing_rejected(grid64, rng):
    f = random_trig_poly(grid64, 60, rng)
    with pytest.raises(ValueError, match="aliasing"):
        mconv_spectral(f, f, f, (1, 2))
    with pytest.raises(ValueError):
        mconv_spectral(f, f, f, (1, 2, 3))


def test_young_constants():
    th = ThetaVector([1, 2, 3])
    val, kind, _ = young_constant(th, [E(3)] * 3, E(2))
    assert kind == "p=1" and val == pytest.approx((2 * 3) ** (-1 / 6))
    val, kind, detail = young_constant(th, [E(2), E("inf"), E(1)], E(2))
    assert kind == "vertex" and detail["pair"] == [1, 3] and val == pytest.approx(2 ** -0.5)
    val, kind, detail = young_constant(th, [E(1), E(1), E("inf")], E("inf"))
    assert kind == "vertex" and detail["pair"] == [1, 2] and val == 1.0
    assert young_constant(th, [E(4)] * 3, E(2))[1] == "empirical"


def test_young_check_zero_g(grid64, rng):
    fs = [localized_function(grid64, rng) for _ in range(3)]
    zero = SampledFunction(grid64, np.zeros(grid64.shape))
    res = young_check(fs, zero, (1, 2, 3), [E(3)] * 3, E(2))
    assert res.lhs == 0 and res.passed


def test_young_check_regimes(grid64, rng):
    fs = [localized_function(grid64, rng) for _ in range(3)]
    g = localized_function(grid64, rng)
    res = young_check(fs, g, (1, 2, 3), [E(4)] * 3, E(3))  # p = 4/3 in (1, r' = 3/2) -> weak norm
    assert res.regime.tag.value == "CASE_A" and res.g_norm == "weak" and res.passed is None
    with pytest.raises(ValueError):
        young_check(fs, g, (1, 2, 3), [E(9)] * 3, E(2))  # p = 3 >= r'
    res = young_check(fs, g, (1, 2, 3), [E(1), E("inf"), E("inf")], E("3/2"))  # p_j = 1 needs CASE_B
    assert res.regime.tag.value == "CASE_B" and res.g_norm == "strong"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([("3", "3", "3"), ("2", "4", "4"), ("6", "3", "2")]), st.sampled_from(["2", "4"]))
def test_young_p1_property(seed, ps, r):
    grid = TorusGrid(1, 4, 64)
    rng = np.random.default_rng(seed)
    fs = [localized_function(grid, rng) for _ in range(3)]
    g = localized_function(grid, rng)
    res = young_check(fs, g, (1, 2, 3), [E(p) for p in ps], E(r))
    assert res.constant_kind == "p=1" and res.passed
