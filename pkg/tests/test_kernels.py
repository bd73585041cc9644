import math

import numpy as np
import pytest
from scipy import integrate, special

from mlsq.exponents import Exponent
from mlsq.grid import TorusGrid, lp_norm
from mlsq.kernels import (
    BUMP,
    CUBE_INDICATOR,
    GAUSSIAN,
    POWER_TAIL,
    KernelError,
    b_constant,
    block_exponent,
    kernel_from_params,
    modulate,
    sample_kernel,
    sampled_b_constant,
    sampled_block_norms,
)

PS = ["1", "4/3", "3/2", "2", "3", "inf"]


def quad_b_constant(density, s, U):
    """Σ_u (∫_u^{u+1} |K|^s)^{1/s} by adaptive quadrature (independent of the midpoint code)."""
    total = 0.0
    for u in range(-U, U):
        val, _ = integrate.quad(lambda y: abs(density(y)) ** s, u, u + 1, epsabs=1e-14, epsrel=1e-13)
        total += val ** (1 / s)
    return total


def test_cube_samples(grid64):
    K = sample_kernel(CUBE_INDICATOR(1), grid64)
    x = grid64.axis()
    assert np.array_equal(K.values.real, ((x >= 0) & (x < 1)).astype(float))


@pytest.mark.parametrize("sigma", [0.1, 0.25, 0.5])
def test_gaussian_sample_mass(grid64, sigma):
    K = sample_kernel(GAUSSIAN(sigma), grid64)
    assert lp_norm(K, 1) == pytest.approx(1.0, abs=1e-10)


def test_gaussian_wide_rejected():
    with pytest.raises(KernelError, match="mass"):
        sample_kernel(GAUSSIAN(3.0), TorusGrid(1, 2, 16))


def test_bump_support(grid64):
    K = sample_kernel(BUMP(1.0), grid64)
    x = grid64.axis()
    dist = np.minimum(x, 4 - x)
    assert np.all(K.values[dist >= 1] == 0)
    assert np.all(K.values.real[dist < 0.99] > 0)
    with pytest.raises(KernelError):
        sample_kernel(BUMP(3.0), grid64)


@pytest.mark.parametrize("p", PS)
def test_cube_b_constants_exact(p):
    assert b_constant(CUBE_INDICATOR(1), Exponent.of(p), 3).value == 1.0
    assert b_constant(CUBE_INDICATOR(2), Exponent.of(p), 3).value == 2.0


def test_block_exponent():
    assert block_exponent(Exponent.of("3/2")) == Exponent(3)
    assert block_exponent(Exponent(1)).infinite
    assert block_exponent(Exponent(2)) == Exponent(2)
    assert block_exponent(Exponent(7)) == Exponent(2)


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.0])
def test_gaussian_b2_quad_oracle(sigma):
    dens = lambda y: math.exp(-0.5 * (y / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    got = b_constant(GAUSSIAN(sigma), Exponent(2), 10).value
    assert got == pytest.approx(quad_b_constant(dens, 2, 10), abs=1e-6)


def test_gaussian_b2_erf_oracle():
    # |K|^2 is again Gaussian: ∫_u^{u+1} K^2 = (erf((u+1)/σ) - erf(u/σ)) / (4 σ sqrt(pi))
    s = 1.0
    want = sum(
        math.sqrt((special.erf((u + 1) / s) - special.erf(u / s)) / (4 * s * math.sqrt(math.pi)))
        for u in range(-10, 10)
    )
    assert b_constant(GAUSSIAN(s), Exponent(2), 10).value == pytest.approx(want, abs=1e-8)  # midpoint rule at 2^12 per cell


def test_bump_b_quad_oracle():
    spec = BUMP(1.5, order=3)
    dens = lambda y: (1 - (y / 1.5) ** 2) ** 3 if abs(y) < 1.5 else 0.0
    got = b_constant(spec, Exponent.of("4/3"), 4).value  # exponent p' = 4
    assert got == pytest.approx(quad_b_constant(dens, 4, 4), abs=1e-6)


@pytest.mark.parametrize("spec", [GAUSSIAN(1.0), BUMP(1.0), BUMP(2.0, 2), POWER_TAIL(3)])
def test_partial_sums_monotone_and_tails(spec):
    vals = [b_constant(spec, Exponent(2), U) for U in range(1, 11)]
    assert all(a.value <= b.value for a, b in zip(vals, vals[1:]))
    if spec.kind in {"gaussian", "bump"}:
        assert vals[-1].last_shell < 1e-12


def test_single_cube_kernel_equals_norm():
    spec = CUBE_INDICATOR("1/2")
    for p in ["3/2", "3"]:
        s = block_exponent(Exponent.of(p))
        assert b_constant(spec, Exponent.of(p), 2).value == pytest.approx(0.5 ** (1 / float(s)), rel=1e-12)


def test_power_tail_divergence():
    res = b_constant(POWER_TAIL(1), Exponent(2), 5)
    assert res.divergent and "value" not in res.as_dict()
    assert not b_constant(POWER_TAIL(2), Exponent(2), 5).divergent
    assert b_constant(POWER_TAIL(2), Exponent(2), 5, d=2).divergent


def test_b_constant_2d_separable():
    one = b_constant(GAUSSIAN(0.7), Exponent(2), 6).value
    two = b_constant(GAUSSIAN(0.7), Exponent(2), 6, d=2).value
    assert two == pytest.approx(one ** 2, rel=1e-12)


def test_modulation(grid64):
    K = sample_kernel(BUMP(1.0), grid64)
    assert np.array_equal(modulate(K, 0).values, K.values)
    for ell in (1, -3, 7):
        Kl = modulate(K, ell)
        assert np.allclose(np.abs(Kl.values), np.abs(K.values), rtol=1e-15, atol=0)
        for p in ["3/2", "4"]:
            assert sampled_b_constant(Kl, Exponent.of(p)) == pytest.approx(sampled_b_constant(K, Exponent.of(p)), rel=1e-13)
    with pytest.raises(ValueError):
        modulate(K, 0.5)


def test_sampled_block_norms_cube(grid64):
    K = sample_kernel(CUBE_INDICATOR(2), grid64)
    assert np.allclose(sampled_block_norms(K, 2), [1, 1, 0, 0])


def test_kernel_from_params():
    assert kernel_from_params("cube", {"a": "2"}) == CUBE_INDICATOR(2)
    assert kernel_from_params("gaussian", {"sigma": "0.5"}) == GAUSSIAN(0.5)
    assert kernel_from_params("bump", {"radius": "1", "order": "inf"}) == BUMP(1.0)
    with pytest.raises(KernelError):
        kernel_from_params("sinc", {})
