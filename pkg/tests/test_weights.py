import functools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from primevar.errors import DomainError
from primevar.weights import (check_weight, constants, get_weight, mellin, mellin_bound_constant,
                              mellin_by_parts, preset_weights, sector_constant)

# frozen from the sigma-grid quadrature (step 0.05)
B_ETA1 = 12.901692115536736
B_ETA2 = 4.939314032999323
B_BUMP = 33.840673734806835


def gamma(s):
    return complex(mpmath.gamma(s))


def test_presets_values():
    names = [w.name for w in preset_weights()]
    assert names == ["exp_linear", "gauss_quadratic", "bump"]
    assert get_weight("exp_linear").at_one == pytest.approx(math.exp(-1), rel=1e-15)
    assert get_weight("gauss_quadratic").at_one == pytest.approx(math.exp(-1), rel=1e-15)
    b = get_weight("bump")
    assert b.at_one == pytest.approx(1.0, abs=1e-15)
    t = np.array([0.1, 0.3, 0.5, 2.0, 2.5, 10.0])
    assert np.all(b(t) == 0.0)


def test_unknown_weight():
    with pytest.raises(DomainError):
        get_weight("nope")


@pytest.mark.parametrize("w", preset_weights(), ids=lambda w: w.name)
def test_invariants(w):
    info = check_weight(w)
    assert info["K"] < 100 and info["eta_one"] > 0


@pytest.mark.parametrize("w", preset_weights(), ids=lambda w: w.name)
def test_derivatives_match_finite_differences(w):
    t = np.linspace(0.6, 1.9, 27)
    h = 1e-5
    fd1 = (w(t + h) - w(t - h)) / (2 * h)
    fd2 = (w(t + h) - 2 * w(t) + w(t - h)) / h**2
    np.testing.assert_allclose(w.d1(t), fd1, atol=1e-8)
    np.testing.assert_allclose(w.d2(t), fd2, atol=1e-4)


@pytest.mark.parametrize("s", [1.0, 0.0, 2.0, 0.5 + 14.134725j, -0.5 + 3j, 1.5 - 40j, -0.9, 0.3 + 50j])
def test_mellin_gamma_oracle(eta1, s):
    assert mellin(eta1, s) == pytest.approx(gamma(s + 1), rel=1e-10)


@pytest.mark.parametrize("s", [0.5 + 2j, 1.0, -0.25 + 10j, 2 - 30j])
def test_mellin_eta2_oracle(eta2, s):
    # int t^2 e^{-t^2} t^{s-1} dt = Gamma((s + 2)/2) / 2
    assert mellin(eta2, s) == pytest.approx(gamma((s + 2) / 2) / 2, rel=1e-10)


def test_mellin_domain(eta1):
    with pytest.raises(DomainError):
        mellin(eta1, -1.0)
    with pytest.raises(DomainError):
        mellin(eta1, -1.5 + 2j)


def test_by_parts_examples(eta1):
    assert mellin_by_parts(eta1, 1.0) == pytest.approx(1.0, rel=1e-10)
    assert mellin_by_parts(eta1, 2.0) == pytest.approx(2.0, rel=1e-10)
    s = 0.5 + 1j
    assert mellin_by_parts(eta1, s) == pytest.approx(mellin(eta1, s), rel=1e-7)
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            mellin_by_parts(eta1, bad)


def test_bump_against_direct_quadrature(bump):
    for s in (0.5 + 3j, 1.0, 2 + 0.5j):
        re = quad(lambda t: float(bump(np.array([t]))[0]) * (t ** (s - 1)).real, 0.5, 2, epsabs=0, epsrel=1e-12, limit=200)[0]
        im = quad(lambda t: float(bump(np.array([t]))[0]) * (t ** (s - 1)).imag, 0.5, 2, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert mellin(bump, s) == pytest.approx(complex(re, im), rel=1e-9, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 2.0), st.floats(-60.0, 60.0), st.sampled_from(["exp_linear", "gauss_quadratic", "bump"]))
def test_by_parts_agrees(sigma, tau, name):
    s = complex(sigma, tau)
    if abs(s) < 0.1:
        return
    w = get_weight(name)
    a, b = mellin(w, s), mellin_by_parts(w, s)
    assert abs(a - b) <= 1e-7 * abs(a) + 1e-15


@pytest.mark.parametrize("w,B", [("exp_linear", B_ETA1), ("gauss_quadratic", B_ETA2), ("bump", B_BUMP)])
def test_bound_constant_regression(w, B):
    val, sigma, grid = mellin_bound_constant(get_weight(w))
    assert val == pytest.approx(B, rel=1e-9)
    assert sigma == pytest.approx(2.0)
    assert len(grid) == 51


def test_b_eta1_independent():
    # max over the grid of int |t - 2| e^{-t} t^{sigma + 1} dt, in mpmath
    def f(sg):
        g = lambda t: abs(t - 2) * mpmath.exp(-t) * t ** (sg + 1)
        return mpmath.quad(g, [0, 2, mpmath.inf])
    best = max(f(sg) for sg in np.arange(-0.5, 2.0001, 0.05))
    assert float(best) == pytest.approx(B_ETA1, rel=1e-9)


def test_constants_eta1(eta1):
    c = constants(eta1, c_abs=1.0)
    assert c.H_eta == c.B_eta
    assert c.C_eta == math.log(math.floor(16 * math.pi**2 * B_ETA1 / math.exp(-1)) + 1)
    assert c.C_eta == pytest.approx(8.619569258033104, rel=1e-14)
    assert c.D_eta == 5120
    with pytest.raises(DomainError):
        constants(eta1, c_abs=0)


def test_scaling_doubles_b(eta1):
    assert mellin_bound_constant(eta1.scaled(2.0))[0] == pytest.approx(2 * B_ETA1, rel=1e-12)


@pytest.mark.parametrize("w", preset_weights(), ids=lambda w: w.name)
def test_majorant_on_grid(w):
    B = mellin_bound_constant(w)[0]
    for sg in (-0.5, 0.0, 0.5, 1.0, 2.0):
        for tau in (0.1, 1.0, 7.0, 30.0, 99.0):
            s = complex(sg, tau)
            assert abs(mellin(w, s)) <= B / abs(s) ** 2 + 1e-9


@pytest.mark.parametrize("sg", [-0.9, -0.5, 0.0, 0.7, 2.9])
@pytest.mark.parametrize("w", preset_weights(), ids=lambda w: w.name)
def test_real_axis_positive(w, sg):
    v = mellin(w, sg)
    assert v.real > 0 and abs(v.imag) < 1e-12 * v.real


@functools.lru_cache(maxsize=None)
def _inversion_nodes(name, a, T=40.0, pieces=16, order=20):
    """Gauss-Legendre nodes on [0, T] and the Mellin transform on a + iv there."""
    w = get_weight(name)
    u, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, T, pieces + 1)
    v = np.concatenate([0.5 * (hi - lo) * u + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (hi - lo) * wt for lo, hi in zip(edges[:-1], edges[1:])])
    return v, weights, np.array([mellin(w, complex(a, t)) for t in v])


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("name", ["exp_linear", "gauss_quadratic"])
def test_mellin_inversion(name, a, x):
    v, wt, m = _inversion_nodes(name, a)
    # real weight: the integrand over v < 0 is the conjugate of that over v > 0
    total = 2 * np.dot(wt, m * x ** (-a - 1j * v)).real
    w = get_weight(name)
    assert total / (2 * math.pi) == pytest.approx(float(w(np.array([x]))[0]), abs=1e-6)


def test_sector_majorant(eta1):
    A = sector_constant(eta1, 0.5, 1.4)
    for tau in (5.0, 20.0, 60.0):
        assert abs(mellin(eta1, 0.5 + 1j * tau)) <= A * math.exp(-1.4 * tau)
