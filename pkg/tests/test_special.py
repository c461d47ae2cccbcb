import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special as sp

from bianchi_modsym.special import (
    DomainError, SERIES_CUTOFF, bessel_K0, bessel_K1, bessel_k01, gamma_real, tail_integral)
from bianchi_modsym.verify import bessel_quadrature, tail_integral_quadrature

GRID = np.logspace(-4, 2, 400)


def test_against_scipy_on_the_acceptance_range():
    k0, k1 = bessel_k01(GRID)
    assert np.max(np.abs(k0 / sp.k0(GRID) - 1)) <= 1e-10
    assert np.max(np.abs(k1 / sp.k1(GRID) - 1)) <= 1e-10


def test_large_arguments_and_underflow():
    x = np.linspace(100, 700, 61)
    k0, k1 = bessel_k01(x)
    assert np.max(np.abs(k0 / sp.k0(x) - 1)) <= 1e-12
    assert np.max(np.abs(k1 / sp.k1(x) - 1)) <= 1e-12
    assert bessel_k01(800.0) == (0.0, 0.0)


@pytest.mark.parametrize("x", [1e-4, 0.01, 0.5, 2.0, 7.3, 42.0, 100.0])
def test_against_integral_representation(x):
    k0, k1 = bessel_quadrature(x)
    assert bessel_K0(x) == pytest.approx(k0, rel=1e-10)
    assert bessel_K1(x) == pytest.approx(k1, rel=1e-10)


@given(st.floats(1e-3, 300))
def test_wronskian(x):
    # I0 K1 + I1 K0 = 1/x, with exponentially scaled I to stay finite
    k0, k1 = bessel_k01(x)
    lhs = (sp.i0e(x) * k1 + sp.i1e(x) * k0) * math.exp(x)
    assert lhs == pytest.approx(1 / x, rel=1e-12)


def test_branches_join_continuously():
    eps = 1e-9
    lo = np.array(bessel_k01(SERIES_CUTOFF - eps))
    hi = np.array(bessel_k01(SERIES_CUTOFF + eps))
    assert np.allclose(lo, hi, rtol=1e-9)


def test_recurrence_derivative():
    # K0' = -K1, checked by central differences
    x, h = 3.7, 1e-5
    d = (bessel_K0(x + h) - bessel_K0(x - h)) / (2 * h)
    assert d == pytest.approx(-bessel_K1(x), rel=1e-8)


def test_scalar_and_array_shapes():
    assert isinstance(bessel_K0(1.0), float)
    out = bessel_K1(np.array([[0.5, 1.0], [2.0, 3.0]]))
    assert out.shape == (2, 2)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_k01(bad)
    with pytest.raises(DomainError):
        tail_integral(bad, 1.0)


@pytest.mark.parametrize("a,Y", [(1.0, 1.0), (4.44, 0.05), (0.3, 12.0), (20.0, 0.9), (2.0, 1e-3)])
def test_tail_integral_closed_form(a, Y):
    assert tail_integral(a, Y) == pytest.approx(tail_integral_quadrature(a, Y), rel=1e-10)
    direct, _ = integrate.quad(lambda y: y * sp.k0(a * y), Y, np.inf, epsrel=1e-12, limit=200)
    assert tail_integral(a, Y) == pytest.approx(direct, rel=1e-9)


@given(st.floats(0.1, 30), st.floats(0.01, 5))
def test_tail_integral_scaling(a, Y):
    # substituting y -> t y: the integral at (a / t, t Y) is t^2 times the one at (a, Y)
    t = 1.7
    assert tail_integral(a / t, t * Y) == pytest.approx(t * t * tail_integral(a, Y), rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.8, 2.2, 3.0, -0.5])
def test_gamma_real(s):
    assert gamma_real(s) == pytest.approx(float(sp.gamma(s)), rel=1e-14)


def test_gamma_poles():
    with pytest.raises(DomainError):
        gamma_real(0.0)
    with pytest.raises(DomainError):
        gamma_real(-2.0)
