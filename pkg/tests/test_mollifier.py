import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ckextend import mollifier as m
from ckextend._search import argmax_refine

C_ORACLE = integrate.quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1, 1, epsabs=1e-14, epsrel=1e-14)[0]


def test_sigma_examples():
    assert m.sigma(0.0) == pytest.approx(0.3678794412, abs=1e-10)
    assert m.sigma(1.0) == 0.0
    assert m.sigma(-1.0) == 0.0
    assert m.sigma(0.5) == pytest.approx(math.exp(-4 / 3), rel=1e-14)
    assert m.sigma(0.5) == pytest.approx(0.2635971, abs=1e-7)


def test_sigma_underflows_quietly_near_edge():
    xs = 1.0 - np.logspace(-1, -17, 60)
    vals = m.sigma(xs)
    assert np.all(np.isfinite(vals))
    assert np.all(np.diff(vals) <= 0)


def test_sigma_rejects_nonfinite():
    with pytest.raises(m.DomainError):
        m.sigma(math.nan)
    with pytest.raises(m.DomainError):
        m.sigma_deriv(2, math.inf)


def test_sigma_deriv_examples():
    assert m.sigma_deriv(0, 0.0) == m.sigma(0.0)
    assert m.sigma_deriv(1, 0.0) == pytest.approx(0.0, abs=1e-16)
    h = 1e-5
    fd = (m.sigma_deriv(2, 0.9 + h) - m.sigma_deriv(2, 0.9 - h)) / (2 * h)
    assert m.sigma_deriv(3, 0.9) == pytest.approx(fd, rel=1e-4)
    for i in range(6):
        assert m.sigma_deriv(i, 1.0) == 0.0
        assert m.sigma_deriv(i, -1.0) == 0.0


@pytest.mark.parametrize("i", range(6))
@pytest.mark.parametrize("x", [0.0, 0.3, -0.55, 0.8])
def test_sigma_deriv_against_symbolic(i, x):
    t = sympy.Symbol("t")
    expr = sympy.diff(sympy.exp(-1 / (1 - t**2)), t, i)
    expected = float(expr.subs(t, sympy.Rational(str(x))).evalf(30))
    assert m.sigma_deriv(i, x) == pytest.approx(expected, rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("i", [8, 16, 24, 32])
@pytest.mark.parametrize("x", [0.1, 0.7, -0.95, 0.99])
def test_high_order_against_mpmath(i, x):
    mpmath.mp.dps = 60
    expected = mpmath.diff(lambda t: mpmath.exp(-1 / (1 - t * t)), mpmath.mpf(x), i)
    assert m.sigma_deriv(i, x) == pytest.approx(float(expected), rel=1e-9)


@pytest.mark.parametrize("i", [1, 4, 9])
def test_exact_recurrence_matches_float_path(i):
    r = m.rational_exp_derivative(i)
    for x in (0.2, -0.6, 0.93):
        assert r.evaluate(x) == pytest.approx(m.sigma_deriv(i, x), rel=1e-10)


def test_recurrence_degree_grows():
    degs = [len(m.rational_exp_derivative(i).numerator) for i in range(1, 6)]
    assert degs == sorted(degs)


def test_normalization_constant():
    C = m.normalization_constant()
    assert C == pytest.approx(0.4439938, abs=1e-7)
    assert C == pytest.approx(C_ORACLE, abs=1e-8)
    table_total = m.phi_table().C
    assert C == pytest.approx(table_total, abs=1e-8)


def test_phi_integrates_to_one():
    total = integrate.quad(m.phi, -1, 1, epsabs=1e-13)[0]
    assert total == pytest.approx(1.0, abs=1e-10)


def test_sigma_halves_agree():
    left = m.adaptive_simpson(m.sigma, -1.0, 0.0)
    right = m.adaptive_simpson(m.sigma, 0.0, 1.0)
    assert left == pytest.approx(right, abs=1e-13)


def test_phi_big_examples():
    assert m.phi_big(-1.0) == 0.0
    assert m.phi_big(-3.0) == 0.0
    assert m.phi_big(0.0) == 0.5
    assert m.phi_big(1.0) == 1.0
    assert m.phi_big(7.0) == 1.0


@pytest.mark.parametrize("x", [-0.9, -0.4, 0.1234, 0.77])
def test_phi_big_against_quad(x):
    expected = integrate.quad(m.sigma, -1, x, epsabs=1e-14)[0] / C_ORACLE
    assert m.phi_big(x) == pytest.approx(expected, abs=1e-11)


def test_phi_big_deriv_examples():
    phi0 = math.exp(-1) / C_ORACLE
    assert m.phi_big_deriv(1, 0.0) == pytest.approx(phi0, rel=1e-9)
    assert m.phi_big_deriv(5, 1.0) == 0.0
    assert m.phi_big_deriv(2, 0.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        m.phi_big_deriv(0, 0.3)


def test_sup_phi_big_deriv():
    assert m.sup_phi_big_deriv(0) == 1.0
    phi0 = math.exp(-1) / C_ORACLE
    assert m.sup_phi_big_deriv(1) == pytest.approx(phi0, rel=1e-8)
    assert m.sup_phi_big_deriv(1) >= m.phi_big_deriv(1, 0.0)


@pytest.mark.parametrize("i", [2, 3, 5])
def test_sup_two_resolutions(i):
    fn = lambda t: np.abs(m.phi_big_deriv(i, t))
    coarse = argmax_refine(fn, np.linspace(-1, 1, 10_001))
    fine = argmax_refine(fn, np.linspace(-1, 1, 100_001))
    assert coarse == pytest.approx(fine, rel=1e-6)
    M = m.sup_phi_big_deriv(i)
    assert fine <= M <= 1.05 * fine


def test_fd_of_phi_big_at_zero():
    h = 1e-4
    fd = (m.phi_big(h) - m.phi_big(-h)) / (2 * h)
    assert fd == pytest.approx(math.exp(-1) / C_ORACLE, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.5, 1.5))
def test_symmetry(x):
    assert m.sigma(-x) == pytest.approx(m.sigma(x), abs=1e-10)
    assert m.phi_big(x) + m.phi_big(-x) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_phi_big_monotone_and_bounded(x, y):
    lo, hi = min(x, y), max(x, y)
    a, b = m.phi_big(lo), m.phi_big(hi)
    assert 0.0 <= a <= b <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.floats(-0.85, 0.85))
def test_fd_convergence(i, x):
    # central FD of Phi^(i) approaches Phi^(i+1) at second order
    errs = []
    for h in (1e-2, 5e-3):
        fd = (m.phi_big_deriv(i, x + h) - m.phi_big_deriv(i, x - h)) / (2 * h)
        errs.append(abs(fd - m.phi_big_deriv(i + 1, x)))
    scale = max(1.0, abs(m.phi_big_deriv(i + 1, x)))
    assert errs[1] <= 0.3 * errs[0] + 1e-9 * scale
