import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckextend import mollifier
from ckextend.mollifier import DomainError
from ckextend.mspline import MSpline, affine_pullback, mspline_deriv, mspline_eval, mspline_sup_deriv

PHI0 = math.exp(-1) / mollifier.phi_table().C
RAMP = MSpline(0.0, 0.0, 1.0, 1.0)


def test_affine_pullback():
    assert affine_pullback(0, 1, 0.5) == 0.0
    assert affine_pullback(0, 1, 0) == -1.0
    assert affine_pullback(2, 6, 5) == 0.5
    with pytest.raises(ValueError):
        affine_pullback(1, 1, 1)


def test_eval_examples():
    assert mspline_eval(RAMP, 0.5) == 0.5
    assert mspline_eval(RAMP, 0.0) == 0.0
    assert mspline_eval(RAMP, 1.0) == 1.0
    assert mspline_eval(MSpline(0, 2, 2, 1), 1) == pytest.approx(1.5, abs=1e-15)


def test_endpoints_hit_exactly():
    s = MSpline(0.1, 3e-7, 0.7, 2e-9)
    assert s(0.1) == 3e-7
    assert s(0.7) == 2e-9


def test_outside_raises():
    with pytest.raises(DomainError):
        RAMP(1.5)


def test_deriv_examples():
    assert mspline_deriv(1, RAMP, 0.0) == 0.0
    assert mspline_deriv(1, RAMP, 1.0) == 0.0
    assert mspline_deriv(1, RAMP, 0.5) == pytest.approx(2 * PHI0, rel=1e-12)
    assert mspline_deriv(2, RAMP, 0.5) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("i", range(1, 9))
def test_flat_at_endpoints(i):
    s = MSpline(-2.0, 5.0, 3.0, -1.0)
    assert s.deriv(i, -2.0) == 0.0
    assert s.deriv(i, 3.0) == 0.0


def test_constant_spline():
    s = MSpline(0, 4.0, 1, 4.0)
    assert np.all(s(np.linspace(0, 1, 11)) == 4.0)
    assert s.deriv(3, 0.4) == 0.0


def test_sup_deriv_examples():
    M1 = mollifier.sup_phi_big_deriv(1)
    assert mspline_sup_deriv(0, 0.3, 0.9) == 1.0
    assert mspline_sup_deriv(1, 0, 0.25) == pytest.approx(8 * M1, rel=1e-12)
    assert mspline_sup_deriv(1, 0, 0.25) == pytest.approx(6.6287, abs=2e-4)
    assert mspline_sup_deriv(1, 0, 2) == pytest.approx(0.8286, abs=1e-4)


def test_derivative_matches_finite_difference():
    s = MSpline(0.2, 1.0, 0.9, 3.0)
    x, h = 0.47, 1e-6
    for i in range(1, 4):
        fd = (s.deriv(i - 1, x + h) - s.deriv(i - 1, x - h)) / (2 * h) if i > 1 else (s(x + h) - s(x - h)) / (2 * h)
        assert s.deriv(i, x) == pytest.approx(fd, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 4), st.floats(-3, 3), st.floats(0.01, 0.99), st.floats(-10, 10))
def test_shift_invariance(a, width, b, frac, shift):
    c, d = a + width, b + 1.0
    x = a + frac * width
    base = MSpline(a, b, c, d)
    moved = MSpline(a + shift, b, c + shift, d)
    assert moved(x + shift) == pytest.approx(base(x), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.floats(0.25, 4), st.floats(0.05, 0.95))
def test_scaling_law(i, lam, frac):
    base = MSpline(0.0, 0.0, 1.0, 1.0)
    scaled = MSpline(0.0, 0.0, lam, 1.0)
    assert scaled.deriv(i, lam * frac) == pytest.approx(base.deriv(i, frac) * lam**-i, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 1))
def test_values_between_endpoint_values(b, d, frac):
    s = MSpline(1.0, b, 2.0, d)
    v = s(1.0 + frac)
    assert min(b, d) - 1e-12 <= v <= max(b, d) + 1e-12
