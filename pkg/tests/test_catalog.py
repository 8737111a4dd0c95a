import math

import numpy as np
import pytest

from ckextend.catalog import CATALOG, OrderExceeded, make_oracle
from ckextend.opensets import ValidationError, normalize

UNIT = normalize([[0, 1]])

ENTRIES = [
    ("constant", {"c": 2.5}, [[0, 1]]),
    ("polynomial", {"coeffs": [1, -2, 0, 3]}, [[-1, 2]]),
    ("reciprocal", {}, [[0.2, 1]]),
    ("reciprocal_power", {"m": 3}, [[0.5, 2]]),
    ("sin_reciprocal", {}, [[0.3, 1]]),
    ("exp", {"rate": -1.5}, [[-1, 1]]),
    ("log", {}, [[0.5, 3]]),
    ("ck_only", {"k": 6}, [[0, 1]]),
]


def test_examples():
    r = make_oracle("reciprocal", {}, UNIT)
    assert r.deriv(2, 0.5) == 16.0
    c = make_oracle("constant", {"c": 1.0}, UNIT)
    assert all(c.deriv(i, 0.3) == 0.0 for i in range(1, 6))
    s = make_oracle("sin_reciprocal", {}, UNIT)
    assert s.deriv(1, 1 / math.pi) == pytest.approx(math.pi**2, rel=1e-12)


def test_ck_only_order_limit():
    f = make_oracle("ck_only", {"k": 2}, UNIT)
    assert f.k == 2
    f.deriv(2, 0.3)
    with pytest.raises(OrderExceeded):
        f.deriv(3, 0.3)


def test_invalid_entries():
    with pytest.raises(ValidationError):
        make_oracle("nope", {}, UNIT)
    with pytest.raises(ValidationError):
        make_oracle("reciprocal", {}, normalize([[-1, 1]]))
    with pytest.raises(ValidationError):
        make_oracle("log", {}, normalize([[-2, -1]]))
    with pytest.raises(ValidationError):
        make_oracle("polynomial", {}, UNIT)


def test_vectorized_matches_scalar():
    f = make_oracle("sin_reciprocal", {}, UNIT)
    xs = np.linspace(0.2, 0.9, 7)
    assert np.array_equal(f.deriv(3, xs), np.array([f.deriv(3, x) for x in xs]))


def test_catalog_covered():
    assert {e[0] for e in ENTRIES} | {"indicator_smooth"} == set(CATALOG)


@pytest.mark.parametrize("fid,params,dom", ENTRIES, ids=[e[0] for e in ENTRIES])
def test_fd_consistency(fid, params, dom):
    f = make_oracle(fid, params, normalize(dom))
    lo, hi = f.domain.components[0]
    pad = 0.05 * (hi - lo)
    xs = np.linspace(lo + pad, hi - pad, 20)
    for i in range(1, 5):
        h = 1e-5 * (hi - lo)
        for x in xs:
            fd = (f.deriv(i - 1, x + h) - f.deriv(i - 1, x - h)) / (2 * h)
            exact = f.deriv(i, x)
            assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6 * max(1.0, abs(f.deriv(i - 1, x))))


def test_sin_reciprocal_against_closed_form():
    f = make_oracle("sin_reciprocal", {}, UNIT)
    x = 0.37
    y = 1 / x
    d2 = 2 * math.cos(y) / x**3 - math.sin(y) / x**4
    assert f.deriv(2, x) == pytest.approx(d2, rel=1e-12)
