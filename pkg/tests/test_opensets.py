import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ckextend.opensets import (
    DepthExceeded,
    KnotLadder,
    OpenSet,
    ValidationError,
    complement_interior,
    densify,
    knots,
    locate,
    normalize,
)

INF = math.inf


def test_normalize_examples():
    assert normalize([[0, 2], [1, 3]]).components == ((0, 3),)
    assert normalize([[0, 1], [1, 2]]).components == ((0, 1), (1, 2))
    assert normalize([["-inf", 0], [5, "inf"]]).components == ((-INF, 0), (5, INF))


def test_normalize_rejects_bad_input():
    with pytest.raises(ValidationError):
        normalize([[2, 1]])
    with pytest.raises(ValidationError):
        normalize([[1, 1]])
    with pytest.raises(ValidationError):
        normalize([["x", 1]])
    with pytest.raises(ValidationError):
        normalize([[0, 1, 2]])


def test_densify_examples():
    assert densify(normalize([[0, 1]])).components == ((-INF, 0), (0, 1), (1, INF))
    assert densify(normalize([["-inf", "inf"]])).components == ((-INF, INF),)
    assert densify(normalize([[0, 1], [1, 2]])).components == ((-INF, 0), (0, 1), (1, 2), (2, INF))
    with pytest.raises(ValidationError):
        densify(OpenSet(()))


def test_complement_interior():
    assert complement_interior(normalize([[0, 1], [3, 4]])).components == ((-INF, 0), (1, 3), (4, INF))


def test_json_roundtrip():
    U = normalize([["-inf", 0], [2, 3]])
    assert normalize(U.to_json()) == U


def test_knot_examples():
    lad = KnotLadder(0.0, 1.0)
    assert [knots(lad, "right", n) for n in (1, 2, 3)] == [0.5, 0.75, 0.875]
    assert knots(lad, "left", 2) == 0.25
    half = KnotLadder(-INF, 3.0)
    assert half.effective_u == 2.0
    assert knots(half, "right", 1) == 2.5
    assert half.sides() == ["right"]


def test_knot_depth_limit():
    lad = KnotLadder(0.0, 1.0, max_depth=5)
    lad.knot("right", 6)
    with pytest.raises(DepthExceeded):
        lad.knot("right", 7)


def test_locate_examples():
    V = densify(normalize([[0, 1]]))
    loc = locate(V, 0.8)
    assert (V.components[loc.component], loc.side, loc.n) == ((0, 1), "right", 2)
    assert locate(V, 0.0) is None
    assert locate(V, 1.0) is None
    W = normalize([["-inf", 3]])
    assert locate(W, 0.0).side == "const"


def test_dyadic_knots_exact_to_depth_40():
    lad = KnotLadder(0.0, 1.0, max_depth=40)
    for n in range(1, 41):
        assert 1.0 - lad.knot("right", n) == 2.0**-n
        assert lad.knot("left", n) == 2.0**-n


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(1e-3, 50))
def test_knot_gaps_within_one_ulp(lo, width):
    hi = lo + width
    assume(lo < hi)
    lad = KnotLadder(lo, hi)
    for n in range(1, 42):
        err = abs((hi - lad.knot("right", n)) - lad.L / 2**n)
        assert err <= math.ulp(max(abs(hi), abs(lo))) * 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(0.01, 10)), min_size=1, max_size=6))
def test_densify_idempotent_and_dense(raw):
    U = normalize([[a, a + w] for a, w in raw])
    V = densify(U)
    assert densify(V) == V
    # the complement of V is the boundary of U
    gaps = complement_interior(V)
    assert gaps.is_empty
    for p in U.boundary():
        assert not V.contains(p)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0, exclude_min=True, exclude_max=True))
def test_locate_brackets_point(x):
    V = densify(normalize([[0, 1]]))
    loc = locate(V, x)
    lad = KnotLadder(0.0, 1.0)
    if loc.side == "right":
        lo = lad.knot("right", loc.n)
        hi = lad.knot("right", loc.n + 1) if loc.n <= lad.max_depth else 1.0
        assert lo <= x < hi
    else:
        lo = lad.knot("left", loc.n + 1) if loc.n <= lad.max_depth else 0.0
        hi = lad.knot("left", loc.n)
        assert lo <= x < hi
