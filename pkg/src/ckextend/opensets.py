"""Finite unions of open intervals and the geometric knot ladders on them."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

DEFAULT_MAX_DEPTH = 40

Side = Literal["left", "right"]


class ValidationError(ValueError):
    pass


class DepthExceeded(IndexError):
    """A knot index beyond the ladder's truncation depth was requested."""


def _parse_bound(value) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(text)
        except ValueError as exc:
            raise ValidationError(f"cannot parse interval bound {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"cannot parse interval bound {value!r}")
    return float(value)


@dataclass(frozen=True)
class OpenSet:
    """Sorted, pairwise disjoint open intervals; endpoints may be infinite."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev_hi = -math.inf
        for k, (lo, hi) in enumerate(self.components):
            if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                raise ValidationError(f"component {k} = ({lo}, {hi}) needs lo < hi")
            if k and lo < prev_hi:
                raise ValidationError("components must be sorted and disjoint")
            prev_hi = hi

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def is_empty(self) -> bool:
        return not self.components

    def boundary(self) -> list[float]:
        """Finite endpoints of the components, ascending, without duplicates."""
        points = sorted({p for comp in self.components for p in comp if math.isfinite(p)})
        return points

    def component_of(self, x: float) -> int | None:
        """Index of the component containing ``x``, or None."""
        los = [c[0] for c in self.components]
        k = bisect.bisect_right(los, x) - 1
        if k >= 0 and self.components[k][0] < x < self.components[k][1]:
            return k
        return None

    def contains(self, x: float) -> bool:
        return self.component_of(x) is not None

    def contains_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(xs.shape, dtype=bool)
        for lo, hi in self.components:
            out |= (xs > lo) & (xs < hi)
        return out

    def to_json(self) -> list[list]:
        def enc(v):
            if v == math.inf:
                return "inf"
            if v == -math.inf:
                return "-inf"
            return v
        return [[enc(lo), enc(hi)] for lo, hi in self.components]


def parse_intervals(raw: Iterable[Sequence]) -> list[tuple[float, float]]:
    """Parse ``[[lo, hi], ...]`` with ``"-inf"``/``"inf"`` sentinels."""
    out = []
    for k, item in enumerate(raw):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValidationError(f"interval {k}: expected [lo, hi], got {item!r}")
        lo, hi = _parse_bound(item[0]), _parse_bound(item[1])
        if not lo < hi:
            raise ValidationError(f"interval {k}: lo={lo} must be < hi={hi}")
        out.append((lo, hi))
    return out


def normalize(intervals: Iterable[Sequence]) -> OpenSet:
    """Merge raw open intervals into maximal disjoint sorted components.

    Overlapping intervals merge; intervals that only share an endpoint stay
    apart since the shared point is not in the union.
    """
    parsed = sorted(parse_intervals(intervals))
    merged: list[list[float]] = []
    for lo, hi in parsed:
        if merged and lo < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return OpenSet(tuple((lo, hi) for lo, hi in merged))


def complement_interior(U: OpenSet) -> OpenSet:
    gaps = []
    prev = -math.inf
    for lo, hi in U.components:
        if prev < lo:
            gaps.append((prev, lo))
        prev = hi
    if prev < math.inf:
        gaps.append((prev, math.inf))
    return OpenSet(tuple(gaps))


def densify(U: OpenSet) -> OpenSet:
    """``U`` together with the interior of its complement: a dense open set."""
    if U.is_empty:
        raise ValidationError("open set must be nonempty")
    return OpenSet(tuple(sorted(U.components + complement_interior(U).components)))


@dataclass(frozen=True)
class KnotLadder:
    """Geometric subdivision of one component.

    Right knots ``a_n = v - L/2^n`` climb toward the right end and left knots
    ``b_n = u + L/2^n`` descend toward the left end; ``a_1 = b_1`` is the
    midpoint. On a half-line the ladder lives on a unit interval next to the
    finite end and the far side is a constant stretch.
    """

    lo: float
    hi: float
    max_depth: int = DEFAULT_MAX_DEPTH
    effective_u: float = field(init=False)
    effective_v: float = field(init=False)
    L: float = field(init=False)
    _right: tuple = field(init=False, repr=False)
    _left: tuple = field(init=False, repr=False)

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if not lo < hi:
            raise ValidationError(f"ladder needs lo < hi, got ({lo}, {hi})")
        if self.max_depth < 2:
            raise ValidationError("max_depth must be at least 2")
        if math.isinf(lo) and math.isinf(hi):
            eu, ev, L = -0.5, 0.5, 1.0
        elif math.isinf(lo):
            eu, ev, L = hi - 1.0, hi, 1.0
        elif math.isinf(hi):
            eu, ev, L = lo, lo + 1.0, 1.0
        else:
            eu, ev, L = lo, hi, hi - lo
        object.__setattr__(self, "effective_u", eu)
        object.__setattr__(self, "effective_v", ev)
        object.__setattr__(self, "L", L)
        # index 0 unused; knots up to max_depth + 1 so every segment end exists
        depth = self.max_depth + 1
        right = [math.nan] + [ev - math.ldexp(L, -n) for n in range(1, depth + 1)]
        left = [math.nan] + [eu + math.ldexp(L, -n) for n in range(1, depth + 1)]
        object.__setattr__(self, "_right", tuple(right))
        object.__setattr__(self, "_left", tuple(left))

    @property
    def has_right(self) -> bool:
        return math.isfinite(self.hi)

    @property
    def has_left(self) -> bool:
        return math.isfinite(self.lo)

    @property
    def midpoint(self) -> float:
        return self._right[1]

    def sides(self) -> list[Side]:
        out: list[Side] = []
        if self.has_left:
            out.append("left")
        if self.has_right:
            out.append("right")
        return out

    def knot(self, side: Side, n: int) -> float:
        if n < 1:
            raise ValueError("knot index starts at 1")
        if n > self.max_depth + 1:
            raise DepthExceeded(f"knot {n} beyond depth {self.max_depth}")
        return self._right[n] if side == "right" else self._left[n]

    def boundary_point(self, side: Side) -> float:
        return self.effective_v if side == "right" else self.effective_u

    def segment(self, side: Side, n: int) -> tuple[float, float]:
        """``[a_n, a_{n+1}]`` (right) or ``[b_{n+1}, b_n]`` (left), ascending."""
        if side == "right":
            return self.knot("right", n), self.knot("right", n + 1)
        return self.knot("left", n + 1), self.knot("left", n)

    def span(self, side: Side, n: int) -> tuple[float, float]:
        """``[a_1, a_{n+1}]`` or ``[b_{n+1}, b_1]``: where depth-n constants take sups."""
        if side == "right":
            return self.midpoint, self.knot("right", n + 1)
        return self.knot("left", n + 1), self.midpoint


def knots(ladder: KnotLadder, side: Side, n: int) -> float:
    return ladder.knot(side, n)


@dataclass(frozen=True)
class Location:
    """Where a point sits: component index, ladder side and segment index.

    ``side`` is ``"const"`` on the constant stretch of a half-line (or of the
    whole line). ``n == max_depth + 1`` means past the last spline segment.
    """

    component: int
    side: Literal["left", "right", "const"]
    n: int


def locate_in_ladder(ladder: KnotLadder, x: float) -> tuple[str, int]:
    """Side and segment index of ``x`` within its component.

    Index ``max_depth + 1`` marks the truncated zone next to the boundary.
    """
    cap = ladder.max_depth + 1
    if x >= ladder.midpoint:
        if not ladder.has_right:
            return "const", 0
        dist = ladder.effective_v - x
        n = cap if dist <= 0 else max(1, min(cap, int(math.floor(math.log2(ladder.L) - math.log2(dist)))))
        # want a_n <= x < a_{n+1}
        while n < cap and ladder.knot("right", n + 1) <= x:
            n += 1
        while n > 1 and ladder.knot("right", n) > x:
            n -= 1
        return "right", n
    if not ladder.has_left:
        return "const", 0
    dist = x - ladder.effective_u
    n = cap if dist <= 0 else max(1, min(cap, int(math.ceil(math.log2(ladder.L) - math.log2(dist))) - 1))
    # want b_{n+1} <= x < b_n
    while n > 1 and ladder.knot("left", n) <= x:
        n -= 1
    while n < cap and ladder.knot("left", n + 1) > x:
        n += 1
    return "left", n


def locate(V: OpenSet, x: float, ladders: Sequence[KnotLadder] | None = None,
           max_depth: int = DEFAULT_MAX_DEPTH) -> Location | None:
    """Locate ``x`` in ``V``; None when ``x`` is outside (including boundary points)."""
    if not math.isfinite(x):
        raise ValidationError("locate needs a finite point")
    m = V.component_of(x)
    if m is None:
        return None
    ladder = ladders[m] if ladders is not None else KnotLadder(*V.components[m], max_depth=max_depth)
    side, n = locate_in_ladder(ladder, x)
    return Location(m, side, n)
