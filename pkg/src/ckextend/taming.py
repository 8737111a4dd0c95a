"""Taming constants: derivative sups of f and of the splines, their products, knot values.

For a ladder side and depth ``n``:

* ``A[n, i] = 1 + sup |f^(i)|`` over ``[a_1, a_{n+1}]``; with finite ``k`` the
  order is clamped to ``k`` (and always to ``max_order``).
* ``B[n, i] = 1 + max_{j <= n} sup |Phi_{a_j, a_{j+1}}^(i)|``.
* ``S[n]`` multiplies ``A[n, i]`` and ``B[n, i]`` over ``i = 0..n`` (intervals
  of length >= 1) or over ``i = 0..max(n, p)`` with ``p = floor(1/L)``
  (shorter intervals).
* the knot value is ``g(a_l) = L^2 / (2^(2l+1) S[l])``.

The products overflow quickly, so ``S`` is carried as a logarithm; once a knot
value underflows to 0 every deeper one does too, and those depths are not
evaluated.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ckextend import mollifier
from ckextend._search import argmax_refine
from ckextend.catalog import FunctionOracle
from ckextend.opensets import KnotLadder, Side

SUP_GRID_POINTS = 2**12
SUP_SAFETY = 1.05
LN2 = math.log(2.0)


class ConstructionError(RuntimeError):
    """The function could not be evaluated where the construction needs it."""


def derivative_sup(f: FunctionOracle, i: int, lo: float, hi: float) -> float:
    """Upper bound on ``sup |f^(i)|`` over ``[lo, hi]``.

    Dense grid of 4096 points and zoom refinement around the grid
    argmax; the result is padded by 5% of the sampled range, so it never
    exceeds 1.05 times the sup and is exact for constants. Overflow near a
    singularity returns inf.
    """
    if not lo <= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    m = f.domain.component_of(0.5 * (lo + hi)) if hi > lo else f.domain.component_of(lo)
    if m is None or not (f.domain.components[m][0] < lo and hi < f.domain.components[m][1]):
        raise ConstructionError(f"[{lo}, {hi}] is not inside the domain of {f.id}")
    grid = np.linspace(lo, hi, SUP_GRID_POINTS) if hi > lo else np.array([lo])
    with np.errstate(invalid="ignore"):
        values = np.abs(f.deriv(i, grid))
    if np.any(np.isnan(values)):
        raise ConstructionError(f"{f.id}^({i}) is not finite on [{lo}, {hi}]")
    best = argmax_refine(lambda t: np.abs(f.deriv(i, t)), grid)
    if math.isinf(best):
        return best
    return best + (SUP_SAFETY - 1.0) * (best - float(values.min()))


def case_and_threshold(L: float, bounded: bool) -> tuple[str, int | None]:
    """Case ``"A"`` for ``L >= 1`` or half-lines; else ``"B"`` with ``p = floor(1/L)``."""
    if not bounded or L >= 1.0:
        return "A", None
    return "B", int(math.floor(1.0 / L))


def _log1p_exp(t: float) -> float:
    """``log(1 + e^t)`` without overflow."""
    if t > 30.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


@dataclass
class TamingConstants:
    """Memoized constants for one side of one component's ladder.

    ``floor_log_S`` lifts ``S[1]`` to the value shared with the other side of
    the same component so that ``g`` has one value at the midpoint.
    """

    ladder: KnotLadder
    side: Side
    f: FunctionOracle | None
    k: float = math.inf
    max_order: int = mollifier.MAX_ORDER
    floor_log_S: float = 0.0
    case: str = field(init=False)
    p: int | None = field(init=False)
    _A: dict = field(init=False, default_factory=dict, repr=False)
    _seg_sup: dict = field(init=False, default_factory=dict, repr=False)
    _log_S: dict = field(init=False, default_factory=dict, repr=False)
    _raw_log_S: dict = field(init=False, default_factory=dict, repr=False)
    _lock: threading.RLock = field(init=False, default_factory=threading.RLock, repr=False)

    def __post_init__(self):
        bounded = self.ladder.has_left and self.ladder.has_right
        self.case, self.p = case_and_threshold(self.ladder.L, bounded)

    @property
    def L(self) -> float:
        return self.ladder.L

    def order_range(self, n: int) -> int:
        """Highest ``i`` entering ``S[n]``."""
        if self.case == "B" and n <= self.p:
            return self.p
        return n

    def f_order(self, i: int) -> int:
        return int(min(i, self.k, self.max_order))

    def _segment_sup(self, n: int, order: int) -> float:
        key = (n, order)
        if key not in self._seg_sup:
            lo, hi = self.ladder.segment(self.side, n)
            self._seg_sup[key] = derivative_sup(self.f, order, lo, hi)
        return self._seg_sup[key]

    def A(self, n: int, i: int) -> float:
        """``1 + sup |f^(min(i, k))|`` over the depth-``n`` span, as a running max."""
        if n < 1:
            raise ValueError("depth starts at 1")
        if self.f is None:
            return 1.0
        order = self.f_order(i)
        with self._lock:
            key = (n, order)
            if key not in self._A:
                prev = self.A(n - 1, i) if n > 1 else 1.0
                self._A[key] = max(prev, 1.0 + self._segment_sup(n, order))
            return self._A[key]

    def log_B(self, n: int, i: int) -> float:
        if i == 0:
            return math.log(2.0)
        order = min(i, self.max_order)
        log_m = math.log(mollifier.sup_phi_big_deriv(order))
        best = -math.inf
        for j in range(1, n + 1):
            # segment j has length L / 2^(j+1)
            scale = (j + 2) * LN2 - math.log(self.L)
            best = max(best, order * scale + log_m)
        return _log1p_exp(best)

    def B(self, n: int, i: int) -> float:
        """``1 + max_j sup |Phi_{a_j, a_{j+1}}^(i)|``; may be inf past float range."""
        lb = self.log_B(n, i)
        return math.exp(lb) if lb < 709.0 else math.inf

    def raw_log_S(self, n: int) -> float:
        with self._lock:
            if n not in self._raw_log_S:
                total = 0.0
                for i in range(self.order_range(n) + 1):
                    a = self.A(n, i)
                    if math.isinf(a):
                        total = math.inf
                        break
                    total += math.log(a) + self.log_B(n, i)
                self._raw_log_S[n] = total
            return self._raw_log_S[n]

    def log_S(self, n: int) -> float:
        """``log S[n]``, non-decreasing in ``n``; inf once the knot value has underflowed."""
        if n < 1:
            raise ValueError("depth starts at 1")
        with self._lock:
            if n in self._log_S:
                return self._log_S[n]
            if n == 1:
                value = max(self.raw_log_S(1), self.floor_log_S)
            else:
                prev = self.log_S(n - 1)
                if math.isinf(prev) or self._knot_from_log(n - 1, prev) == 0.0:
                    value = math.inf
                else:
                    value = max(prev, self.raw_log_S(n))
            self._log_S[n] = value
            return value

    def S(self, n: int) -> float:
        ls = self.log_S(n)
        return math.exp(ls) if ls < 709.0 else math.inf

    def _knot_from_log(self, l: int, log_s: float) -> float:
        if math.isinf(log_s):
            return 0.0
        if log_s < 709.0:
            return self.L * self.L / (math.ldexp(1.0, 2 * l + 1) * math.exp(log_s))
        return math.exp(2.0 * math.log(self.L) - (2 * l + 1) * LN2 - log_s)

    def knot_value(self, l: int) -> float:
        """``g`` at knot ``l``: ``L^2 / (2^(2l+1) S[l])``."""
        return self._knot_from_log(l, self.log_S(l))

    def knot_values(self, depth: int) -> list[float]:
        return [self.knot_value(l) for l in range(1, depth + 1)]

    def effective_depth(self) -> int:
        """Deepest knot with a nonzero value, at most ``max_depth + 1``."""
        last = 0
        for l in range(1, self.ladder.max_depth + 2):
            if self.knot_value(l) == 0.0:
                break
            last = l
        return last


def compute_A(f: FunctionOracle, ladder: KnotLadder, n: int, i: int, k: float = math.inf,
              side: Side = "right") -> float:
    return TamingConstants(ladder, side, f, k).A(n, i)


def compute_B(ladder: KnotLadder, n: int, i: int) -> float:
    return TamingConstants(ladder, "right", None).B(n, i)


def compute_S(constants: TamingConstants, n: int) -> float:
    return constants.S(n)


def knot_value(constants: TamingConstants, l: int) -> float:
    return constants.knot_value(l)


def build_component_constants(ladder: KnotLadder, f: FunctionOracle | None, k: float = math.inf,
                              max_order: int = mollifier.MAX_ORDER) -> dict[str, TamingConstants]:
    """Constants for every ladder side of a component, sharing the midpoint value."""
    sides = ladder.sides()
    raw = {s: TamingConstants(ladder, s, f, k, max_order) for s in sides}
    if len(sides) < 2:
        return raw
    shared = max(c.raw_log_S(1) for c in raw.values())
    for c in raw.values():
        c.floor_log_S = shared
        c._log_S.clear()
    return raw
