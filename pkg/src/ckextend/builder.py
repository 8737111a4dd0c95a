"""Assemble the multiplier ``g``, the extension ``h = f g`` and the cozero witnesses.

On each component of the dense open set ``V``, ``g`` runs through the knot
values ``L^2 / (2^(2l+1) S_l)`` joined by M-splines, is constant on the far
side of a half-line, and is 0 off ``V``. ``h`` is ``f g`` on ``V`` (with ``f``
extended by 0 to the components of ``V`` not in its domain) and 0 elsewhere.
"""
from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

import numpy as np

from ckextend import mollifier
from ckextend.catalog import FunctionOracle, OrderExceeded, make_oracle
from ckextend.mspline import MSpline
from ckextend.opensets import (
    DEFAULT_MAX_DEPTH,
    KnotLadder,
    OpenSet,
    ValidationError,
    _parse_bound,
    densify,
    locate_in_ladder,
    normalize,
)
from ckextend.taming import TamingConstants, build_component_constants

Role = Literal["g", "h", "cozero"]

WHOLE_LINE_VALUE = 1.0 / 8.0  # L^2 / 2^3 with L = 1 and S = 1


@dataclass(frozen=True)
class ComponentPlan:
    """Everything needed to evaluate ``g`` on one component of ``V``."""

    ladder: KnotLadder
    constants: dict
    knot_values: dict  # side -> tuple indexed 1..max_depth+1 (slot 0 unused)
    in_domain: bool    # whether f lives here (otherwise f = 0)

    @property
    def const_value(self) -> float:
        if not self.knot_values:
            return WHOLE_LINE_VALUE
        side = next(iter(self.knot_values))
        return self.knot_values[side][1]

    def spline(self, side: str, n: int) -> MSpline:
        vals = self.knot_values[side]
        if side == "right":
            return MSpline(self.ladder.knot("right", n), vals[n],
                           self.ladder.knot("right", n + 1), vals[n + 1])
        return MSpline(self.ladder.knot("left", n + 1), vals[n + 1],
                       self.ladder.knot("left", n), vals[n])


@dataclass(frozen=True)
class SmoothEvaluator:
    """Immutable evaluator of ``g``, ``h`` or a cozero witness and its derivatives."""

    V: OpenSet
    plans: tuple
    role: Role
    k: float
    f: FunctionOracle | None = None
    max_order: int = mollifier.MAX_ORDER
    max_depth: int = DEFAULT_MAX_DEPTH

    # -- locating -------------------------------------------------------
    def locate(self, x: float):
        """``(component, side, n)`` or None off ``V``."""
        m = self.V.component_of(float(x))
        if m is None:
            return None
        side, n = locate_in_ladder(self.plans[m].ladder, float(x))
        return m, side, n

    def knot_value(self, m: int, side: str, l: int) -> float:
        return self.plans[m].knot_values[side][l]

    # -- g and its derivatives on a located group ------------------------
    def _g_group(self, key, i: int, xs: np.ndarray) -> np.ndarray:
        m, side, n = key
        plan = self.plans[m]
        if side == "const":
            return np.full_like(xs, plan.const_value if i == 0 else 0.0)
        if n > plan.ladder.max_depth:
            return np.zeros_like(xs)
        spline = plan.spline(side, n)
        if i == 0:
            return np.asarray(spline(xs), dtype=float)
        return np.asarray(spline.deriv(i, xs), dtype=float)

    def _f_group(self, key, j: int, xs: np.ndarray) -> np.ndarray:
        plan = self.plans[key[0]]
        if not plan.in_domain or self.f is None:
            return np.zeros_like(xs)
        return self.f.deriv(j, xs)

    def _value_group(self, key, i: int, xs: np.ndarray) -> np.ndarray:
        if self.role == "g":
            return self._g_group(key, i, xs)
        total = np.zeros_like(xs)
        for j in range(i + 1):
            g_part = self._g_group(key, i - j, xs)
            nz = g_part != 0.0
            if not np.any(nz):
                continue
            f_part = self._f_group(key, j, xs[nz])
            total[nz] += math.comb(i, j) * f_part * g_part[nz]
        return total

    def _check_order(self, i: int):
        if i < 0:
            raise ValueError("derivative order must be >= 0")
        if self.role == "h" and i > self.k:
            raise OrderExceeded(f"h is only guaranteed C^{self.k}; order {i} requested")
        if i > self.max_order:
            raise OrderExceeded(f"order {i} exceeds max_order {self.max_order}")

    def deriv(self, i: int, x):
        """``i``-th derivative; exactly 0 off ``V`` (boundary points included)."""
        self._check_order(i)
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if not np.all(np.isfinite(flat)):
            raise ValidationError("evaluation point must be finite")
        out = np.zeros_like(flat)
        groups: dict = defaultdict(list)
        for idx, xv in enumerate(flat):
            key = self.locate(xv)
            if key is not None:
                groups[key].append(idx)
        with np.errstate(under="ignore"):
            for key, idxs in groups.items():
                idxs = np.asarray(idxs)
                out[idxs] = self._value_group(key, i, flat[idxs])
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)

    def __call__(self, x):
        return self.deriv(0, x)

    def eval(self, x):
        return self.deriv(0, x)

    def eval_deriv(self, i: int, x):
        return self.deriv(i, x)

    # -- summaries -------------------------------------------------------
    def truncation_error_bound(self) -> float:
        """Largest ``L^2 / 2^(2 max_depth + 1)`` over the components."""
        bounds = [p.ladder.L ** 2 / 2.0 ** (2 * self.max_depth + 1) for p in self.plans]
        return max(bounds) if bounds else 0.0

    def summary(self) -> dict:
        comps = []
        for m, plan in enumerate(self.plans):
            lad = plan.ladder
            sides = {}
            for side, c in plan.constants.items():
                sides[side] = {
                    "case": c.case,
                    "p": c.p,
                    "effective_depth": c.effective_depth(),
                    "knot_value_1": plan.knot_values[side][1],
                }
            comps.append({
                "index": m,
                "interval": OpenSet((self.V.components[m],)).to_json()[0],
                "L": lad.L,
                "in_domain": plan.in_domain,
                "case": next(iter(sides.values()))["case"] if sides else "A",
                "p": next(iter(sides.values()))["p"] if sides else None,
                "sides": sides,
                "truncation_error_bound": lad.L ** 2 / 2.0 ** (2 * self.max_depth + 1),
            })
        return {
            "component_count": len(self.plans),
            "components": comps,
            "truncation_error_bound": self.truncation_error_bound(),
        }

    # -- fault injection -------------------------------------------------
    def with_perturbed_knot(self, m: int, side: str, l: int, rel: float) -> "SmoothEvaluator":
        """Copy with one knot value scaled by ``1 + rel`` (for harness self-tests)."""
        plans = list(self.plans)
        plan = plans[m]
        vals = list(plan.knot_values[side])
        vals[l] = vals[l] * (1.0 + rel)
        kv = dict(plan.knot_values)
        kv[side] = tuple(vals)
        if l == 1:  # the midpoint is shared by both sides
            for other in kv:
                ov = list(kv[other])
                ov[1] = vals[1]
                kv[other] = tuple(ov)
        plans[m] = replace(plan, knot_values=kv)
        return replace(self, plans=tuple(plans))


def _match_domain(V: OpenSet, f: FunctionOracle | None) -> list[bool]:
    if f is None:
        return [False] * len(V)
    flags = []
    for comp in V.components:
        flags.append(comp in f.domain.components)
    for comp in f.domain.components:
        if comp not in V.components:
            raise ValidationError(f"domain component {comp} is not a component of V")
    return flags


def _plan_component(lo: float, hi: float, f: FunctionOracle | None, k: float, max_depth: int,
                    max_order: int, deflate: float = 1.0) -> ComponentPlan:
    ladder = KnotLadder(lo, hi, max_depth=max_depth)
    constants = build_component_constants(ladder, f, k, max_order)
    knot_values = {}
    for side, c in constants.items():
        vals = [math.nan]
        for l in range(1, max_depth + 2):
            v = c.knot_value(l)
            if deflate != 1.0:
                v = _deflated_knot(c, l, deflate)
            vals.append(v)
        knot_values[side] = tuple(vals)
    return ComponentPlan(ladder, constants, knot_values, f is not None)

def _deflated_knot(c: TamingConstants, l: int, factor: float) -> float:
    """Knot value computed as if every ``A`` and ``B`` factor were divided by ``factor``."""
    log_s = c.log_S(l)
    if math.isinf(log_s):
        return 0.0
    count = 2 * (c.order_range(l) + 1)
    log_s -= count * math.log(factor)
    return math.exp(2.0 * math.log(c.L) - (2 * l + 1) * math.log(2.0) - log_s)


def _build(V: OpenSet, f: FunctionOracle | None, k: float, role: Role, max_depth: int,
           max_order: int, deflate: float = 1.0) -> SmoothEvaluator:
    flags = _match_domain(V, f)
    plans = []
    for (lo, hi), inside in zip(V.components, flags):
        plans.append(_plan_component(lo, hi, f if inside else None, k, max_depth, max_order, deflate))
    return SmoothEvaluator(V, tuple(plans), role, k, f, max_order, max_depth)


def build_g(V: OpenSet, f: FunctionOracle | None, k: float = math.inf, *,
            max_depth: int = DEFAULT_MAX_DEPTH, max_order: int = mollifier.MAX_ORDER,
            deflate: float = 1.0) -> SmoothEvaluator:
    """The C-infinity multiplier with ``coz g = V`` (up to truncation)."""
    return _build(V, f, k, "g", max_depth, max_order, deflate)


def build_h(V: OpenSet, f: FunctionOracle, k: float = math.inf, *, g: SmoothEvaluator | None = None,
            max_depth: int = DEFAULT_MAX_DEPTH, max_order: int = mollifier.MAX_ORDER,
            deflate: float = 1.0) -> SmoothEvaluator:
    """The C^k extension of ``f g``; reuses ``g``'s plans when given."""
    if g is None:
        g = build_g(V, f, k, max_depth=max_depth, max_order=max_order, deflate=deflate)
    return replace(g, role="h", f=f, k=k)


@dataclass(frozen=True)
class Extension:
    U: OpenSet
    V: OpenSet
    f: FunctionOracle
    g: SmoothEvaluator
    h: SmoothEvaluator


def build_extension(f: FunctionOracle, k: float | None = None, *, max_depth: int = DEFAULT_MAX_DEPTH,
                    max_order: int = mollifier.MAX_ORDER, deflate: float = 1.0) -> Extension:
    """Densify ``f``'s domain and build ``g`` and ``h`` together."""
    k = f.k if k is None else min(k, f.k)
    V = densify(f.domain)
    g = build_g(V, f, k, max_depth=max_depth, max_order=max_order, deflate=deflate)
    h = build_h(V, f, k, g=g)
    return Extension(f.domain, V, f, g, h)


def build_cozero(U: OpenSet, *, max_depth: int = DEFAULT_MAX_DEPTH,
                 max_order: int = mollifier.MAX_ORDER) -> SmoothEvaluator:
    """A C-infinity function that is nonzero exactly on ``U``."""
    if U.is_empty:
        raise ValidationError("cozero witness needs a nonempty open set")
    one = make_oracle("indicator_smooth", {}, U)
    V = densify(U)
    g = build_g(V, one, math.inf, max_depth=max_depth, max_order=max_order)
    return replace(g, role="cozero", f=one)


class ZeroFunction:
    """The zero function, with the evaluator interface."""

    role = "cozero"

    def deriv(self, i: int, x):
        arr = np.asarray(x, dtype=float)
        return 0.0 if arr.ndim == 0 else np.zeros_like(arr)

    def __call__(self, x):
        return self.deriv(0, x)

    eval = __call__

    def eval_deriv(self, i, x):
        return self.deriv(i, x)

    def summary(self) -> dict:
        return {"component_count": 0, "components": [], "truncation_error_bound": 0.0}


def interior_of_zero_set(zero_set: Sequence[Sequence]) -> OpenSet:
    """Open interior of a union of closed intervals ``[lo, hi]`` (points allowed)."""
    opens = []
    for item in zero_set:
        lo, hi = normalize_pair(item)
        if lo < hi:
            opens.append([lo, hi])
    if not opens:
        return OpenSet(())
    # closed intervals that touch merge in the interior; widen the merge test
    opens.sort()
    merged = [opens[0]]
    for lo, hi in opens[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return normalize(merged)


def normalize_pair(item) -> tuple[float, float]:
    if not isinstance(item, (list, tuple)) or len(item) != 2:
        raise ValidationError(f"expected [lo, hi], got {item!r}")
    lo, hi = _parse_bound(item[0]), _parse_bound(item[1])
    if lo > hi:
        raise ValidationError(f"zero-set interval needs lo <= hi, got [{lo}, {hi}]")
    return lo, hi


def detect_zero_set(b: Callable, window: tuple[float, float] = (-10.0, 10.0),
                    points: int = 20001, atol: float = 0.0) -> list[tuple[float, float]]:
    """Runs of (numerically) zero samples of ``b`` on a grid, as closed intervals.

    Runs touching the window edge extend to infinity. Approximate by nature;
    declare the zero set when it is known.
    """
    xs = np.linspace(window[0], window[1], points)
    vals = np.abs(np.asarray([b(x) for x in xs], dtype=float))
    zero = vals <= atol
    runs = []
    start = None
    for idx, z in enumerate(zero):
        if z and start is None:
            start = idx
        if (not z or idx == len(zero) - 1) and start is not None:
            end = idx if z else idx - 1
            if end > start:
                lo = -math.inf if start == 0 else xs[start]
                hi = math.inf if end == len(xs) - 1 else xs[end]
                runs.append((lo, hi))
            start = None
    return runs


def build_complement(b: Callable, zero_set: Sequence[Sequence] | None = None, *,
                     window: tuple[float, float] = (-10.0, 10.0),
                     max_depth: int = DEFAULT_MAX_DEPTH):
    """``a`` with ``a b = 0`` and ``coz(a + b)`` dense: the cozero witness of ``Int Z(b)``."""
    if zero_set is None:
        zero_set = detect_zero_set(b, window)
    interior = interior_of_zero_set(zero_set)
    if interior.is_empty:
        warnings.warn("Int Z(b) is empty: b is already a non-zero divisor; returning 0",
                      stacklevel=2)
        return ZeroFunction()
    return build_cozero(interior, max_depth=max_depth)
