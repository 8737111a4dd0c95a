"""Numerical re-checks of the construction's bounds, plus a finite-difference auditor.

Every check returns a :class:`ReportEntry`; a failing bound is a report entry,
never an exception.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ckextend.catalog import FunctionOracle
from ckextend.opensets import KnotLadder, OpenSet

PASS, FAIL, NA = "PASS", "FAIL", "N/A"

DECAY_RELATIVE = 1e-8
DECAY_ABSOLUTE = 1e-30


@dataclass
class ReportEntry:
    check: str
    paper_ref: str
    params: dict
    worst_margin: float
    status: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_json(self) -> dict:
        out = asdict(self)
        m = out["worst_margin"]
        if isinstance(m, float) and not math.isfinite(m):
            out["worst_margin"] = str(m)
        return out


def fd_derivative(e, i: int, x: float, step: float) -> float:
    """Central ``i``-th difference quotient with the binomial stencil."""
    if step <= 0:
        raise ValueError("step must be positive")
    if i == 0:
        return float(e(x))
    offsets = (0.5 * i - np.arange(i + 1)) * step
    weights = np.array([(-1) ** j * math.comb(i, j) for j in range(i + 1)], dtype=float)
    values = np.asarray(e(x + offsets), dtype=float)
    return float(np.dot(weights, values) / step**i)


def sample_open_set(S: OpenSet, count: int, window: float = 4.0) -> np.ndarray:
    """Deterministic interior samples spread over the components of ``S``.

    Unbounded components are cut to ``window`` next to their finite end.
    """
    spans = []
    for lo, hi in S.components:
        if math.isinf(lo) and math.isinf(hi):
            lo, hi = -window / 2, window / 2
        elif math.isinf(lo):
            lo = hi - window
        elif math.isinf(hi):
            hi = lo + window
        spans.append((lo, hi))
    total = sum(hi - lo for lo, hi in spans)
    out = []
    for lo, hi in spans:
        n = max(1, int(round(count * (hi - lo) / total)))
        out.append(np.linspace(lo, hi, n + 2)[1:-1])
    return np.concatenate(out)


def _ladder_sides(e):
    """``(component index, plan, side, boundary point)`` for every finite ladder end."""
    for m, plan in enumerate(e.plans):
        for side in plan.ladder.sides():
            yield m, plan, side, plan.ladder.boundary_point(side)


def check_extension_identity(g, h, f: FunctionOracle, V: OpenSet, samples: int = 10_000) -> ReportEntry:
    """``h == f g`` on the domain of ``f``, to one ulp of the product per point."""
    xs = sample_open_set(f.domain, samples)
    gv = np.asarray(g(xs))
    hv = np.asarray(h(xs))
    fv = np.asarray(f(xs))
    with np.errstate(invalid="ignore", over="ignore"):
        prod = fv * gv
    prod = np.where(gv == 0.0, 0.0, prod)
    dev = np.abs(hv - prod)
    ulp = np.spacing(np.abs(prod))
    margin = float(np.min(ulp - dev))
    bad = int(np.sum(dev > ulp))
    return ReportEntry(
        "extension_identity", "h = f*g on U (extension of f g)",
        {"samples": int(len(xs)), "function": f.id},
        margin, PASS if bad == 0 else FAIL,
        f"{bad} samples deviate by more than 1 ulp" if bad else "",
    )


def check_knot_values(g) -> ReportEntry:
    """``g(a_l)`` equals ``L^2 / (2^(2l+1) S_l)`` bit for bit, and drops by 4x per knot.

    A cozero witness equals ``g`` on the components of ``U`` and is checked there.
    """
    worst = math.inf
    problems = []
    for m, plan, side, _ in _ladder_sides(g):
        if g.role == "cozero" and not plan.in_domain:
            continue
        consts = plan.constants[side]
        prev = None
        for l in range(1, plan.ladder.max_depth + 1):
            x = plan.ladder.knot(side, l)
            got = g(x)
            want = consts.knot_value(l)
            if got != want:
                problems.append(f"component {m} {side} l={l}: {got!r} != {want!r}")
                worst = min(worst, -abs(got - want))
            if prev is not None:
                ratio_margin = prev / 4.0 - got
                worst = min(worst, ratio_margin)
                if got > prev / 4.0:
                    problems.append(f"component {m} {side} l={l}: ratio > 1/4")
            prev = got
    if worst == math.inf:
        worst = 0.0
    return ReportEntry(
        "knot_values", "g(a_l) = L^2/(2^(2l+1) S_l), ratio <= 1/4",
        {}, worst, FAIL if problems else PASS, "; ".join(problems[:5]),
    )


def check_support(g, V: OpenSet, samples: int = 2000) -> ReportEntry:
    """``g > 0`` on ``V`` above the underflow depth, ``g = 0`` off ``V``."""
    problems = []
    xs = sample_open_set(V, samples)
    vals = np.asarray(g(xs))
    for x, v in zip(xs, vals):
        m, side, n = g.locate(x)
        plan = g.plans[m]
        if side == "const":
            depth_ok = True
        else:
            depth_ok = n < plan.constants[side].effective_depth()
        if depth_ok and not v > 0:
            problems.append(f"g({x}) = {v}")
    outside = np.array(V.boundary(), dtype=float)
    off = np.asarray(g(outside)) if len(outside) else np.zeros(0)
    if np.any(off != 0.0):
        problems.append("g nonzero on the boundary of V")
    return ReportEntry(
        "support", "coz g = V (up to truncation)", {"samples": int(len(xs))},
        0.0 if not problems else -1.0, FAIL if problems else PASS, "; ".join(problems[:5]),
    )


def check_boundary_vanishing(e, V: OpenSet, orders: int = 4, depths=range(5, 21),
                             method: str = "fd", label: str = "") -> list[ReportEntry]:
    """Derivatives of ``e`` decay toward every boundary point of ``V``.

    For order ``r`` the values at ``x_j`` (inside segment ``j``, distance
    ``0.7 L/2^j`` from the boundary) must fall below ``1e-8`` of the first one or
    below ``1e-30``. Orders beyond ``e``'s smoothness are reported N/A.
    """
    depths = list(depths)
    entries = []
    k = getattr(e, "k", math.inf)
    name = label or e.role
    for r in range(1, orders + 1):
        params = {"function": name, "order": r, "depths": [depths[0], depths[-1]], "method": method}
        if e.role == "h" and r > k:
            entries.append(ReportEntry(
                "boundary_vanishing", "derivatives of h vanish off V (C^k only)",
                params, 0.0, NA, f"order {r} exceeds k = {k}"))
            continue
        worst = math.inf
        problems = []
        for m, plan, side, p in _ladder_sides(e):
            L = plan.ladder.L
            sign = -1.0 if side == "right" else 1.0
            vals = []
            for j in depths:
                delta = math.ldexp(L, -j)
                x = p + sign * 0.7 * delta
                if method == "fd":
                    vals.append(abs(fd_derivative(e, r, x, delta / 16.0)))
                else:
                    vals.append(abs(e.deriv(r, x)))
            first, last = vals[0], vals[-1]
            threshold = max(DECAY_RELATIVE * first, DECAY_ABSOLUTE)
            worst = min(worst, threshold - last)
            if not last < threshold and not (first == 0.0 and last == 0.0):
                problems.append(f"boundary {p} ({side} end of component {m}): {first:.3e} -> {last:.3e}")
        if worst == math.inf:
            worst = 0.0
        entries.append(ReportEntry(
            "boundary_vanishing", "derivatives vanish on R \\ V",
            params, worst, FAIL if problems else PASS, "; ".join(problems[:5])))
    return entries


def quotient_bound(L: float, r: int, n: int) -> float:
    return 5.0 * r * L / 2.0 ** (n + 2) + L / 2.0**n


def check_quotient_bound(h, r: int) -> ReportEntry:
    """``|h^(r-1)(x)| / dist(x, end) <= 5rL/2^(n+2) + L/2^n`` at knots and segment midpoints."""
    worst = math.inf
    problems = []
    for m, plan, side, p in _ladder_sides(h):
        lad = plan.ladder
        L = lad.L
        for n in range(max(r, 1), lad.max_depth):
            lo, hi = lad.segment(side, n)
            start = lo if side == "right" else hi  # a_n or b_n
            for x in (start, 0.5 * (lo + hi)):
                dist = abs(p - x)
                if dist == 0.0:
                    continue
                value = abs(h.deriv(r - 1, x)) / dist
                bound = quotient_bound(L, r, n)
                worst = min(worst, bound - value)
                if not value <= bound:
                    problems.append(f"component {m} {side} n={n} x={x}: {value:.3e} > {bound:.3e}")
    if worst == math.inf:
        worst = 0.0
    return ReportEntry(
        "quotient_bound", "|h^(r-1)(x)/(x - x0)| <= 5rL/2^(n+2) + L/2^n",
        {"order": r}, worst, FAIL if problems else PASS, "; ".join(problems[:5]))


def check_product_bound(h, per_segment: int = 16) -> ReportEntry:
    """``|h| <= L^2 / 2^(2n+1)`` on every segment ``[a_n, a_{n+1})``."""
    worst = math.inf
    problems = []
    for m, plan, side, _ in _ladder_sides(h):
        lad = plan.ladder
        for n in range(1, lad.max_depth):
            lo, hi = lad.segment(side, n)
            if side == "right":
                xs = lo + (hi - lo) * np.arange(per_segment) / per_segment
            else:
                xs = hi - (hi - lo) * np.arange(per_segment) / per_segment
            vals = np.abs(np.asarray(h(xs)))
            bound = lad.L**2 / 2.0 ** (2 * n + 1)
            worst = min(worst, float(bound - vals.max()))
            if np.any(vals > bound):
                problems.append(f"component {m} {side} n={n}: {vals.max():.3e} > {bound:.3e}")
    if worst == math.inf:
        worst = 0.0
    return ReportEntry(
        "product_bound", "|f(x) g(x)| <= L^2/2^(2n+1) on [a_n, a_{n+1})",
        {"per_segment": per_segment}, worst, FAIL if problems else PASS, "; ".join(problems[:5]))


def check_constant_domination(h, r_max: int = 4, per_segment: int = 8) -> ReportEntry:
    """``|f^(i) Phi_seg^(r-1-i)| <= A[n,i] B[n,r-1-i] <= S[n]`` on live segments."""
    from ckextend.mspline import MSpline

    worst = math.inf
    problems = []
    for m, plan, side, _ in _ladder_sides(h):
        if not plan.in_domain or h.f is None:
            continue
        c = plan.constants[side]
        lad = plan.ladder
        for n in range(1, c.effective_depth()):
            lo, hi = lad.segment(side, n)
            xs = np.linspace(lo, hi, per_segment)
            unit = MSpline(lo, 0.0, hi, 1.0)
            log_s = c.log_S(n)
            for r in range(1, r_max + 1):
                for i in range(r):
                    j = r - 1 - i
                    if i > h.k or i + j > n:
                        continue
                    fv = np.abs(h.f.deriv(i, xs))
                    sv = np.abs(unit(xs)) if j == 0 else np.abs(unit.deriv(j, xs))
                    with np.errstate(over="ignore", invalid="ignore"):
                        attained = float(np.max(np.where(sv == 0, 0.0, fv * sv)))
                    log_ab = math.log(c.A(n, i)) + c.log_B(n, j)
                    if not math.isfinite(attained):
                        continue
                    ok1 = attained == 0.0 or math.log(attained) <= log_ab + 1e-12
                    ok2 = log_ab <= log_s + 1e-12
                    if math.isfinite(log_ab) and attained > 0:
                        worst = min(worst, log_ab - math.log(attained))
                    if not (ok1 and ok2):
                        problems.append(f"component {m} {side} n={n} i={i} j={j}")
    if worst == math.inf:
        worst = 0.0
    return ReportEntry(
        "constant_domination", "|f^(i) Phi^(r-1-i)| <= A_{n,i} B_{n,r-1-i} <= S_n",
        {"max_order": r_max}, worst, FAIL if problems else PASS, "; ".join(problems[:5]))


def check_fd_consistency(e, points: int = 50, order: int = 1, label: str = "") -> ReportEntry:
    """Central differences of ``e`` approach the analytic first derivative.

    At each sample the error with step ``s/10`` must not exceed the error with
    step ``s`` (within a rounding allowance), or both must already be at
    noise level.
    """
    xs = []
    for m, plan, side, _ in _ladder_sides(e):
        for n in (1, 2, 3):
            lo, hi = plan.ladder.segment(side, n)
            if plan.constants[side].effective_depth() > n:
                xs.extend(np.linspace(lo, hi, 5)[1:-1])
    xs = xs[:: max(1, len(xs) // points)][:points]
    worst = math.inf
    problems = []
    for x in xs:
        m, side, n = e.locate(x)
        lo, hi = e.plans[m].ladder.segment(side, n) if side != "const" else (x - 1, x + 1)
        seg = hi - lo
        exact = e.deriv(order, x)
        errs = [abs(fd_derivative(e, order, x, seg * s) - exact) for s in (1e-3, 1e-4)]
        scale = max(abs(exact), abs(float(e(x))) / seg, 1e-300)
        noise = 1e-7 * scale
        worst = min(worst, (errs[0] + noise) - errs[1])
        if errs[1] > errs[0] + noise and errs[1] > noise:
            problems.append(f"x={x}: {errs}")
    if worst == math.inf:
        worst = 0.0
    return ReportEntry(
        "fd_consistency", "analytic derivative matches finite differences",
        {"function": label or e.role, "points": len(xs), "order": order},
        worst, FAIL if problems else PASS, "; ".join(problems[:5]))


@dataclass
class Report:
    entries: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def extend(self, items):
        if isinstance(items, ReportEntry):
            self.entries.append(items)
        else:
            self.entries.extend(items)

    @property
    def failures(self) -> list[ReportEntry]:
        return [e for e in self.entries if e.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_extension(ext, *, samples: int = 10_000, orders: int = 4, depths=range(5, 21),
                     quotient_orders: int = 4, boundary_method: str = "fd") -> Report:
    """Run every check on a built extension."""
    report = Report()
    report.extend(check_extension_identity(ext.g, ext.h, ext.f, ext.V, samples))
    report.extend(check_knot_values(ext.g))
    report.extend(check_support(ext.g, ext.V))
    report.extend(check_product_bound(ext.h))
    k = ext.h.k
    for r in range(1, quotient_orders + 1):
        if r > k:
            report.extend(ReportEntry("quotient_bound", "|h^(r-1)(x)/(x - x0)| bound",
                                      {"order": r}, 0.0, NA, f"order {r} exceeds k = {k}"))
            continue
        report.extend(check_quotient_bound(ext.h, r))
    report.extend(check_constant_domination(ext.h, min(quotient_orders, 4)))
    report.extend(check_boundary_vanishing(ext.g, ext.V, orders, depths, boundary_method, "g"))
    report.extend(check_boundary_vanishing(ext.h, ext.V, orders, depths, boundary_method, "h"))
    report.extend(check_fd_consistency(ext.g, label="g"))
    report.extend(check_fd_consistency(ext.h, label="h"))
    return report


def check_cozero(a, U: OpenSet, samples: int = 200) -> ReportEntry:
    """``a > 0`` at interior samples of ``U`` and ``a == 0`` at samples of its complement."""
    from ckextend.opensets import complement_interior

    inside = sample_open_set(U, samples)
    gaps = complement_interior(U)
    outside = sample_open_set(gaps, samples) if not gaps.is_empty else np.zeros(0)
    outside = np.concatenate([outside, np.array(U.boundary(), dtype=float)])
    vin = np.asarray(a(inside))
    vout = np.asarray(a(outside)) if len(outside) else np.zeros(0)
    problems = []
    if np.any(~(vin > 0)):
        problems.append(f"{int(np.sum(~(vin > 0)))} interior samples not > 0")
    if np.any(vout != 0):
        problems.append(f"{int(np.sum(vout != 0))} complement samples nonzero")
    margin = float(vin.min()) if len(vin) else 0.0
    return ReportEntry(
        "cozero_witness", "coz a = U",
        {"inside_samples": int(len(inside)), "outside_samples": int(len(outside))},
        margin if not problems else -1.0, FAIL if problems else PASS, "; ".join(problems))


def check_complement(a, b, window: tuple[float, float], samples: int = 500, cells: int = 100) -> list[ReportEntry]:
    """``a b = 0`` on samples, and ``a + b`` is nonzero somewhere in every cell of ``window``."""
    lo, hi = window
    xs = np.linspace(lo, hi, samples)
    av = np.asarray(a(xs), dtype=float)
    bv = np.asarray([b(x) for x in xs], dtype=float)
    prod = np.abs(av * bv)
    e1 = ReportEntry(
        "complement_product", "a b = 0", {"samples": samples, "window": [lo, hi]},
        -float(prod.max()), PASS if np.all(prod == 0) else FAIL,
        "" if np.all(prod == 0) else f"max |ab| = {prod.max():.3e}")
    edges = np.linspace(lo, hi, cells + 1)
    missed = []
    for c in range(cells):
        pts = np.linspace(edges[c], edges[c + 1], 9)[1:-1]
        s = np.asarray(a(pts), dtype=float) + np.asarray([b(x) for x in pts], dtype=float)
        if not np.any(s != 0):
            missed.append(c)
    e2 = ReportEntry(
        "complement_dense", "coz(a + b) is dense", {"cells": cells, "window": [lo, hi]},
        float(cells - len(missed)) / cells, PASS if not missed else FAIL,
        f"cells without a nonzero sample: {missed[:10]}" if missed else "")
    return [e1, e2]
