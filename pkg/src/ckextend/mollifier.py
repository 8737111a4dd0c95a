"""The standard bump ``sigma(x) = exp(-1/(1-x^2))`` and its normalized integral.

``phi = sigma / C`` integrates to one over ``[-1, 1]`` and ``Phi`` is its
cumulative integral, a C-infinity step from 0 at -1 to 1 at +1 with every
derivative vanishing at both ends.

Derivatives of sigma are evaluated through the Bell-polynomial form of
Faa di Bruno's formula applied to ``u(x) = -1/(1-x^2)``, whose derivatives
have the closed form ``-j!/2 * ((1-x)^-(j+1) + (-1)^j (1+x)^-(j+1))``.
Evaluating the expanded numerator polynomial directly loses all accuracy past
order ~12 near ``|x| -> 1``; the Bell recurrence stays within a few ulps up to
the order cap.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ckextend._search import argmax_refine

MAX_ORDER = 32
TABLE_NODES = 4097  # uniform on [-1, 1], so 0 is a node
QUAD_TOL = 1e-12
SUP_GRID = 100_000

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class DomainError(ValueError):
    """Raised for non-finite arguments or points outside a function's domain."""


def _check_order(i: int) -> None:
    if i < 0 or i > MAX_ORDER:
        raise ValueError(f"derivative order {i} outside [0, {MAX_ORDER}]")


def _as_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("mollifier evaluated at a non-finite point")
    return arr


@dataclass(frozen=True)
class RationalExpDerivative:
    """``sigma^(i)(x) = numerator(x) / (1-x^2)^denominator_power * sigma(x)``.

    Coefficients are exact integers, lowest degree first.
    """

    order: int
    numerator: tuple[int, ...]
    denominator_power: int

    def successor(self) -> "RationalExpDerivative":
        # d/dx [P q^-m sigma] = q^-(m+2) sigma [P' q^2 + 2m x q P - 2x P],  q = 1 - x^2
        p = np.array(self.numerator, dtype=object)
        m = self.denominator_power
        q = np.array([1, 0, -1], dtype=object)
        dp = np.array([k * p[k] for k in range(1, len(p))] or [0], dtype=object)
        P = np.polynomial.polynomial
        new = P.polyadd(P.polymul(dp, P.polymul(q, q)), P.polymul([0, 2 * m], P.polymul(q, p)))
        new = P.polyadd(new, P.polymul([0, -2], p))
        coeffs = [int(c) for c in new]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return RationalExpDerivative(self.order + 1, tuple(coeffs), m + 2)

    def numerator_at(self, x: Fraction | int) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.numerator):
            acc = acc * x + c
        return acc

    def evaluate(self, x: float) -> float:
        """Exact rational evaluation of the prefactor, then one rounding per factor.

        Slow; intended for checks at a handful of points.
        """
        if abs(x) >= 1:
            return 0.0
        xf = Fraction(x)
        q = 1 - xf * xf
        prefactor = self.numerator_at(xf) / q**self.denominator_power
        if prefactor == 0:
            return 0.0
        log_mag = math.log(abs(prefactor.numerator)) - math.log(prefactor.denominator) - 1 / float(q)
        return math.copysign(math.exp(log_mag), prefactor)


@lru_cache(maxsize=None)
def rational_exp_derivative(i: int) -> RationalExpDerivative:
    _check_order(i)
    if i == 0:
        return RationalExpDerivative(0, (1,), 0)
    return rational_exp_derivative(i - 1).successor()


def sigma(x):
    """The bump ``exp(-1/(1-x^2))`` on ``|x| < 1``, exactly 0 elsewhere."""
    arr = _as_finite(x)
    inside = np.abs(arr) < 1
    q = np.where(inside, 1.0 - arr * arr, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        out = np.where(inside, np.exp(-1.0 / q), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def sigma_deriv(i: int, x):
    """``sigma^(i)(x)``; exactly 0 for ``|x| >= 1``."""
    _check_order(i)
    if i == 0:
        return sigma(x)
    arr = _as_finite(x)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    inside = np.abs(arr) < 1
    if np.any(inside):
        out[inside] = _sigma_deriv_inside(i, arr[inside])
    return float(out[0]) if scalar else out


def _sigma_deriv_inside(n: int, x: np.ndarray) -> np.ndarray:
    # Bell polynomials are homogeneous of weight n, so scaling u^(j) by s^j
    # scales Y_n by s^n; s = 1/w^2 with w = 1/(1-|x|) keeps every term bounded.
    one_minus = 1.0 - x
    one_plus = 1.0 + x
    w = 1.0 / np.minimum(one_minus, one_plus)
    ra = np.minimum(one_minus, one_plus) / one_minus  # a/w, in (0, 1]
    rb = np.minimum(one_minus, one_plus) / one_plus   # b/w
    scaled_u = [None]
    for j in range(1, n + 1):
        # u^(j) / w^(2j) = -j!/2 * (ra^(j+1) + (-1)^j rb^(j+1)) * w^(1-j)
        term = ra ** (j + 1) + (-1) ** j * rb ** (j + 1)
        scaled_u.append(-0.5 * math.factorial(j) * term * w ** (1.0 - j))
    bell = [np.ones_like(x)]
    for m in range(n):
        acc = np.zeros_like(x)
        for j in range(m + 1):
            acc = acc + math.comb(m, j) * bell[m - j] * scaled_u[j + 1]
        bell.append(acc)
    q = one_minus * one_plus
    with np.errstate(over="ignore", under="ignore"):
        log_scale = 2 * n * np.log(w) - 1.0 / q
        return bell[n] * np.exp(log_scale)


class _PhiTable:
    """Cumulative integrals of sigma on a uniform grid over [-1, 0].

    ``Phi(x)`` for ``x <= 0`` is the table entry at the node left of ``x`` plus a
    16-point Gauss-Legendre integral over the remaining stretch; ``Phi`` on
    ``x > 0`` comes from ``1 - Phi(-x)``. This keeps ``Phi`` non-decreasing,
    makes ``Phi(x) + Phi(-x) = 1`` hold to rounding, and gives ``Phi(0) = 1/2``
    exactly because ``C`` is defined as twice the half integral.
    """

    def __init__(self, nodes: int = TABLE_NODES):
        half = nodes // 2 + 1
        self.grid = np.linspace(-1.0, 0.0, half)
        self.step = self.grid[1] - self.grid[0]
        cells = np.array([_gauss_legendre(sigma, lo, lo + self.step) for lo in self.grid[:-1]])
        self.cumulative = np.concatenate([[0.0], np.cumsum(cells)])
        self.half_integral = float(self.cumulative[-1])
        self.C = 2.0 * self.half_integral

    def lower_half(self, x: np.ndarray) -> np.ndarray:
        """Phi on ``[-1, 0]`` (unnormalized inputs are clipped)."""
        idx = np.clip(((x + 1.0) / self.step).astype(int), 0, len(self.grid) - 2)
        left = self.grid[idx]
        # integrate sigma over [left, x] with nodes mapped per point
        half = 0.5 * (x - left)
        mid = 0.5 * (x + left)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        partial = half * (sigma(pts) @ _GL_W)
        return (self.cumulative[idx] + partial) / self.C


def _gauss_legendre(fn, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return float(half * np.dot(_GL_W, fn(mid + half * _GL_X)))


_table_lock = threading.Lock()
_table: _PhiTable | None = None


def phi_table() -> _PhiTable:
    global _table
    if _table is None:
        with _table_lock:
            if _table is None:
                _table = _PhiTable()
    return _table


def adaptive_simpson(fn, lo: float, hi: float, tol: float = QUAD_TOL, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = fn(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, eps, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return (recurse(a, fa, m, fm, lm, flm, left, eps / 2, depth - 1)
                + recurse(m, fm, b, fb, rm, frm, right, eps / 2, depth - 1))

    fa, fb = fn(lo), fn(hi)
    m, fm, whole = simpson(lo, fa, hi, fb)
    return recurse(lo, fa, hi, fb, m, fm, whole, tol, max_depth)


@lru_cache(maxsize=1)
def normalization_constant() -> float:
    """``C``, the integral of sigma over [-1, 1], by adaptive Simpson."""
    # split at 0: sigma is even, and the split keeps both halves smooth at the seam
    return 2.0 * adaptive_simpson(sigma, -1.0, 0.0, QUAD_TOL / 2)


def phi(x):
    """Normalized bump ``sigma / C`` with ``C`` taken from the table."""
    with np.errstate(under="ignore"):
        out = np.asarray(sigma(x)) / phi_table().C
    return float(out) if np.ndim(out) == 0 else out


def phi_big(x):
    """``Phi(x)``: 0 for ``x <= -1``, 1 for ``x >= 1``, monotone in between."""
    arr = _as_finite(x)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    out = np.empty_like(arr)
    lo = arr <= -1.0
    hi = arr >= 1.0
    neg = ~lo & ~hi & (arr <= 0.0)
    pos = ~lo & ~hi & (arr > 0.0)
    out[lo] = 0.0
    out[hi] = 1.0
    table = phi_table()
    if np.any(neg):
        out[neg] = table.lower_half(arr[neg])
    if np.any(pos):
        out[pos] = 1.0 - table.lower_half(-arr[pos])
    return float(out[0]) if scalar else out


def phi_big_complement(x):
    """``1 - Phi(x)`` without cancellation, i.e. ``Phi(-x)``."""
    return phi_big(-np.asarray(x, dtype=float))


def phi_big_deriv(i: int, x):
    """``Phi^(i)(x) = sigma^(i-1)(x) / C`` for ``i >= 1``."""
    if i < 1:
        raise ValueError("phi_big_deriv needs order >= 1; use phi_big for order 0")
    with np.errstate(under="ignore"):
        out = np.asarray(sigma_deriv(i - 1, x)) / phi_table().C
    return float(out) if np.ndim(out) == 0 else out


_sup_lock = threading.Lock()
_sup_cache: dict[int, float] = {}


def sup_phi_big_deriv(i: int) -> float:
    """Upper bound on ``max |Phi^(i)|`` over [-1, 1].

    Grid search on 10^5 points refined by grid zoom; the refined value
    is inflated by ``1 + 1e-9`` to cover the refinement tolerance.
    """
    _check_order(i)
    if i == 0:
        return 1.0
    if i in _sup_cache:
        return _sup_cache[i]
    grid = np.linspace(-1.0, 1.0, SUP_GRID)
    best = argmax_refine(lambda t: np.abs(phi_big_deriv(i, t)), grid)
    value = best * (1.0 + 1e-9)
    with _sup_lock:
        _sup_cache.setdefault(i, value)
    return _sup_cache[i]
