"""Built-in functions with closed-form derivatives of every order they support."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from ckextend.opensets import KnotLadder, OpenSet, ValidationError

INF = math.inf

DerivFn = Callable[[int, np.ndarray], np.ndarray]


class OrderExceeded(ValueError):
    """A derivative beyond the function's smoothness order was requested."""


@dataclass(frozen=True)
class FunctionOracle:
    """A function on an open set with exact derivatives up to order ``k``.

    ``deriv(i, x)`` accepts scalars or arrays. Overflow near a singularity
    yields ``inf`` rather than an exception.
    """

    id: str
    params: Mapping[str, float]
    domain: OpenSet
    k: float
    _deriv: DerivFn = field(repr=False, compare=False)

    def deriv(self, i: int, x):
        if i < 0:
            raise ValueError("derivative order must be >= 0")
        if i > self.k:
            raise OrderExceeded(f"{self.id} is only C^{self.k}; order {i} requested")
        arr = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            out = np.asarray(self._deriv(i, np.atleast_1d(arr)), dtype=float)
        if arr.ndim == 0:
            return float(out.reshape(-1)[0])
        return np.broadcast_to(out, arr.shape).copy() if out.shape != arr.shape else out

    def __call__(self, x):
        return self.deriv(0, x)


def _constant(params, domain):
    c = float(params.get("c", 1.0))

    def deriv(i, x):
        return np.full_like(x, c if i == 0 else 0.0)

    return deriv, INF


def _polynomial(params, domain):
    coeffs = params.get("coeffs")
    if not coeffs:
        raise ValidationError("polynomial needs a non-empty 'coeffs' list (lowest degree first)")
    poly = np.polynomial.Polynomial([float(c) for c in coeffs])

    def deriv(i, x):
        return poly.deriv(i)(x) if i < len(poly.coef) else np.zeros_like(x)

    return deriv, INF


def _require_nonzero(domain: OpenSet, name: str):
    for lo, hi in domain:
        if lo < 0.0 < hi:
            raise ValidationError(f"{name} is undefined at 0, which lies in ({lo}, {hi})")


def _reciprocal_power(m: float):
    def deriv(i, x):
        # d^i x^-m = (-1)^i m (m+1) ... (m+i-1) x^(-m-i)
        rising = math.prod(m + j for j in range(i)) if i else 1.0
        return (-1.0) ** i * rising * np.power(x, -m - i)

    return deriv


def _reciprocal(params, domain):
    _require_nonzero(domain, "reciprocal")
    return _reciprocal_power(1.0), INF


def _reciprocal_power_entry(params, domain):
    m = params.get("m", 2)
    if int(m) != m or m < 1:
        raise ValidationError("reciprocal_power needs an integer exponent m >= 1")
    _require_nonzero(domain, "reciprocal_power")
    return _reciprocal_power(float(m)), INF


@lru_cache(maxsize=None)
def _sin_reciprocal_polys(i: int) -> tuple[np.ndarray, np.ndarray]:
    """``d^i/dx^i sin(1/x) = P_i(y) sin y + Q_i(y) cos y`` with ``y = 1/x``."""
    P = np.polynomial.polynomial
    if i == 0:
        return np.array([1.0]), np.array([0.0])
    p, q = _sin_reciprocal_polys(i - 1)
    # d/dx = -y^2 d/dy
    neg_y2 = np.array([0.0, 0.0, -1.0])
    new_p = P.polymul(neg_y2, P.polysub(P.polyder(p), q))
    new_q = P.polymul(neg_y2, P.polyadd(P.polyder(q), p))
    return np.trim_zeros(new_p, "b") if np.any(new_p) else np.array([0.0]), \
        np.trim_zeros(new_q, "b") if np.any(new_q) else np.array([0.0])


def _sin_reciprocal(params, domain):
    _require_nonzero(domain, "sin_reciprocal")

    def deriv(i, x):
        p, q = _sin_reciprocal_polys(i)
        y = 1.0 / x
        P = np.polynomial.polynomial
        return P.polyval(y, p) * np.sin(y) + P.polyval(y, q) * np.cos(y)

    return deriv, INF


def _exp(params, domain):
    rate = float(params.get("rate", 1.0))

    def deriv(i, x):
        return rate**i * np.exp(rate * x)

    return deriv, INF


def _log(params, domain):
    for lo, hi in domain:
        if lo < 0.0:
            raise ValidationError(f"log needs a domain in (0, inf); got ({lo}, {hi})")

    def deriv(i, x):
        if i == 0:
            return np.log(x)
        return (-1.0) ** (i - 1) * math.factorial(i - 1) * np.power(x, -float(i))

    return deriv, INF


def _ck_only(params, domain):
    k = params.get("k", 2)
    if int(k) != k or k < 0:
        raise ValidationError("ck_only needs an integer k >= 0")
    k = int(k)
    if "shift" in params:
        shift = float(params["shift"])
        if domain.components and not domain.contains(shift):
            raise ValidationError(f"ck_only shift {shift} must lie in the domain")
    else:
        lo, hi = domain.components[0]
        shift = KnotLadder(lo, hi).midpoint

    def deriv(i, x):
        # (x - s)^k |x - s| = sign(y) y^(k+1)
        y = x - shift
        coeff = math.factorial(k + 1) / math.factorial(k + 1 - i)
        return coeff * np.sign(y) * np.power(y, k + 1 - i)

    return deriv, k


CATALOG: dict[str, Callable] = {
    "constant": _constant,
    "indicator_smooth": _constant,
    "polynomial": _polynomial,
    "reciprocal": _reciprocal,
    "reciprocal_power": _reciprocal_power_entry,
    "sin_reciprocal": _sin_reciprocal,
    "exp": _exp,
    "log": _log,
    "ck_only": _ck_only,
}


def make_oracle(id: str, params: Mapping | None, domain: OpenSet) -> FunctionOracle:
    """Instantiate catalog entry ``id`` on ``domain``."""
    if id not in CATALOG:
        raise ValidationError(f"unknown function id {id!r}; known: {sorted(CATALOG)}")
    params = dict(params or {})
    if id == "indicator_smooth":
        params = {"c": 1.0}
    if domain.is_empty:
        raise ValidationError("function domain must be nonempty")
    deriv, k = CATALOG[id](params, domain)
    if id == "ck_only":
        params.setdefault("k", k)
    return FunctionOracle(id, params, domain, k, deriv)
