"""Monotone C-infinity connectors between two points, built on ``Phi``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ckextend import mollifier
from ckextend.mollifier import DomainError


def affine_pullback(a: float, c: float, x):
    """Map ``[a, c]`` onto ``[-1, 1]``."""
    if not a < c:
        raise ValueError(f"need a < c, got a={a}, c={c}")
    return (2.0 * np.asarray(x, dtype=float) - (a + c)) / (c - a)


@dataclass(frozen=True)
class MSpline:
    """The spline from ``(a, b)`` to ``(c, d)``: ``b + (d - b) * Phi_{a,c}(x)``.

    Evaluated as ``b * Phi(-t) + d * Phi(t)`` so that a tiny right ordinate
    is not swamped by rounding of ``1 - Phi(t)`` near the right end.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.a < self.c:
            raise ValueError(f"MSpline needs a < c, got a={self.a}, c={self.c}")

    def _pullback(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any((arr < self.a) | (arr > self.c)):
            raise DomainError(f"x outside [{self.a}, {self.c}]")
        t = affine_pullback(self.a, self.c, arr)
        # endpoints map exactly to -1 and 1
        t = np.where(arr == self.a, -1.0, np.where(arr == self.c, 1.0, t))
        return t

    def __call__(self, x):
        t = self._pullback(x)
        if self.b == self.d:
            out = np.full_like(t, self.b)
        else:
            with np.errstate(under="ignore"):
                out = self.b * mollifier.phi_big(-t) + self.d * mollifier.phi_big(t)
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, i: int, x):
        if i < 1:
            raise ValueError("spline derivative order must be >= 1")
        t = self._pullback(x)
        scale = (2.0 / (self.c - self.a)) ** i
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            dphi = mollifier.phi_big_deriv(i, t)
            out = np.where(dphi == 0.0, 0.0, (self.d - self.b) * scale * dphi)
        return float(out) if np.ndim(out) == 0 else out


def mspline_eval(s: MSpline, x):
    return s(x)


def mspline_deriv(i: int, s: MSpline, x):
    return s.deriv(i, x)


def mspline_sup_deriv(i: int, a: float, c: float) -> float:
    """Upper bound on ``max |Phi_{a,c}^(i)|`` over ``[a, c]``."""
    if not a < c:
        raise ValueError(f"need a < c, got a={a}, c={c}")
    return (2.0 / (c - a)) ** i * mollifier.sup_phi_big_deriv(i)
