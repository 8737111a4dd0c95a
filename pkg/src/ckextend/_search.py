"""Grid search with zoom refinement for maxima on an interval."""
from __future__ import annotations

import math

import numpy as np

ZOOM_POINTS = 33
ZOOM_SHRINK = 1e-7  # stop once the bracket is this fraction of its first width


def zoom_max(fn, lo: float, hi: float, points: int = ZOOM_POINTS, shrink: float = ZOOM_SHRINK,
             max_rounds: int = 40) -> tuple[float, float]:
    """Local maximum of a vectorized ``fn`` on [lo, hi] by repeated grid zoom.

    Each round samples ``points`` nodes and keeps the two cells around the
    best one, so the bracket shrinks by ``(points - 1) / 2`` per round.
    """
    best_x, best_v = lo, -math.inf
    stop = shrink * (hi - lo)
    for _ in range(max_rounds):
        xs = np.linspace(lo, hi, points)
        vals = np.asarray(fn(xs), dtype=float)
        if not np.all(np.isfinite(vals)):
            return float(xs[np.argmax(~np.isfinite(vals))]), math.inf
        k = int(np.argmax(vals))
        if vals[k] > best_v:
            best_x, best_v = float(xs[k]), float(vals[k])
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, points - 1)]
        if hi - lo <= stop:
            break
    return best_x, best_v


def argmax_refine(fn, grid: np.ndarray) -> float:
    """Max of a vectorized non-negative ``fn`` over ``grid``, refined near the argmax.

    Returns the larger of the grid maximum and the zoomed value in the two
    cells adjoining the grid argmax. Non-finite samples propagate as inf.
    """
    values = np.asarray(fn(grid), dtype=float)
    if np.any(np.isnan(values)) or np.any(np.isinf(values)):
        return math.inf
    k = int(np.argmax(values))
    best = float(values[k])
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        _, refined = zoom_max(fn, float(lo), float(hi))
        if math.isfinite(refined):
            best = max(best, refined)
    return best
