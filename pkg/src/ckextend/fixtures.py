"""The standard fixture set: catalog functions crossed with representative open sets."""
from __future__ import annotations

import numpy as np

from ckextend.catalog import FunctionOracle, make_oracle
from ckextend.opensets import OpenSet, normalize

RANDOM_SEED = 20240518


def random_intervals(count: int = 10, seed: int = RANDOM_SEED) -> OpenSet:
    """``count`` disjoint intervals in (0, count), one per unit cell.

    Lengths lie in [0.1, 0.9] and gaps are at least 0.1, so every component of
    the densified set has length >= 0.1 (threshold p <= 10).
    """
    rng = np.random.default_rng(seed)
    raw = []
    for cell in range(count):
        lo = cell + rng.uniform(0.05, 0.45)
        hi = cell + rng.uniform(0.55, 0.95)
        raw.append([round(float(lo), 6), round(float(hi), 6)])
    return normalize(raw)


OPEN_SETS = {
    "unit": lambda: normalize([[0, 1]]),
    "two_intervals": lambda: normalize([[0, 1], [2, 3]]),
    "half_lines": lambda: normalize([["-inf", 0], [1, "inf"]]),
    "random10": random_intervals,
}

FUNCTIONS = {
    "constant": ("constant", {"c": 1.0}),
    "reciprocal": ("reciprocal", {}),
    "sin_reciprocal": ("sin_reciprocal", {}),
    "exp": ("exp", {}),
    "ck_only_k2": ("ck_only", {"k": 2}),
}


def standard_fixtures() -> list[tuple[str, FunctionOracle]]:
    """Every function paired with every open set it is defined on."""
    out = []
    for set_name, make_set in OPEN_SETS.items():
        U = make_set()
        for fn_name, (fid, params) in FUNCTIONS.items():
            out.append((f"{fn_name}@{set_name}", make_oracle(fid, params, U)))
    return out
