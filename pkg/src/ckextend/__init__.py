"""Smooth taming multipliers and C^k extensions from open subsets of the line."""
from ckextend.builder import (
    Extension,
    SmoothEvaluator,
    build_complement,
    build_cozero,
    build_extension,
    build_g,
    build_h,
)
from ckextend.catalog import FunctionOracle, make_oracle
from ckextend.opensets import KnotLadder, OpenSet, densify, locate, normalize

__all__ = [
    "Extension",
    "FunctionOracle",
    "KnotLadder",
    "OpenSet",
    "SmoothEvaluator",
    "build_complement",
    "build_cozero",
    "build_extension",
    "build_g",
    "build_h",
    "densify",
    "locate",
    "make_oracle",
    "normalize",
]
