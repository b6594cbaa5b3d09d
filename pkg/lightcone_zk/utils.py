"""
utils.py — Shared utility functions.

Covers:
  • Exact integer / rational cube roots with a float fallback
  • Bit-length helpers for arbitrary-precision moduli
  • JSON encoding of Fractions and numpy scalars
  • Clopper–Pearson confidence intervals for win rates
"""

import json
import logging
import math
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np
from scipy.stats import binomtest

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, float]


# ─── Roots and Logarithms ────────────────────────────────────

def integer_cube_root(x: int) -> int:
    """Largest r ≥ 0 with r³ ≤ x (exact for arbitrarily large x)."""
    if x < 0:
        raise ValueError("integer_cube_root needs x ≥ 0")
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + 2) // 3)
    # Newton iteration from above
    while True:
        s = (2 * r + x // (r * r)) // 3
        if s >= r:
            break
        r = s
    while r ** 3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def exact_cube_root(value: Number) -> Optional[Fraction]:
    """Return the cube root as a Fraction when `value` is a rational perfect cube."""
    if isinstance(value, float):
        value = Fraction(value)
    value = Fraction(value)
    if value < 0:
        root = exact_cube_root(-value)
        return -root if root is not None else None
    num_root = integer_cube_root(value.numerator)
    den_root = integer_cube_root(value.denominator)
    if num_root ** 3 == value.numerator and den_root ** 3 == value.denominator:
        return Fraction(num_root, den_root)
    return None


def cube_root(value: Number) -> Tuple[float, bool]:
    """Cube root as (float, exact?); exact when the radicand is a rational cube."""
    root = exact_cube_root(value)
    if root is not None:
        return float(root), True
    v = float(value)
    return math.copysign(abs(v) ** (1.0 / 3.0), v), False


def ceil_log2(x: int) -> int:
    """⌈log₂ x⌉ for a positive integer, exact at any size."""
    if x < 1:
        raise ValueError("ceil_log2 needs x ≥ 1")
    return (x - 1).bit_length()


# ─── Statistics ──────────────────────────────────────────────

def win_rate_interval(wins: int, trials: int, confidence: float) -> Tuple[float, float]:
    """Exact (Clopper–Pearson) confidence interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(wins, trials).proportion_ci(confidence_level=confidence, method="exact")
    return float(ci.low), float(ci.high)


# ─── JSON Helpers ────────────────────────────────────────────

def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def to_json(obj, pretty: bool = False) -> str:
    """Serialize a report; Fractions become exact strings like "2/3"."""
    if pretty:
        return json.dumps(obj, default=_json_default, indent=2, sort_keys=True)
    return json.dumps(obj, default=_json_default, sort_keys=True, separators=(",", ":"))
