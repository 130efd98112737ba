"""Arithmetic on [0, ∞].

Values are Python floats or `Fraction`s; infinity is `math.inf` in both
backends.  The only deviations from ordinary arithmetic are 0·∞ = 0,
truncated subtraction and ∞ − ∞ = 0.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

INF = math.inf
Ext = Union[float, Fraction]


def is_inf(a: Ext) -> bool:
    return a == INF


def add(a: Ext, b: Ext) -> Ext:
    return a + b


def mul(a: Ext, b: Ext) -> Ext:
    if a == 0:
        return a
    if b == 0:
        return b
    return a * b


def sub(a: Ext, b: Ext) -> Ext:
    """Truncated subtraction: max(a − b, 0), with ∞ − ∞ = 0."""
    if a == INF:
        return 0 if b == INF else INF
    if b == INF:
        return a - a
    d = a - b
    return d if d > 0 else d - d


def star(a: Ext) -> Ext:
    """Σ_k a^k: 1/(1 − a) below one, ∞ otherwise."""
    if a < 1:
        if isinstance(a, int):
            a = Fraction(a)
        return 1 / (1 - a)
    return INF


def zero(exact: bool) -> Ext:
    return Fraction(0) if exact else 0.0


def one(exact: bool) -> Ext:
    return Fraction(1) if exact else 1.0


def convert(a, exact: bool) -> Ext:
    """Coerce a number (or "inf") into the chosen backend."""
    if a == INF or a == "inf":
        return INF
    if exact:
        return Fraction(a)
    return float(a)


def render(a: Ext):
    """JSON-friendly rendering: a number, or the string "inf"."""
    if a == INF:
        return "inf"
    if isinstance(a, Fraction):
        return a.numerator if a.denominator == 1 else float(a)
    return float(a)


def render_exact(a: Ext) -> str:
    if a == INF:
        return "inf"
    if isinstance(a, Fraction):
        return str(a)
    return repr(float(a))
