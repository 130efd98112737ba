"""Monotone systems of polynomial equations in flat array form.

Monomial m contributes coef_table[coef_idx[m]] · Π z[fac[ptr[m]:ptr[m+1]]]
to the equation of variable lhs[m].  Coefficients are kept as exact
rationals; the float solver converts them once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np


def _default_name(i: int) -> str:
    return f"z{i}"


@dataclass
class MSPE:
    nvars: int
    lhs: np.ndarray
    coef_idx: np.ndarray
    coef_table: list
    ptr: np.ndarray
    fac: np.ndarray
    roots: list = field(default_factory=list)  # (rendered value, var index)
    namer: Callable[[int], str] = _default_name
    warnings: list = field(default_factory=list)

    @classmethod
    def from_equations(cls, nvars: int, monomials, roots=(), namer=_default_name) -> "MSPE":
        """Build from (lhs, coef, factors) triples; coefficients may be
        ints, Fractions, decimal strings or floats."""
        table: list = []
        index: dict = {}
        lhs, cidx, ptr, fac = [], [], [0], []
        for l, c, fs in monomials:
            c = Fraction(c)
            if c not in index:
                index[c] = len(table)
                table.append(c)
            lhs.append(l)
            cidx.append(index[c])
            fac.extend(fs)
            ptr.append(len(fac))
        return cls(nvars, np.array(lhs, dtype=np.int64), np.array(cidx, dtype=np.int64), table,
                   np.array(ptr, dtype=np.int64), np.array(fac, dtype=np.int64), list(roots), namer)

    @property
    def nmonomials(self) -> int:
        return len(self.lhs)

    def name(self, i: int) -> str:
        return self.namer(i)

    def monomials(self):
        ptr = self.ptr.tolist()
        fac = self.fac.tolist()
        cidx = self.coef_idx.tolist()
        for m, l in enumerate(self.lhs.tolist()):
            yield l, self.coef_table[cidx[m]], fac[ptr[m]:ptr[m + 1]]

    def equations(self) -> list[list]:
        eqs: list[list] = [[] for _ in range(self.nvars)]
        for l, c, fs in self.monomials():
            eqs[l].append((c, fs))
        return eqs

    def to_json(self) -> dict:
        return {
            "vars": [self.name(i) for i in range(self.nvars)],
            "eqs": [
                {"lhs": i, "monomials": [{"coef": str(c), "vars": list(fs)} for c, fs in eq]}
                for i, eq in enumerate(self.equations())
            ],
            "roots": [{"value": v, "var": i} for v, i in self.roots],
        }

    def to_text(self, digits: int = 3) -> str:
        lines = []
        for i, eq in enumerate(self.equations()):
            terms = []
            for c, fs in eq:
                parts = [] if (c == 1 and fs) else [_short(c, digits)]
                parts += [f"z{f}" for f in fs]
                terms.append("*".join(parts))
            lines.append(f"z{i} = " + (" + ".join(terms) if terms else "0"))
        for v, i in self.roots:
            lines.append(f"root {v} = z{i}")
        return "\n".join(lines)


def _short(c: Fraction, digits: int) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{float(c):.{digits}g}"
