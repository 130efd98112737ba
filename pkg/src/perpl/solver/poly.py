"""Small polynomial systems over [0, ∞] and the dense matrix algebra used on
them.  Generic code works on lists (exact or float); the float fast path
goes through the kernels on numpy arrays."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import extreal as X
from .kernels import backend


@dataclass
class PolySystem:
    """Equations z_i = Σ coef · Π z_f over local variables 0..n-1."""

    n: int
    monomials: list[tuple[int, object, tuple[int, ...]]] = field(default_factory=list)

    def add(self, lhs: int, coef, factors=()) -> None:
        self.monomials.append((lhs, coef, tuple(factors)))

    def degree(self) -> int:
        return max((len(f) for _, _, f in self.monomials), default=0)

    def arrays(self):
        lhs = np.array([m[0] for m in self.monomials], dtype=np.int64)
        coef = np.array([float(m[1]) for m in self.monomials], dtype=np.float64)
        ptr = np.zeros(len(self.monomials) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(m[2]) for m in self.monomials])
        fac = np.array([f for m in self.monomials for f in m[2]], dtype=np.int64)
        return lhs, coef, ptr, fac


def evaluate(sys: PolySystem, z: list) -> list:
    out = [0] * sys.n
    for lhs, c, fs in sys.monomials:
        p = c
        for f in fs:
            p = X.mul(p, z[f])
            if p == 0:
                break
        out[lhs] = X.add(out[lhs], p)
    return out


def jacobian(sys: PolySystem, z: list) -> list[list]:
    jac = [[0] * sys.n for _ in range(sys.n)]
    for lhs, c, fs in sys.monomials:
        for k, f in enumerate(fs):
            p = c
            for q, g in enumerate(fs):
                if q != k:
                    p = X.mul(p, z[g])
            jac[lhs][f] = X.add(jac[lhs][f], p)
    return jac


def matrix_star_generic(a: list[list]) -> list[list]:
    """Lehmann's closure over lists of exact or float entries."""
    n = len(a)
    m = [list(row) for row in a]
    for k in range(n):
        c = X.star(m[k][k])
        col = [m[i][k] for i in range(n)]
        row = [X.mul(c, m[k][j]) for j in range(n)]
        for i in range(n):
            ci = col[i]
            if ci == 0:
                continue
            mi = m[i]
            for j in range(n):
                if row[j] != 0:
                    mi[j] = X.add(mi[j], X.mul(ci, row[j]))
    for i in range(n):
        m[i][i] = X.add(m[i][i], 1)
    return m


def matrix_star(a):
    """A* = I + A + A² + ..., the least solution of A* = I + A·A*.

    numpy float arrays use the compiled kernel; anything else (lists,
    Fractions) uses the generic version."""
    if isinstance(a, np.ndarray) and a.dtype.kind == "f":
        return backend.matrix_star(np.ascontiguousarray(a, dtype=np.float64))
    return matrix_star_generic(a)


def matvec_generic(a: list[list], x: list) -> list:
    out = []
    for row in a:
        s = 0
        for aij, xj in zip(row, x):
            if aij != 0 and xj != 0:
                s = X.add(s, X.mul(aij, xj))
        out.append(s)
    return out


def linear_parts(sys: PolySystem):
    """Split a degree ≤ 1 system into (A, b) with x = A x + b."""
    n = sys.n
    a = [[0] * n for _ in range(n)]
    b = [0] * n
    for lhs, c, fs in sys.monomials:
        if len(fs) == 0:
            b[lhs] = X.add(b[lhs], c)
        elif len(fs) == 1:
            a[lhs][fs[0]] = X.add(a[lhs][fs[0]], c)
        else:
            raise ValueError("system is not linear")
    return a, b


def solve_linear(sys: PolySystem, exact: bool = False) -> list:
    """Least solution of a linear system: x = A* b."""
    a, b = linear_parts(sys)
    if exact:
        a = [[X.convert(v, True) for v in row] for row in a]
        b = [X.convert(v, True) for v in b]
        return matvec_generic(matrix_star_generic(a), b)
    af = np.array(a, dtype=np.float64).reshape(sys.n, sys.n)
    bf = np.array(b, dtype=np.float64)
    return backend.matvec(backend.matrix_star(af), bf).tolist()


def kleene(sys: PolySystem, steps: int = 10_000, exact: bool = False) -> list:
    """Fixed-point iteration z ← P(z) from 0 (a slow but simple oracle)."""
    z = [X.zero(exact)] * sys.n
    if not exact:
        # padded dense evaluation, deliberately independent of the kernels
        deg = sys.degree()
        lhs = np.array([m[0] for m in sys.monomials], dtype=np.int64)
        coef = np.array([float(m[1]) for m in sys.monomials])
        idx = np.full((len(sys.monomials), deg), sys.n, dtype=np.int64)
        for i, (_, _, fs) in enumerate(sys.monomials):
            idx[i, :len(fs)] = fs
        zf = np.zeros(sys.n + 1)
        zf[sys.n] = 1.0
        for _ in range(steps):
            new = np.zeros(sys.n + 1)
            new[sys.n] = 1.0
            with np.errstate(invalid="ignore"):
                vals = coef * np.prod(zf[idx], axis=1)
            vals[np.isnan(vals)] = 0.0
            np.add.at(new, lhs, vals)
            if np.array_equal(new, zf):
                break
            zf = new
        return zf[:sys.n].tolist()
    for _ in range(steps):
        z = evaluate(sys, z)
    return z
