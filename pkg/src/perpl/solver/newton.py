"""Newton's method for the least solution of a polynomial system.

    z ← z + J(z)* · (P(z) − z),   starting from z = 0,

where J is the Jacobian of P and the star is the matrix closure.  The
iterates increase monotonically towards the least fixed point.
"""
from __future__ import annotations

import sys as _sys
from dataclasses import dataclass, field

import numpy as np

from . import extreal as X
from .kernels import backend
from .poly import PolySystem, evaluate, jacobian, matrix_star_generic, matvec_generic

_EPS = _sys.float_info.epsilon


class MonotonicityError(AssertionError):
    pass


@dataclass
class NewtonResult:
    values: list
    iterations: int
    residual: object
    converged: bool
    history: list = field(default_factory=list)
    inf_iteration: int | None = None


class _ExactOps:
    def __init__(self, sys: PolySystem):
        self.sys = PolySystem(sys.n, [(l, X.convert(c, True), f) for l, c, f in sys.monomials])

    def zeros(self):
        return [X.zero(True)] * self.sys.n

    def P(self, z):
        return evaluate(self.sys, z)

    def step(self, z, r):
        s = matrix_star_generic(jacobian(self.sys, z))
        return matvec_generic(s, r)

    def residual(self, pz, z):
        return [X.sub(a, b) for a, b in zip(pz, z)]

    def add(self, a, b):
        return [X.add(x, y) for x, y in zip(a, b)]

    def copy(self, z):
        return list(z)

    def max(self, v):
        return max(v, default=0)

    def leq(self, a, b):
        return all(x <= y for x, y in zip(a, b))

    def has_inf(self, z):
        return any(x == X.INF for x in z)

    def to_list(self, z):
        return list(z)


class _FloatOps:
    def __init__(self, sys: PolySystem):
        self.n = sys.n
        self.lhs, self.coef, self.ptr, self.fac = sys.arrays()

    def zeros(self):
        return np.zeros(self.n)

    def P(self, z):
        return backend.poly_eval(self.n, self.lhs, self.coef, self.ptr, self.fac, z)

    def step(self, z, r):
        jac = backend.poly_jacobian(self.n, self.lhs, self.coef, self.ptr, self.fac, z)
        return backend.matvec(backend.matrix_star(jac), r)

    def residual(self, pz, z):
        both_inf = np.isinf(pz) & np.isinf(z)
        with np.errstate(invalid="ignore"):
            r = pz - z
        r[both_inf] = 0.0
        r[r < 0] = 0.0
        # differences at the rounding level of P(z) are noise, not progress
        scale = np.where(np.isinf(pz), 0.0, np.maximum(pz, z))
        r[(r <= 64 * _EPS * scale) & ~np.isinf(r)] = 0.0
        return r

    def add(self, a, b):
        return a + b

    def copy(self, z):
        return z.copy()

    def max(self, v):
        return float(np.max(v)) if len(v) else 0.0

    def leq(self, a, b):
        return bool(np.all(a <= b))

    def has_inf(self, z):
        return bool(np.any(np.isinf(z)))

    def to_list(self, z):
        return z.tolist()


def newton_solve(sys: PolySystem, max_iters: int = 200, tol=1e-12, exact: bool = False,
                 record: bool = True) -> NewtonResult:
    """Run Newton's method until both the residual max(P(z) − z) and the
    next step are at most `tol`, or `max_iters` updates have been made."""
    ops = _ExactOps(sys) if exact else _FloatOps(sys)
    z = ops.zeros()
    history = []
    inf_iteration = None
    iterations = 0
    tol = X.convert(tol, exact)
    residual = None
    while True:
        r = ops.residual(ops.P(z), z)
        residual = ops.max(r)
        d = None
        if residual <= tol:
            d = ops.step(z, r)
            if ops.max(d) <= tol:
                return NewtonResult(ops.to_list(z), iterations, residual, True, history, inf_iteration)
        if iterations >= max_iters:
            return NewtonResult(ops.to_list(z), iterations, residual, False, history, inf_iteration)
        if d is None:
            d = ops.step(z, r)
        new = ops.add(z, d)
        if not ops.leq(z, new):
            raise MonotonicityError(f"Newton iterate decreased at iteration {iterations + 1}")
        z = new
        iterations += 1
        if record:
            history.append(ops.to_list(ops.copy(z)))
        if inf_iteration is None and ops.has_inf(z):
            inf_iteration = iterations
