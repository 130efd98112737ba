"""Compilation of a μ-free linear program into an MSPE.

Each node e with free locals x1..xk (in binder order) and type τ owns one
weight variable per (δ, v) with δ ∈ ⟦x1⟧×...×⟦xk⟧ and v ∈ ⟦τ⟧, numbered
base[e] + index(δ)·|τ| + v.  Equations are generated a whole node at a time
with numpy index arithmetic.

Nodes whose value is a function of δ alone (local variables, and tuples,
injections and projections of such nodes) are "deterministic": a parent
looks their value up directly instead of summing over a factor that is 1
at one value and 0 elsewhere.  Their own constant equations are still
emitted so every variable has its defining equation.
"""
from __future__ import annotations

import bisect
from fractions import Fraction

import numpy as np

from .. import core as C
from ..errors import BudgetExceeded, CompileError
from ..solver.system import MSPE
from ..typecheck import TypedProgram
from . import domain as Dm

DEFAULT_MAX_VARS = 20_000_000
_I = np.int64


class _Node:
    __slots__ = ("expr", "id", "names", "sizes", "strides", "D", "T", "base")


class Compiler:
    def __init__(self, tp: TypedProgram, max_vars: int = DEFAULT_MAX_VARS):
        self.tp = tp
        self.max_vars = max_vars
        self.info: dict = {}
        self.det: dict = {}
        self.nvars = 0
        self.order: list = []
        self.chunks: list = []     # (lhs, coef index or array, [factor arrays])
        self.coefs: list = [Fraction(1)]
        self.coef_index = {Fraction(1): 0}
        self.global_root: dict = {}

    # -- layout ----------------------------------------------------------------

    def layout(self):
        tp = self.tp
        for e in tp.nodes():
            if isinstance(e, (C.Fold, C.Unfold)):
                raise CompileError("recursive types must be eliminated before compiling", e.pos)
            n = _Node()
            n.expr = e
            n.id = tp.ids[e]
            env = tp.env[e]
            n.names = tuple(x for x, _ in env)
            n.sizes = tuple(Dm.size(t) for _, t in env)
            strides, s = [], 1
            for k in reversed(n.sizes):
                strides.append(s)
                s *= k
            n.strides = dict(zip(n.names, reversed(strides)))
            n.D = s
            n.T = Dm.size(tp.types[e])
            n.base = self.nvars
            count = n.D * n.T
            if self.nvars + count > self.max_vars:
                raise BudgetExceeded(
                    f"equation system exceeds the budget of {self.max_vars} variables at node {n.id} "
                    f"({C.show_type(tp.types[e])} under {len(n.names)} free variable(s)): "
                    f"|⟦Δ⟧|·|⟦τ⟧| = {n.D}·{n.T} = {count}", e.pos)
            self.nvars += count
            self.info[e] = n
            self.order.append(n)
        for name, body in tp.program.roots():
            self.global_root[name] = self.info[body]
        for n in reversed(self.order):
            self.det[n.expr] = self._is_det(n.expr)

    def _is_det(self, e) -> bool:
        if isinstance(e, C.Var):
            return e.name in self.info[e].strides
        if isinstance(e, C.Tuple):
            return all(self.det[c] for c in e.items)
        if isinstance(e, (C.Inj, C.Proj)):
            return self.det[e.expr]
        return False

    # -- helpers -----------------------------------------------------------------

    def coef(self, w) -> int:
        w = Fraction(w)
        if w not in self.coef_index:
            self.coef_index[w] = len(self.coefs)
            self.coefs.append(w)
        return self.coef_index[w]

    def digits(self, n: _Node, d):
        """name -> value index, for parent environment indices d."""
        return {x: (d // n.strides[x]) % k for x, k in zip(n.names, n.sizes)}

    def cidx(self, c, vals):
        """Environment index of child c given values for (at least) its free locals."""
        n = self.info[c]
        out = 0
        for x in n.names:
            out = out + vals[x] * n.strides[x]
        return out

    def var(self, c, vals, v):
        n = self.info[c]
        return n.base + self.cidx(c, vals) * n.T + v

    def dval(self, e, vals):
        """Value index of a deterministic node (-1 where its weight is zero)."""
        if isinstance(e, C.Var):
            return vals[e.name]
        if isinstance(e, C.Tuple):
            acc = 0
            bad = False
            for c in e.items:
                v = self.dval(c, vals)
                acc = acc * self.info[c].T + v
                bad = bad | (v < 0)
            return np.where(bad, -1, acc)
        t = self.tp.types
        if isinstance(e, C.Inj):
            v = self.dval(e.expr, vals)
            return np.where(v < 0, -1, v + Dm.offsets(t[e])[e.index])
        if isinstance(e, C.Proj):
            v = self.dval(e.expr, vals)
            off = Dm.offsets(t[e.expr])[e.index]
            ok = (v >= off) & (v < off + self.info[e].T)
            return np.where(ok, v - off, -1)
        raise AssertionError("not deterministic")

    def emit(self, lhs, factors=(), mask=None, coef=0):
        arrays = np.broadcast_arrays(lhs, *factors, *(() if mask is None else (mask,)))
        if mask is not None:
            m = arrays[-1]
            arrays = [a[m] for a in arrays[:-1]]
        else:
            arrays = [a.ravel() for a in arrays]
        lhs, facs = arrays[0].astype(_I, copy=False), [a.astype(_I, copy=False) for a in arrays[1:]]
        if lhs.size:
            self.chunks.append((lhs, coef, facs))

    # -- equations -------------------------------------------------------------

    def node(self, n: _Node):
        e = n.expr
        T = n.T
        d = np.arange(n.D, dtype=_I)
        if isinstance(e, C.Var):
            if self.det[e]:
                self.emit_det(n, d)
                return
            root = self.global_root[e.name]
            v = np.arange(T, dtype=_I)
            self.emit(n.base + v, [root.base + v])
            return
        if self.det[e]:
            self.emit_det(n, d)
            return
        vals = self.digits(n, d)
        if isinstance(e, C.Fail):
            return
        if isinstance(e, C.Factor):
            self.copy(n, e.body, d, vals, self.coef(e.weight))
            return
        if isinstance(e, C.Amb):
            self.copy(n, e.left, d, vals)
            self.copy(n, e.right, d, vals)
            return
        if isinstance(e, C.Lam):
            self.lam(n, e, d, vals)
            return
        if isinstance(e, C.App):
            self.app(n, e, d, vals)
            return
        if isinstance(e, C.Tuple):
            self.tuple_(n, e, d, vals)
            return
        if isinstance(e, C.AddTuple):
            offs = Dm.offsets(self.tp.types[e])
            for off, c in zip(offs, e.items):
                self.copy(n, c, d, vals, shift=off)
            return
        if isinstance(e, C.Proj):
            off = Dm.offsets(self.tp.types[e.expr])[e.index]
            dd, v = d[:, None], np.arange(T, dtype=_I)[None, :]
            vv = {x: a[:, None] for x, a in vals.items()}
            self.emit(n.base + dd * T + v, [self.var(e.expr, vv, off + v)])
            return
        if isinstance(e, C.Inj):
            self.copy(n, e.expr, d, vals, shift=Dm.offsets(self.tp.types[e])[e.index])
            return
        if isinstance(e, C.LetTuple):
            bt = self.tp.types[e.bound]
            segs = [(0, Dm.size(bt), lambda u, bt=bt: _split(bt, u, e.vars), e.body)]
            self.sum_over(n, e.bound, segs, d, vals)
            return
        if isinstance(e, C.Case):
            st = self.tp.types[e.scrut]
            segs = []
            for (x, arm), off, at in zip(e.arms, Dm.offsets(st), st.items):
                segs.append((off, Dm.size(at), lambda u, x=x: {x: u}, arm))
            self.sum_over(n, e.scrut, segs, d, vals)
            return
        raise CompileError(f"cannot compile {type(e).__name__}", e.pos)

    def emit_det(self, n, d):
        vals = self.digits(n, d)
        v = self.dval(n.expr, vals)
        v = np.broadcast_to(v, d.shape)
        self.emit(n.base + d * n.T + v, mask=v >= 0)

    def copy(self, n, c, d, vals, coef=0, shift=0):
        """z_n(δ, shift + v) = coef · z_c(δ, v)."""
        if self.det[c]:
            v = np.broadcast_to(self.dval(c, vals), d.shape)
            self.emit(n.base + d * n.T + shift + v, mask=v >= 0, coef=coef)
            return
        Tc = self.info[c].T
        dd, v = d[:, None], np.arange(Tc, dtype=_I)[None, :]
        vv = {x: a[:, None] for x, a in vals.items()}
        self.emit(n.base + dd * n.T + shift + v, [self.var(c, vv, v)], coef=coef)

    def lam(self, n, e, d, vals):
        t = self.tp.types[e]
        A, B = Dm.size(t.dom), Dm.size(t.cod)
        dd = d[:, None, None]
        a = np.arange(A, dtype=_I)[None, :, None]
        vv = {x: y[:, None, None] for x, y in vals.items()}
        vv[e.var] = a
        if self.det[e.body]:
            b = self.dval(e.body, vv)
            b = np.broadcast_to(b, np.broadcast_shapes(dd.shape, a.shape, np.shape(b)))
            self.emit(n.base + dd * n.T + a * B + b, mask=b >= 0)
            return
        b = np.arange(B, dtype=_I)[None, None, :]
        self.emit(n.base + dd * n.T + a * B + b, [self.var(e.body, vv, b)])

    def app(self, n, e, d, vals):
        f, x = e.fn, e.arg
        A = Dm.size(self.tp.types[x])
        B = n.T
        if self.det[f]:
            fv = np.broadcast_to(self.dval(f, vals), d.shape)
            a, v = fv // B, fv % B
            ok = fv >= 0
            lhs = n.base + d * B + v
            if self.det[x]:
                xv = np.broadcast_to(self.dval(x, vals), d.shape)
                self.emit(lhs, mask=ok & (xv == a))
            else:
                self.emit(lhs, [self.var(x, vals, np.where(ok, a, 0))], mask=ok)
            return
        if self.det[x]:
            xv = np.broadcast_to(self.dval(x, vals), d.shape)[:, None]
            dd, v = d[:, None], np.arange(B, dtype=_I)[None, :]
            vv = {k: y[:, None] for k, y in vals.items()}
            ok = np.broadcast_to(xv >= 0, (len(d), B))
            self.emit(n.base + dd * B + v, [self.var(f, vv, np.where(xv >= 0, xv, 0) * B + v)], mask=ok)
            return
        dd = d[:, None, None]
        a = np.arange(A, dtype=_I)[None, :, None]
        v = np.arange(B, dtype=_I)[None, None, :]
        vv = {k: y[:, None, None] for k, y in vals.items()}
        self.emit(n.base + dd * B + v, [self.var(f, vv, a * B + v), self.var(x, vv, a)])

    def tuple_(self, n, e, d, vals):
        # enumerate the values of the nondeterministic components only
        free = [c for c in e.items if not self.det[c]]
        k = len(free)
        shape = (len(d),) + tuple(self.info[c].T for c in free)
        dd = d.reshape((-1,) + (1,) * k)
        vv = {x: y.reshape(dd.shape) for x, y in vals.items()}
        comps, facs = {}, []
        for j, c in enumerate(free):
            s = [1] * (k + 1)
            s[j + 1] = self.info[c].T
            comps[c] = np.arange(self.info[c].T, dtype=_I).reshape(s)
            facs.append(self.var(c, vv, comps[c]))
        v = 0
        ok = np.ones(shape, dtype=bool)
        for c in e.items:
            if self.det[c]:
                cv = self.dval(c, vv)
                ok = ok & (cv >= 0)
                cv = np.where(cv >= 0, cv, 0)
            else:
                cv = comps[c]
            v = v * self.info[c].T + cv
        self.emit(n.base + dd * n.T + v, facs, mask=ok)

    def sum_over(self, n, scrut, segs, d, vals):
        """z_n(δ, v) = Σ_seg Σ_u z_scrut(δ, off + u) · z_arm(δ ∪ binders(u), v)."""
        T = n.T
        if self.det[scrut]:
            sv = np.broadcast_to(self.dval(scrut, vals), d.shape)
            for off, U, bind, arm in segs:
                sel = (sv >= off) & (sv < off + U)
                if not sel.any():
                    continue
                ds = d[sel]
                u = sv[sel] - off
                vv = {x: y[sel] for x, y in vals.items()}
                vv.update(bind(u))
                if self.det[arm]:
                    av = np.broadcast_to(self.dval(arm, vv), ds.shape)
                    self.emit(n.base + ds * T + av, mask=av >= 0)
                else:
                    vv = {x: np.asarray(y)[:, None] for x, y in vv.items()}
                    v = np.arange(T, dtype=_I)[None, :]
                    self.emit(n.base + ds[:, None] * T + v, [self.var(arm, vv, v)])
            return
        for off, U, bind, arm in segs:
            dd = d[:, None, None]
            u = np.arange(U, dtype=_I)[None, :, None]
            vv = {x: y[:, None, None] for x, y in vals.items()}
            vv.update(bind(u))
            sfac = self.var(scrut, vv, off + u)
            if self.det[arm]:
                av = self.dval(arm, vv)
                av = np.broadcast_to(av, np.broadcast_shapes(dd.shape, u.shape, np.shape(av)))
                self.emit(n.base + dd * T + av, [sfac], mask=av >= 0)
            else:
                v = np.arange(T, dtype=_I)[None, None, :]
                self.emit(n.base + dd * T + v, [sfac, self.var(arm, vv, v)])

    # -- assembly ----------------------------------------------------------------

    def run(self) -> MSPE:
        self.layout()
        for n in self.order:
            self.node(n)
        lhs_parts, cidx_parts, ptr_parts, fac_parts = [], [], [], []
        off = 0
        for lhs, coef, facs in self.chunks:
            k = len(facs)
            N = len(lhs)
            lhs_parts.append(lhs)
            cidx_parts.append(np.full(N, coef, dtype=_I))
            ptr_parts.append(off + k * np.arange(N, dtype=_I))
            if k:
                fac_parts.append(np.stack(facs, axis=1).ravel())
            off += k * N
        cat = (lambda parts: np.concatenate(parts) if parts else np.zeros(0, dtype=_I))
        ptr = np.concatenate(ptr_parts + [np.array([off], dtype=_I)])
        main = self.info[self.tp.program.main]
        mt = self.tp.types[self.tp.program.main]
        roots = [(Dm.render(mt, v), main.base + v) for v in range(main.T)]
        m = MSPE(self.nvars, cat(lhs_parts), cat(cidx_parts), self.coefs, ptr, cat(fac_parts), roots,
                 _Namer(self))
        if not C.is_positive(mt):
            m.warnings.append(f"the result type {C.show_type(mt)} is not first-order; "
                              "the distribution is over its input-output pairs")
        return m


def _split(t: C.Type, u, names):
    """Component value indices of tensor value u, bound to `names`."""
    out = {}
    for x, s in zip(reversed(names), reversed(t.items)):
        k = Dm.size(s)
        out[x] = u % k
        u = u // k
    return out


class _Namer:
    """Readable names for weight variables, computed on demand."""

    def __init__(self, comp: Compiler):
        self.bases = [n.base for n in comp.order]
        self.nodes = comp.order
        self.types = comp.tp.types
        self.envs = comp.tp.env

    def __call__(self, i: int) -> str:
        k = bisect.bisect_right(self.bases, i) - 1
        n = self.nodes[k]
        d, v = divmod(i - n.base, n.T)
        parts = []
        for (x, t), size, in zip(self.envs[n.expr], n.sizes):
            parts.append(f"{x}={Dm.render(t, (d // n.strides[x]) % size)}")
        env = ",".join(sorted(parts))
        return f"e{n.id}[{env}]:{Dm.render(self.types[n.expr], v)}"


def compile_mspe(tp: TypedProgram, max_vars: int = DEFAULT_MAX_VARS) -> MSPE:
    """Equations whose least solution gives the weight of every (node, δ, value)."""
    return Compiler(tp, max_vars).run()


def count_variables(tp: TypedProgram) -> int:
    """Σ over nodes of |⟦Δ⟧|·|⟦τ⟧|, computed directly from the annotations."""
    total = 0
    for e in tp.nodes():
        k = Dm.size(tp.types[e])
        for _, t in tp.env[e]:
            k *= Dm.size(t)
        total += k
    return total
