"""Affine programs to strictly linear ones.

Every function and additive type gains a `& Unit` component that consumes
the same context as the original value but returns (), so a value that the
affine program drops can be discarded explicitly.  Variables a subterm does
not consume are discarded right where they go out of use; recursive types
get a global discard function each.
"""
from __future__ import annotations

from .. import core as C
from ..typecheck import LINEAR, TypedProgram, typecheck


def lin_type(t: C.Type) -> C.Type:
    if isinstance(t, C.TArrow):
        return C.TWith((C.TArrow(lin_type(t.dom), lin_type(t.cod)), C.UNIT))
    if isinstance(t, C.TWith):
        return C.TWith((C.TWith(tuple(lin_type(s) for s in t.items)), C.UNIT))
    if isinstance(t, (C.TTensor, C.TSum)):
        return type(t)(tuple(lin_type(s) for s in t.items))
    if isinstance(t, C.TMu):
        return C.TMu(t.name, t.tag, t.var, lin_type(t.body))
    return t


def discard_name(tag) -> str:
    return f"$discard_{tag}"


class Linearizer:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.count = 0
        self.discards: dict = {}   # tag -> mu (original), in order of first need
        self.done: set = set()

    def fresh(self) -> str:
        self.count += 1
        return f"$z{self.count}"

    # -- discarding ----------------------------------------------------------

    def zap(self, x: str, t: C.Type) -> C.Expr:
        """Code of type Unit consuming the variable x (whose original type is t)."""
        if C.is_positive(t):
            return C.unit()
        if isinstance(t, (C.TArrow, C.TWith)):
            return C.Proj(C.Var(x), 1)
        if isinstance(t, C.TMu):
            self.discards.setdefault(t.tag, t)
            return C.App(C.Var(discard_name(t.tag)), C.Var(x))
        if isinstance(t, C.TTensor):
            names = tuple(self.fresh() for _ in t.items)
            body = C.unit()
            for n, s in reversed(list(zip(names, t.items))):
                if not C.is_positive(s):
                    body = C.let_unit(self.zap(n, s), body)
            return C.LetTuple(names, C.Var(x), body)
        if isinstance(t, C.TSum):
            arms = []
            for s in t.items:
                n = self.fresh()
                arms.append((n, self.zap(n, s)))
            return C.Case(C.Var(x), tuple(arms), ty=lin_type(t))
        raise TypeError(f"cannot discard a value of type {C.show_type(t)}")

    def zap_all(self, names, ctx, body: C.Expr) -> C.Expr:
        for x in sorted(names, key=lambda n: ctx[n][1], reverse=True):
            body = C.let_unit(self.zap(x, ctx[x][0]), body)
        return body

    def discard_global(self, mu: C.TMu) -> C.Global:
        f, u = self.fresh(), self.fresh()
        lmu = lin_type(mu)
        body = C.Lam(f, lmu, C.Unfold(lmu, u, C.Var(f), self.zap(u, C.unroll(mu))))
        return C.Global(discard_name(mu.tag), body, C.TArrow(lmu, C.UNIT))

    # -- terms -----------------------------------------------------------------

    def bind(self, ctx, names_types):
        out = dict(ctx)
        depth = len(ctx)
        for i, (x, t) in enumerate(names_types):
            out[x] = (t, depth + i)
        return out

    def binder_avail(self, rest, names_types):
        return rest | {x for x, t in names_types if not C.is_positive(t)}

    def term(self, e: C.Expr, avail: frozenset, ctx) -> C.Expr:
        tp = self.tp
        if isinstance(e, C.Fail):
            return C.Fail(lin_type(e.ty), pos=e.pos)
        uses = tp.delta[e]
        out = self.core(e, uses, ctx)
        return self.zap_all(avail - uses, ctx, out)

    def lam(self, e: C.Lam, uses, ctx) -> C.Lam:
        inner = self.bind(ctx, [(e.var, e.ty)])
        avail = self.binder_avail(uses, [(e.var, e.ty)])
        return C.Lam(e.var, lin_type(e.ty), self.term(e.body, avail, inner), pos=e.pos)

    def core(self, e: C.Expr, uses: frozenset, ctx) -> C.Expr:
        tp = self.tp
        d = tp.delta
        if isinstance(e, C.Var):
            return C.Var(e.name, pos=e.pos)
        if isinstance(e, C.Lam):
            return C.AddTuple((self.lam(e, uses, ctx), self.zap_all(uses, ctx, C.unit())), pos=e.pos)
        if isinstance(e, C.App):
            arg = self.term(e.arg, d[e.arg], ctx)
            if isinstance(e.fn, C.Lam):
                return C.App(self.lam(e.fn, d[e.fn], ctx), arg, pos=e.pos)
            return C.App(C.Proj(self.term(e.fn, d[e.fn], ctx), 0), arg, pos=e.pos)
        if isinstance(e, C.Amb):
            return C.Amb(self.term(e.left, uses, ctx), self.term(e.right, uses, ctx), pos=e.pos)
        if isinstance(e, C.Factor):
            return C.Factor(e.weight, self.term(e.body, uses, ctx), pos=e.pos)
        if isinstance(e, C.Tuple):
            return C.Tuple(tuple(self.term(c, d[c], ctx) for c in e.items), pos=e.pos)
        if isinstance(e, C.AddTuple):
            inner = C.AddTuple(tuple(self.term(c, uses, ctx) for c in e.items), pos=e.pos)
            return C.AddTuple((inner, self.zap_all(uses, ctx, C.unit())), pos=e.pos)
        if isinstance(e, C.Proj):
            return C.Proj(C.Proj(self.term(e.expr, uses, ctx), 0), e.index, pos=e.pos)
        if isinstance(e, C.Inj):
            return C.Inj(e.index, lin_type(e.ty), self.term(e.expr, uses, ctx), pos=e.pos)
        if isinstance(e, C.Fold):
            return C.Fold(lin_type(e.ty), self.term(e.expr, uses, ctx), pos=e.pos)
        if isinstance(e, C.LetTuple):
            bound = self.term(e.bound, d[e.bound], ctx)
            nts = list(zip(e.vars, tp.types[e.bound].items))
            avail = self.binder_avail(uses - d[e.bound], nts)
            body = self.term(e.body, avail, self.bind(ctx, nts))
            return C.LetTuple(e.vars, bound, body, pos=e.pos)
        if isinstance(e, C.Case):
            scrut = self.term(e.scrut, d[e.scrut], ctx)
            rest = uses - d[e.scrut]
            arms = []
            for (x, arm), at in zip(e.arms, tp.types[e.scrut].items):
                nts = [(x, at)]
                arms.append((x, self.term(arm, self.binder_avail(rest, nts), self.bind(ctx, nts))))
            return C.Case(scrut, tuple(arms), ty=lin_type(tp.types[e.scrut]), pos=e.pos)
        if isinstance(e, C.Unfold):
            bound = self.term(e.bound, d[e.bound], ctx)
            nts = [(e.var, C.unroll(e.ty))]
            avail = self.binder_avail(uses - d[e.bound], nts)
            body = self.term(e.body, avail, self.bind(ctx, nts))
            return C.Unfold(lin_type(e.ty), e.var, bound, body, pos=e.pos)
        raise TypeError(f"unexpected expression {type(e).__name__}")

    def run(self) -> C.CoreProgram:
        p = self.tp.program
        gl = []
        for g in p.globals:
            body = self.term(g.body, frozenset(), {})
            gl.append(C.Global(g.name, body, lin_type(g.ty), g.pos))
        main = self.term(p.main, frozenset(), {})
        # discard functions may need further discard functions
        while len(self.done) < len(self.discards):
            for tag, mu in list(self.discards.items()):
                if tag not in self.done:
                    self.done.add(tag)
                    gl.append(self.discard_global(mu))
        return C.CoreProgram(gl, main)


def linearize(tp: TypedProgram) -> TypedProgram:
    """Rewrite an affine-checked program so that it checks in linear mode."""
    out = Linearizer(tp).run()
    return typecheck(out, LINEAR)
