"""Usage checking on a fully annotated program.

Every local whose type is positive is classical and may be used freely.
Other locals are tracked by name: multiplicative constructs (application,
tensors, let-tuple, case scrutinee vs. arms, unfold) must split them
disjointly, additive constructs (amb, case arms, additive tuples) share
them.  In affine mode a binding may go unused and branches may differ; in
linear mode every binding is used exactly once, except that `fail`
absorbs anything, so a branch that always fails may drop variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .. import core as C
from ..errors import TypeError_

AFFINE = "affine"
LINEAR = "linear"


@dataclass
class TypedProgram:
    program: C.CoreProgram
    global_types: dict
    mode: str
    types: dict = field(default_factory=dict)     # node -> type
    env: dict = field(default_factory=dict)       # node -> ((name, type), ...) free locals
    delta: dict = field(default_factory=dict)     # node -> frozenset of consumed nonpositive locals
    absorbing: set = field(default_factory=set)   # nodes whose linear context is unconstrained
    ids: dict = field(default_factory=dict)       # node -> preorder index

    def nodes(self):
        for _, body in self.program.roots():
            yield from C.preorder(body)

    def all_types(self):
        """Every type mentioned by the program, in order of appearance."""
        for g in self.program.globals:
            yield self.global_types[g.name]
        for n in self.nodes():
            yield self.types[n]


def _show(t):
    return C.show_type(t)


class Checker:
    def __init__(self, program: C.CoreProgram, mode: str):
        self.program = program
        self.mode = mode
        self.gtypes: dict = {}
        self.tp = None

    def fail(self, msg, pos):
        raise TypeError_(msg, pos)

    def expect(self, expected, actual, pos, what):
        if expected != actual:
            self.fail(f"type mismatch in {what}: expected {_show(expected)}, got {_show(actual)}", pos)

    def run(self) -> TypedProgram:
        for g in self.program.globals:
            if g.ty is None:
                self.fail(f"definition '{g.name}' has no type annotation", g.pos)
            if g.name in self.gtypes:
                self.fail(f"duplicate definition of '{g.name}'", g.pos)
            self.gtypes[g.name] = g.ty
        self.tp = TypedProgram(self.program, self.gtypes, self.mode)
        for g in self.program.globals:
            t, _, _, _ = self.go(g.body, {}, g.pos)
            self.expect(g.ty, t, g.pos, f"definition of '{g.name}'")
        self.go(self.program.main, {}, self.program.main.pos)
        k = 0
        for n in self.tp.nodes():
            self.tp.ids[n] = k
            k += 1
        return self.tp

    # the walk returns (type, free locals, consumed nonpositive locals, absorbing)
    def go(self, e, ctx, pos):
        pos = e.pos or pos
        t, free, uses, flex = self._go(e, ctx, pos)
        tp = self.tp
        tp.types[e] = t
        tp.env[e] = tuple(sorted(((x, ctx[x][0]) for x in free), key=lambda p: ctx[p[0]][1]))
        tp.delta[e] = uses
        if flex:
            tp.absorbing.add(e)
        return t, free, uses, flex

    def bind(self, ctx, names_types):
        depth = len(ctx)
        out = dict(ctx)
        for i, (x, t) in enumerate(names_types):
            out[x] = (t, depth + i)
        return out

    def unused_check(self, names_types, uses, flex, pos):
        if self.mode != LINEAR or flex:
            return
        for x, t in names_types:
            if not C.is_positive(t) and x not in uses:
                self.fail(f"linear variable '{x}' is never used", pos)

    def mult(self, parts, pos):
        seen: dict = {}
        for _, _, uses, _ in parts:
            for x in uses:
                if x in seen:
                    self.fail(f"linear variable '{x}' is used more than once", pos)
                seen[x] = True
        free = frozenset().union(*(p[1] for p in parts)) if parts else frozenset()
        return free, frozenset(seen), any(p[3] for p in parts)

    def add(self, parts, pos, what):
        free = frozenset().union(*(p[1] for p in parts)) if parts else frozenset()
        strict = [p for p in parts if not p[3]]
        if self.mode == LINEAR:
            if strict:
                first = strict[0][2]
                for p in strict[1:]:
                    if p[2] != first:
                        diff = sorted(first ^ p[2])
                        self.fail(f"branches of {what} use different linear variables: {', '.join(diff)}", pos)
                # an absorbing branch accepts any context containing what it uses
                for p in parts:
                    if p[3] and not p[2] <= first:
                        diff = sorted(p[2] - first)
                        self.fail(f"branches of {what} use different linear variables: {', '.join(diff)}", pos)
                uses = first
            else:
                uses = frozenset().union(*(p[2] for p in parts)) if parts else frozenset()
        else:
            uses = frozenset().union(*(p[2] for p in parts)) if parts else frozenset()
        return free, uses, not strict

    def _go(self, e, ctx, pos):
        if isinstance(e, C.Var):
            if e.name in ctx:
                t = ctx[e.name][0]
                return t, frozenset([e.name]), (frozenset() if C.is_positive(t) else frozenset([e.name])), False
            if e.name in self.gtypes:
                return self.gtypes[e.name], frozenset(), frozenset(), False
            self.fail(f"unbound variable '{e.name}'", pos)
        if isinstance(e, C.Lam):
            if e.ty is None:
                self.fail(f"abstraction over '{e.var}' has no type annotation", pos)
            bt, bf, bu, bflex = self.go(e.body, self.bind(ctx, [(e.var, e.ty)]), pos)
            self.unused_check([(e.var, e.ty)], bu, bflex, pos)
            return C.TArrow(e.ty, bt), bf - {e.var}, bu - {e.var}, bflex
        if isinstance(e, C.App):
            f = self.go(e.fn, ctx, pos)
            a = self.go(e.arg, ctx, pos)
            if not isinstance(f[0], C.TArrow):
                self.fail(f"applying a non-function of type {_show(f[0])}", pos)
            self.expect(f[0].dom, a[0], pos, "application argument")
            return (f[0].cod,) + self.mult([f, a], pos)
        if isinstance(e, C.Amb):
            l = self.go(e.left, ctx, pos)
            r = self.go(e.right, ctx, pos)
            self.expect(l[0], r[0], pos, "amb branches")
            return (l[0],) + self.add([l, r], pos, "amb")
        if isinstance(e, C.Fail):
            if e.ty is None:
                self.fail("fail has no type annotation", pos)
            return e.ty, frozenset(), frozenset(), True
        if isinstance(e, C.Factor):
            if e.weight < 0:
                self.fail("factor weights must be nonnegative", pos)
            return self.go(e.body, ctx, pos)
        if isinstance(e, C.Tuple):
            parts = [self.go(c, ctx, pos) for c in e.items]
            return (C.TTensor(tuple(p[0] for p in parts)),) + self.mult(parts, pos)
        if isinstance(e, C.AddTuple):
            parts = [self.go(c, ctx, pos) for c in e.items]
            return (C.TWith(tuple(p[0] for p in parts)),) + self.add(parts, pos, "additive tuple")
        if isinstance(e, C.LetTuple):
            b = self.go(e.bound, ctx, pos)
            if not isinstance(b[0], C.TTensor) or len(b[0].items) != len(e.vars):
                self.fail(f"cannot bind {len(e.vars)} name(s) to a value of type {_show(b[0])}", pos)
            nts = list(zip(e.vars, b[0].items))
            body = self.go(e.body, self.bind(ctx, nts), pos)
            self.unused_check(nts, body[2], body[3], pos)
            names = set(e.vars)
            inner = (body[0], body[1] - names, body[2] - names, body[3])
            return (body[0],) + self.mult([b, inner], pos)
        if isinstance(e, C.Proj):
            r = self.go(e.expr, ctx, pos)
            if not isinstance(r[0], C.TWith):
                self.fail(f"projection from a non-additive type {_show(r[0])}", pos)
            if not 0 <= e.index < len(r[0].items):
                self.fail(f"projection index {e.index + 1} out of range for {_show(r[0])}", pos)
            return (r[0].items[e.index],) + r[1:]
        if isinstance(e, C.Inj):
            if not isinstance(e.ty, C.TSum) or not 0 <= e.index < len(e.ty.items):
                self.fail(f"injection index {e.index + 1} out of range", pos)
            r = self.go(e.expr, ctx, pos)
            self.expect(e.ty.items[e.index], r[0], pos, "injection")
            return (e.ty,) + r[1:]
        if isinstance(e, C.Case):
            s = self.go(e.scrut, ctx, pos)
            st = s[0]
            if not isinstance(st, C.TSum):
                self.fail(f"case on a non-sum type {_show(st)}", pos)
            if len(st.items) != len(e.arms):
                self.fail(f"case has {len(e.arms)} arm(s) but {_show(st)} has {len(st.items)}", pos)
            if not e.arms:
                self.fail("case with no arms", pos)
            arms = []
            for (x, arm), at in zip(e.arms, st.items):
                r = self.go(arm, self.bind(ctx, [(x, at)]), pos)
                self.unused_check([(x, at)], r[2], r[3], arm.pos or pos)
                arms.append((r[0], r[1] - {x}, r[2] - {x}, r[3]))
            for r in arms[1:]:
                self.expect(arms[0][0], r[0], pos, "case arms")
            joined = self.add(arms, pos, "case")
            return (arms[0][0],) + self.mult([s, (None,) + joined], pos)
        if isinstance(e, C.Fold):
            if not isinstance(e.ty, C.TMu):
                self.fail("fold needs a recursive type", pos)
            r = self.go(e.expr, ctx, pos)
            self.expect(C.unroll(e.ty), r[0], pos, "fold")
            return (e.ty,) + r[1:]
        if isinstance(e, C.Unfold):
            if not isinstance(e.ty, C.TMu):
                self.fail("unfold needs a recursive type", pos)
            b = self.go(e.bound, ctx, pos)
            self.expect(e.ty, b[0], pos, "unfold")
            vt = C.unroll(e.ty)
            body = self.go(e.body, self.bind(ctx, [(e.var, vt)]), pos)
            self.unused_check([(e.var, vt)], body[2], body[3], pos)
            inner = (body[0], body[1] - {e.var}, body[2] - {e.var}, body[3])
            return (body[0],) + self.mult([b, inner], pos)
        if isinstance(e, C.Equal):
            self.fail("structural equality must be expanded before checking", pos)
        self.fail(f"unknown expression {type(e).__name__}", pos)


def typecheck(p: C.CoreProgram, mode: str = AFFINE) -> TypedProgram:
    """Check an annotated program in `mode` ("affine" or "linear")."""
    if mode not in (AFFINE, LINEAR):
        raise ValueError(f"unknown usage mode {mode!r}")
    return Checker(p, mode).run()
