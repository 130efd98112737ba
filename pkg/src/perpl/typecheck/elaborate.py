"""Type and tag inference.

Unification over core types with metavariables, and a union-find over tag
placeholders: two occurrences of a recursive datatype get the same tag
exactly when some typing constraint equates them.  The result is a fully
annotated copy of the program in which every tag is a final name
(`String` when a datatype has a single tag, `String[1]`, `String[2]`, ...
otherwise, numbered by first occurrence) and `==` has been expanded.
"""
from __future__ import annotations

from .. import core as C
from ..errors import DesugarError, TypeError_


class TMeta(C.Type):
    __slots__ = ("ref", "serial")

    def __init__(self, serial: int):
        self.ref = None
        self.serial = serial

    def __repr__(self):
        return f"?t{self.serial}"


class Elaborator:
    def __init__(self):
        self.metas = 0
        self.tag_parent: dict = {}
        self.global_types: dict[str, C.Type] = {}
        self.lam_ty: dict = {}
        self.fail_ty: dict = {}
        self.case_ty: dict = {}
        self.eq_ty: dict = {}
        self.inj_ty: dict = {}

    # -- types -------------------------------------------------------------

    def fresh(self) -> TMeta:
        self.metas += 1
        return TMeta(self.metas)

    def instantiate(self, t):
        if t is None:
            return self.fresh()
        if isinstance(t, C.THole):
            return self.fresh()
        if isinstance(t, C.TArrow):
            return C.TArrow(self.instantiate(t.dom), self.instantiate(t.cod))
        if isinstance(t, (C.TTensor, C.TWith, C.TSum)):
            return type(t)(tuple(self.instantiate(s) for s in t.items))
        return t

    def prune(self, t):
        while isinstance(t, TMeta) and t.ref is not None:
            t = t.ref
        return t

    def find(self, tag):
        root = tag
        while self.tag_parent.get(root, root) is not root:
            root = self.tag_parent[root]
        while tag is not root:
            nxt = self.tag_parent.get(tag, tag)
            self.tag_parent[tag] = root
            tag = nxt
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra is rb:
            return
        # the older placeholder stays the representative
        if getattr(rb, "serial", 0) < getattr(ra, "serial", 0):
            ra, rb = rb, ra
        self.tag_parent[rb] = ra

    def occurs(self, m: TMeta, t) -> bool:
        t = self.prune(t)
        if t is m:
            return True
        if isinstance(t, C.TArrow):
            return self.occurs(m, t.dom) or self.occurs(m, t.cod)
        if isinstance(t, (C.TTensor, C.TWith, C.TSum)):
            return any(self.occurs(m, s) for s in t.items)
        return False

    def show(self, t) -> str:
        t = self.resolve(t, default=None)
        return _show_provisional(t)

    def unify(self, expected, actual, pos, what="expression"):
        try:
            self._unify(expected, actual)
        except _Mismatch:
            raise TypeError_(
                f"type mismatch in {what}: expected {self.show(expected)}, got {self.show(actual)}", pos
            ) from None

    def _unify(self, a, b):
        a, b = self.prune(a), self.prune(b)
        if a is b:
            return
        if isinstance(a, TMeta):
            if self.occurs(a, b):
                raise _Mismatch
            a.ref = b
            return
        if isinstance(b, TMeta):
            self._unify(b, a)
            return
        if isinstance(a, C.TArrow) and isinstance(b, C.TArrow):
            self._unify(a.dom, b.dom)
            self._unify(a.cod, b.cod)
            return
        if type(a) is type(b) and isinstance(a, (C.TTensor, C.TWith, C.TSum)):
            if len(a.items) != len(b.items):
                raise _Mismatch
            for x, y in zip(a.items, b.items):
                self._unify(x, y)
            return
        if isinstance(a, C.TMu) and isinstance(b, C.TMu):
            if a.name != b.name:
                raise _Mismatch
            ra, rb = self.find(a.tag), self.find(b.tag)
            if ra is rb or ra == rb:
                return
            if not isinstance(ra, C.TagVar) and not isinstance(rb, C.TagVar):
                raise _Mismatch  # two distinct final tags
            self.union(ra, rb)
            self._unify(a.body, b.body)
            return
        if isinstance(a, C.TVar) and isinstance(b, C.TVar) and a.name == b.name:
            return
        raise _Mismatch

    def resolve(self, t, default=C.UNIT, tags=None):
        """Substitute metas (unresolved ones become `default`) and final tags."""
        t = self.prune(t)
        if isinstance(t, TMeta):
            return default if default is not None else t
        if isinstance(t, C.TArrow):
            return C.TArrow(self.resolve(t.dom, default, tags), self.resolve(t.cod, default, tags))
        if isinstance(t, (C.TTensor, C.TWith, C.TSum)):
            return type(t)(tuple(self.resolve(s, default, tags) for s in t.items))
        if isinstance(t, C.TMu):
            tag = self.find(t.tag)
            if tags is not None:
                tag = tags.get(tag, tag)
            return C.TMu(t.name, tag, t.var, self.resolve(t.body, default, tags))
        return t

    # -- expressions -------------------------------------------------------

    def infer(self, e: C.Expr, env: dict, pos):
        pos = e.pos or pos
        if isinstance(e, C.Var):
            if e.name in env:
                return env[e.name]
            if e.name in self.global_types:
                return self.global_types[e.name]
            raise TypeError_(f"unbound variable '{e.name}'", pos)
        if isinstance(e, C.Lam):
            dom = self.instantiate(e.ty)
            self.lam_ty[e] = dom
            cod = self.infer(e.body, {**env, e.var: dom}, pos)
            return C.TArrow(dom, cod)
        if isinstance(e, C.App):
            ft = self.infer(e.fn, env, pos)
            at = self.infer(e.arg, env, pos)
            res = self.fresh()
            f = self.prune(ft)
            if not isinstance(f, (C.TArrow, TMeta)):
                raise TypeError_(f"applying a non-function of type {self.show(ft)}", pos)
            if isinstance(f, C.TArrow):
                self.unify(f.dom, at, pos, "application argument")
                return f.cod
            self.unify(C.TArrow(at, res), ft, pos, "application")
            return res
        if isinstance(e, C.Amb):
            lt = self.infer(e.left, env, pos)
            rt = self.infer(e.right, env, pos)
            self.unify(lt, rt, pos, "amb")
            return lt
        if isinstance(e, C.Fail):
            t = self.instantiate(e.ty)
            self.fail_ty[e] = t
            return t
        if isinstance(e, C.Factor):
            if e.weight < 0:
                raise TypeError_("factor weights must be nonnegative", pos)
            return self.infer(e.body, env, pos)
        if isinstance(e, C.Tuple):
            return C.TTensor(tuple(self.infer(c, env, pos) for c in e.items))
        if isinstance(e, C.AddTuple):
            return C.TWith(tuple(self.infer(c, env, pos) for c in e.items))
        if isinstance(e, C.LetTuple):
            bt = self.infer(e.bound, env, pos)
            metas = tuple(self.fresh() for _ in e.vars)
            self.unify(C.TTensor(metas), bt, pos, "tuple binding")
            return self.infer(e.body, {**env, **dict(zip(e.vars, metas))}, pos)
        if isinstance(e, C.Proj):
            t = self.prune(self.infer(e.expr, env, pos))
            if isinstance(t, TMeta):
                raise TypeError_("cannot infer the type of a projected expression; add a type annotation", pos)
            if not isinstance(t, C.TWith):
                raise TypeError_(f"projection from a non-additive type {self.show(t)}", pos)
            if not 0 <= e.index < len(t.items):
                raise TypeError_(
                    f"projection index {e.index + 1} out of range for {self.show(t)}", pos)
            return t.items[e.index]
        if isinstance(e, C.Inj):
            if e.ty is None:
                raise TypeError_("injection without a target type", pos)
            st = self.instantiate(e.ty)
            if not isinstance(st, C.TSum) or not 0 <= e.index < len(st.items):
                raise TypeError_(f"injection index {e.index + 1} out of range for {self.show(st)}", pos)
            self.inj_ty[e] = st
            self.unify(st.items[e.index], self.infer(e.expr, env, pos), pos, "injection")
            return st
        if isinstance(e, C.Case):
            st = self.infer(e.scrut, env, pos)
            if e.ty is not None:
                self.unify(self.instantiate(e.ty), st, pos, "case scrutinee")
            t = self.prune(st)
            if isinstance(t, TMeta):
                raise TypeError_("cannot infer the type of a case scrutinee; add a type annotation", pos)
            if not isinstance(t, C.TSum):
                raise TypeError_(f"case on a non-sum type {self.show(t)}", pos)
            if len(t.items) != len(e.arms):
                raise TypeError_(f"case has {len(e.arms)} arm(s) but {self.show(t)} has {len(t.items)}", pos)
            self.case_ty[e] = t
            res = self.fresh()
            for (x, arm), at in zip(e.arms, t.items):
                self.unify(res, self.infer(arm, {**env, x: at}, pos), arm.pos or pos, "case arm")
            return res
        if isinstance(e, C.Fold):
            mu = self.instantiate(e.ty)
            if not isinstance(mu, C.TMu):
                raise TypeError_("fold needs a recursive type", pos)
            self.unify(C.unroll(mu), self.infer(e.expr, env, pos), pos, "fold")
            return mu
        if isinstance(e, C.Unfold):
            mu = self.instantiate(e.ty)
            if not isinstance(mu, C.TMu):
                raise TypeError_("unfold needs a recursive type", pos)
            self.unify(mu, self.infer(e.bound, env, pos), pos, "unfold")
            return self.infer(e.body, {**env, e.var: C.unroll(mu)}, pos)
        if isinstance(e, C.Equal):
            lt = self.infer(e.left, env, pos)
            rt = self.infer(e.right, env, pos)
            self.unify(lt, rt, pos, "equality")
            self.eq_ty[e] = lt
            return C.BOOL
        raise TypeError_(f"unknown expression {type(e).__name__}", pos)

    # -- program -----------------------------------------------------------

    def program(self, p: C.CoreProgram) -> C.CoreProgram:
        for g in p.globals:
            self.global_types[g.name] = self.instantiate(g.ty)
        for g in p.globals:
            t = self.infer(g.body, {}, g.pos)
            self.unify(self.global_types[g.name], t, g.pos, f"definition of '{g.name}'")
        self.infer(p.main, {}, p.main.pos)
        tags = self._name_tags(p)
        self._tags = tags
        out = C.CoreProgram(
            [C.Global(g.name, self.rebuild(g.body), self.resolve(self.global_types[g.name], tags=tags), g.pos)
             for g in p.globals],
            self.rebuild(p.main),
        )
        return out

    def _name_tags(self, p: C.CoreProgram) -> dict:
        seen: dict = {}

        def visit_type(t):
            t = self.prune(t)
            if isinstance(t, C.TMu):
                root = self.find(t.tag)
                serial = min(getattr(t.tag, "serial", 0), seen.get(root, (None, 1 << 60))[1])
                seen[root] = (t.name, serial)
                visit_type(t.body)
            elif isinstance(t, C.TArrow):
                visit_type(t.dom)
                visit_type(t.cod)
            elif isinstance(t, (C.TTensor, C.TWith, C.TSum)):
                for s in t.items:
                    visit_type(s)

        for t in self.global_types.values():
            visit_type(t)
        for table in (self.lam_ty, self.fail_ty, self.case_ty, self.eq_ty, self.inj_ty):
            for t in table.values():
                visit_type(t)
        for _, body in p.roots():
            for n in C.preorder(body):
                ty = getattr(n, "ty", None)
                if ty is not None:
                    visit_type(ty)
        # placeholders never reached via a type still get their own names
        for tag in list(self.tag_parent):
            root = self.find(tag)
            if root not in seen and isinstance(root, C.TagVar):
                seen[root] = (root.datatype, root.serial)
        by_name: dict[str, list] = {}
        for root, (name, serial) in seen.items():
            by_name.setdefault(name, []).append((serial, root))
        out = {}
        for name, roots in by_name.items():
            roots.sort(key=lambda r: r[0])
            if len(roots) == 1:
                out[roots[0][1]] = name
            else:
                for k, (_, root) in enumerate(roots, 1):
                    out[root] = f"{name}[{k}]"
        return out

    def final(self, t):
        return self.resolve(t, tags=self._tags)

    def rebuild(self, e: C.Expr) -> C.Expr:
        def fn(n):
            if isinstance(n, C.Lam):
                return C.Lam(n.var, self.final(self.lam_ty[n]), self.rebuild(n.body), pos=n.pos)
            if isinstance(n, C.Fail):
                return C.Fail(self.final(self.fail_ty[n]), pos=n.pos)
            if isinstance(n, C.Inj):
                return C.Inj(n.index, self.final(self.inj_ty[n]), self.rebuild(n.expr), pos=n.pos)
            if isinstance(n, C.Case):
                return C.Case(self.rebuild(n.scrut), tuple((x, self.rebuild(a)) for x, a in n.arms),
                              ty=self.final(self.case_ty[n]), pos=n.pos)
            if isinstance(n, C.Fold):
                return C.Fold(self.final(n.ty), self.rebuild(n.expr), pos=n.pos)
            if isinstance(n, C.Unfold):
                return C.Unfold(self.final(n.ty), n.var, self.rebuild(n.bound), self.rebuild(n.body), pos=n.pos)
            if isinstance(n, C.Equal):
                return self.expand_equal(n)
            return None

        return C.map_expr(e, fn)

    # -- structural equality ----------------------------------------------

    def expand_equal(self, n: C.Equal) -> C.Expr:
        t = self.final(self.eq_ty[n])
        if not C.is_positive(t):
            raise DesugarError(
                f"'==' needs a type built from Unit, sums and tensors, not {C.show_type(t)}", n.pos)
        self._eq_count = getattr(self, "_eq_count", 0) + 1
        k = self._eq_count
        a, b = f"$eqa{k}", f"$eqb{k}"
        body = _eq(t, a, b, [0], k)
        inner = C.let(b, t, self.rebuild(n.right), body, pos=n.pos)
        return C.let(a, t, self.rebuild(n.left), inner, pos=n.pos)


class _Mismatch(Exception):
    pass


def _and(e1: C.Expr, e2: C.Expr, names) -> C.Expr:
    u1, u2 = names
    return C.Case(e1, ((u1, C.LetTuple((), C.Var(u1), e2)), (u2, C.LetTuple((), C.Var(u2), C.false()))),
                  ty=C.BOOL)


def _eq(t: C.Type, a: str, b: str, counter: list, k: int) -> C.Expr:
    def fresh(base):
        counter[0] += 1
        return f"${base}{k}_{counter[0]}"

    if isinstance(t, C.TTensor):
        if not t.items:
            return C.true()
        xs = tuple(fresh("x") for _ in t.items)
        ys = tuple(fresh("y") for _ in t.items)
        parts = [_eq(s, x, y, counter, k) for s, x, y in zip(t.items, xs, ys)]
        acc = parts[-1]
        for part in reversed(parts[:-1]):
            acc = _and(part, acc, (fresh("u"), fresh("u")))
        return C.LetTuple(xs, C.Var(a), C.LetTuple(ys, C.Var(b), acc))
    if isinstance(t, C.TSum):
        arms = []
        for i, si in enumerate(t.items):
            x = fresh("x")
            inner = []
            for j, _ in enumerate(t.items):
                y = fresh("y")
                inner.append((y, _eq(si, x, y, counter, k) if i == j else C.false()))
            arms.append((x, C.Case(C.Var(b), tuple(inner), ty=t)))
        return C.Case(C.Var(a), tuple(arms), ty=t)
    raise DesugarError(f"'==' is not defined at type {C.show_type(t)}")


def _show_provisional(t) -> str:
    if isinstance(t, TMeta):
        return "?"
    if isinstance(t, C.TMu):
        return t.name
    if isinstance(t, C.TArrow):
        return f"({_show_provisional(t.dom)} -> {_show_provisional(t.cod)})"
    if isinstance(t, (C.TTensor, C.TWith, C.TSum)):
        if t == C.UNIT:
            return "Unit"
        if t == C.BOOL:
            return "Bool"
        op = {C.TTensor: " * ", C.TWith: " & ", C.TSum: " + "}[type(t)]
        return "(" + op.join(_show_provisional(s) for s in t.items) + ")"
    return C.show_type(t)


def elaborate(p: C.CoreProgram) -> C.CoreProgram:
    """Infer all types and tags; return a fully annotated program."""
    return Elaborator().program(p)
