"""Surface programs to core programs.

Datatypes become sums of constructor payloads (no fields: Unit, one field:
the field itself, several: a tensor), wrapped in a μ-type only when
self-referential.  Every occurrence of a recursive datatype gets its own
tag placeholder; inference later merges the ones that must agree.
"""
from __future__ import annotations

from dataclasses import dataclass

from .. import core as C
from ..errors import DesugarError
from . import surface as S

BUILTIN_TYPES = {"Unit": C.UNIT, "Bool": C.BOOL}


@dataclass
class CtorInfo:
    datatype: str
    index: int
    fields: tuple


class Desugarer:
    def __init__(self, prog: S.SurfaceProgram):
        self.prog = prog
        self.data: dict[str, S.DataDecl] = {}
        self.ctors: dict[str, CtorInfo] = {}
        self.recursive: set[str] = set()
        self.fresh_count = 0
        self.tag_count = 0
        self._collect()

    # -- datatypes ---------------------------------------------------------

    def _collect(self):
        for d in self.prog.data_decls:
            if d.name in self.data or d.name in BUILTIN_TYPES:
                raise DesugarError(f"duplicate datatype '{d.name}'", d.pos)
            self.data[d.name] = d
            for i, (cname, fields) in enumerate(d.ctors):
                if cname in self.ctors:
                    raise DesugarError(f"duplicate constructor '{cname}'", d.pos)
                self.ctors[cname] = CtorInfo(d.name, i, fields)
        deps = {name: self._mentions(d) for name, d in self.data.items()}
        for name, d in self.data.items():
            for other in deps[name]:
                if other not in self.data and other not in BUILTIN_TYPES:
                    raise DesugarError(f"unknown type '{other}'", d.pos)
            if name in deps[name]:
                self.recursive.add(name)
        # mutual recursion is not supported: each recursive type may refer
        # only to itself and to datatypes that do not lead back to it
        for name, d in self.data.items():
            seen, todo = set(), [o for o in deps[name] if o != name]
            while todo:
                o = todo.pop()
                if o == name:
                    raise DesugarError(f"datatype '{name}' is mutually recursive with another datatype", d.pos)
                if o in seen or o not in deps:
                    continue
                seen.add(o)
                todo.extend(x for x in deps[o] if x != o)

    def _mentions(self, d: S.DataDecl) -> set[str]:
        out: set[str] = set()

        def go(t):
            if isinstance(t, S.TName):
                out.add(t.name)
            elif isinstance(t, S.TFun):
                go(t.dom)
                go(t.cod)
            else:
                for c in t.items:
                    go(c)

        for _, fields in d.ctors:
            for f in fields:
                go(f)
        return out

    def datatype(self, name: str) -> C.Type:
        """A fresh instance of the datatype's core type."""
        d = self.data[name]
        rec = name in self.recursive
        payloads = []
        for _, fields in d.ctors:
            ts = [self.type_(f, self_ref=name if rec else None) for f in fields]
            payloads.append(ts[0] if len(ts) == 1 else C.TTensor(tuple(ts)))
        body = C.TSum(tuple(payloads))
        if not rec:
            return body
        self.tag_count += 1
        return C.TMu(name, C.TagVar(name, self.tag_count), name, body)

    def type_(self, t: S.SType, self_ref: str | None = None) -> C.Type:
        if isinstance(t, S.TName):
            if t.name == self_ref:
                return C.TVar(t.name)
            if t.name in BUILTIN_TYPES:
                return BUILTIN_TYPES[t.name]
            if t.name in self.data:
                return self.datatype(t.name)
            raise DesugarError(f"unknown type '{t.name}'", t.pos)
        if isinstance(t, S.TFun):
            return C.TArrow(self.type_(t.dom, self_ref), self.type_(t.cod, self_ref))
        items = tuple(self.type_(c, self_ref) for c in t.items)
        return {"*": C.TTensor, "&": C.TWith, "+": C.TSum}[t.op](items)

    # -- expressions -------------------------------------------------------

    def fresh(self, base: str = "v") -> str:
        self.fresh_count += 1
        return f"${base}{self.fresh_count}"

    def binder(self, name: str) -> str:
        return self.fresh("w") if name == "_" else name

    def expr(self, e: S.SExpr) -> C.Expr:
        pos = e.pos
        if isinstance(e, S.Name):
            if e.name == "true":
                return C.true(pos)
            if e.name == "false":
                return C.false(pos)
            if e.name in self.ctors:
                return self.construct(e.name, [], pos)
            return C.Var(e.name, pos=pos)
        if isinstance(e, S.Apply):
            head, args = e, []
            while isinstance(head, S.Apply):
                args.append(head.arg)
                head = head.fn
            args.reverse()
            if isinstance(head, S.Name) and head.name in self.ctors:
                return self.construct(head.name, args, pos)
            return C.App(self.expr(e.fn), self.expr(e.arg), pos=pos)
        if isinstance(e, S.Lambda):
            ty = self.type_(e.ty) if e.ty is not None else None
            return C.Lam(self.binder(e.var), ty, self.expr(e.body), pos=pos)
        if isinstance(e, S.AmbE):
            return C.Amb(self.expr(e.left), self.expr(e.right), pos=pos)
        if isinstance(e, S.FailE):
            return C.Fail(None, pos=pos)
        if isinstance(e, S.FactorE):
            return C.Factor(e.weight, self.expr(e.body), pos=pos)
        if isinstance(e, S.TupleE):
            return C.Tuple(tuple(self.expr(c) for c in e.items), pos=pos)
        if isinstance(e, S.AddTupleE):
            return C.AddTuple(tuple(self.expr(c) for c in e.items), pos=pos)
        if isinstance(e, S.ProjE):
            return C.Proj(self.expr(e.expr), e.index - 1, pos=pos)
        if isinstance(e, S.LetE):
            bound = self.expr(e.bound)
            body = self.expr(e.body)
            if e.names is not None:
                if e.ty is not None:
                    raise DesugarError("type annotations on tuple patterns are not supported", pos)
                return C.LetTuple(tuple(self.binder(n) for n in e.names), bound, body, pos=pos)
            ty = self.type_(e.ty) if e.ty is not None else None
            return C.let(self.binder(e.var), ty, bound, body, pos=pos)
        if isinstance(e, S.IfE):
            return self.if_(self.expr(e.cond), self.expr(e.then), self.expr(e.other), pos)
        if isinstance(e, S.AndE):
            return self.if_(self.expr(e.left), self.expr(e.right), C.false(pos), pos)
        if isinstance(e, S.EqE):
            return C.Equal(self.expr(e.left), self.expr(e.right), pos=pos)
        if isinstance(e, S.FoldE):
            inner = e.expr
            head = inner
            while isinstance(head, S.Apply):
                head = head.fn
            if not (isinstance(head, S.Name) and head.name in self.ctors
                    and self.ctors[head.name].datatype in self.recursive):
                raise DesugarError("fold applies only to a constructor of a recursive datatype", pos)
            # constructors of recursive datatypes already fold
            return self.expr(inner)
        if isinstance(e, S.CaseE):
            return self.case(e)
        raise DesugarError(f"unsupported expression {type(e).__name__}", pos)

    def if_(self, cond, then, other, pos):
        u1, u2 = self.fresh("u"), self.fresh("u")
        arms = ((u1, C.LetTuple((), C.Var(u1), then)), (u2, C.LetTuple((), C.Var(u2), other)))
        return C.Case(cond, arms, ty=C.BOOL, pos=pos)

    def construct(self, cname: str, args: list, pos) -> C.Expr:
        info = self.ctors[cname]
        if len(args) != len(info.fields):
            raise DesugarError(
                f"constructor '{cname}' expects {len(info.fields)} argument(s), got {len(args)}", pos)
        cargs = [self.expr(a) for a in args]
        payload = cargs[0] if len(cargs) == 1 else C.Tuple(tuple(cargs), pos=pos)
        ty = self.datatype(info.datatype)
        if isinstance(ty, C.TMu):
            return C.Fold(ty, C.Inj(info.index, C.unroll(ty), payload, pos=pos), pos=pos)
        return C.Inj(info.index, ty, payload, pos=pos)

    def case(self, e: S.CaseE) -> C.Expr:
        first = e.arms[0]
        if first.ctor in ("true", "false"):
            dname, ctor_names, arities = "Bool", ["true", "false"], [0, 0]
        elif first.ctor in self.ctors:
            dname = self.ctors[first.ctor].datatype
            ctor_names = [c for c, _ in self.data[dname].ctors]
            arities = [len(f) for _, f in self.data[dname].ctors]
        else:
            raise DesugarError(f"unknown constructor '{first.ctor}'", first.pos)
        by_index: dict[int, S.Arm] = {}
        for arm in e.arms:
            if arm.ctor not in ctor_names:
                if arm.ctor in self.ctors or arm.ctor in ("true", "false"):
                    raise DesugarError(f"constructor '{arm.ctor}' does not belong to type '{dname}'", arm.pos)
                raise DesugarError(f"unknown constructor '{arm.ctor}'", arm.pos)
            i = ctor_names.index(arm.ctor)
            if i in by_index:
                raise DesugarError(f"duplicate case arm for '{arm.ctor}'", arm.pos)
            if len(arm.binders) != arities[i]:
                raise DesugarError(
                    f"pattern '{arm.ctor}' expects {arities[i]} binder(s), got {len(arm.binders)}", arm.pos)
            by_index[i] = arm
        missing = [c for i, c in enumerate(ctor_names) if i not in by_index]
        if missing:
            raise DesugarError(f"case is missing arm(s) for {', '.join(missing)}", e.pos)

        recursive = dname in self.recursive
        if e.unfold and not recursive:
            raise DesugarError(f"'case unfold' needs a recursive datatype, '{dname}' is not", e.pos)
        ty = C.BOOL if dname == "Bool" else self.datatype(dname)
        sum_ty = C.unroll(ty) if recursive else ty
        arms = []
        for i in range(len(ctor_names)):
            arm = by_index[i]
            body = self.expr(arm.body)
            names = tuple(self.binder(b) for b in arm.binders)
            if len(names) == 1:
                arms.append((names[0], body))
            else:
                v = self.fresh()
                arms.append((v, C.LetTuple(names, C.Var(v), body, pos=arm.pos)))
        scrut = self.expr(e.scrut)
        if recursive:
            u = self.fresh("u")
            return C.Unfold(ty, u, scrut, C.Case(C.Var(u), tuple(arms), ty=sum_ty, pos=e.pos), pos=e.pos)
        return C.Case(scrut, tuple(arms), ty=sum_ty, pos=e.pos)

    # -- programs ----------------------------------------------------------

    def program(self) -> C.CoreProgram:
        globals_ = []
        for d in self.prog.defines:
            params = [(self.binder(p.name), self.type_(p.ty) if p.ty is not None else None)
                      for p in d.params]
            ret = self.type_(d.ret) if d.ret is not None else None
            body = self.expr(d.body)
            for name, ty in reversed(params):
                body = C.Lam(name, ty, body, pos=d.pos)
            ty = None
            if d.ret is not None or any(t is not None for _, t in params):
                ty = ret if ret is not None else C.THole()
                for _, pt in reversed(params):
                    ty = C.TArrow(pt if pt is not None else C.THole(), ty)
            globals_.append(C.Global(d.name, body, ty, d.pos))
        return C.CoreProgram(globals_, self.expr(self.prog.main))


def desugar(p: S.SurfaceProgram) -> C.CoreProgram:
    return Desugarer(p).program()
