"""Pretty-printer for surface programs; its output parses back to an equal tree."""
from __future__ import annotations

from . import surface as S

_TYPE_PREC = {"+": 1, "&": 2, "*": 3}


def show_stype(t: S.SType, prec: int = 0) -> str:
    if isinstance(t, S.TName):
        return t.name
    if isinstance(t, S.TFun):
        s = f"{show_stype(t.dom, 1)} -> {show_stype(t.cod, 0)}"
        return f"({s})" if prec > 0 else s
    p = _TYPE_PREC[t.op]
    s = f" {t.op} ".join(show_stype(c, p + 1) for c in t.items)
    return f"({s})" if prec > p else s


# expression precedence levels: 0 open (lambda, let, if, case, factor),
# 1 and, 2 ==, 3 application, 4 postfix/atom
def show_sexpr(e: S.SExpr, prec: int = 0) -> str:
    def paren(s, p):
        return f"({s})" if prec > p else s

    if isinstance(e, S.Name):
        return e.name
    if isinstance(e, S.FailE):
        return "fail"
    if isinstance(e, S.TupleE):
        if len(e.items) == 1:
            return f"({show_sexpr(e.items[0])},)"
        return "(" + ", ".join(show_sexpr(c) for c in e.items) + ")"
    if isinstance(e, S.AddTupleE):
        return "<" + ", ".join(show_sexpr(c) for c in e.items) + ">"
    if isinstance(e, S.ProjE):
        return f"{show_sexpr(e.expr, 4)}.{e.index}"
    if isinstance(e, S.Apply):
        return paren(f"{show_sexpr(e.fn, 3)} {show_sexpr(e.arg, 4)}", 3)
    if isinstance(e, S.AmbE):
        return paren(f"amb {show_sexpr(e.left, 4)} {show_sexpr(e.right, 4)}", 3)
    if isinstance(e, S.FoldE):
        return paren(f"fold {show_sexpr(e.expr, 4)}", 3)
    if isinstance(e, S.EqE):
        return paren(f"{show_sexpr(e.left, 3)} == {show_sexpr(e.right, 3)}", 2)
    if isinstance(e, S.AndE):
        return paren(f"{show_sexpr(e.left, 2)} and {show_sexpr(e.right, 1)}", 1)
    # open constructs extend as far right as possible
    if isinstance(e, S.Lambda):
        ann = f": {show_stype(e.ty)}" if e.ty is not None else ""
        s = f"\\{e.var}{ann}. {show_sexpr(e.body)}"
    elif isinstance(e, S.LetE):
        pat = e.var if e.names is None else "(" + ", ".join(e.names) + ")"
        ann = f" : {show_stype(e.ty)}" if e.ty is not None else ""
        s = f"let {pat}{ann} = {show_sexpr(e.bound)} in {show_sexpr(e.body)}"
    elif isinstance(e, S.IfE):
        s = f"if {show_sexpr(e.cond)} then {show_sexpr(e.then)} else {show_sexpr(e.other)}"
    elif isinstance(e, S.FactorE):
        w = e.text if e.text is not None else _weight(e.weight)
        s = f"factor {w} in {show_sexpr(e.body)}"
    elif isinstance(e, S.CaseE):
        kw = "case unfold" if e.unfold else "case"
        arms = " | ".join(_arm(a) for a in e.arms)
        s = f"{kw} {show_sexpr(e.scrut)} of {arms}"
    else:
        raise TypeError(f"unknown surface expression {e!r}")
    return f"({s})" if prec > 0 else s


def _arm(a: S.Arm) -> str:
    pat = " ".join((a.ctor,) + a.binders)
    body = show_sexpr(a.body, 1)
    return f"{pat} => {body}"


def _weight(w) -> str:
    if w.denominator == 1:
        return str(w.numerator)
    return f"{w.numerator}/{w.denominator}"


def show_surface(p: S.SurfaceProgram) -> str:
    lines = []
    order = p.order or ([("data", i) for i in range(len(p.data_decls))]
                        + [("define", i) for i in range(len(p.defines))])
    for kind, i in order:
        if kind == "data":
            d = p.data_decls[i]
            ctors = " | ".join(" ".join([c] + [show_stype(t, 4) for t in args]) for c, args in d.ctors)
            lines.append(f"data {d.name} = {ctors}")
        else:
            d = p.defines[i]
            parts = [f"define {d.name}"]
            for prm in d.params:
                parts.append(prm.name if prm.ty is None else f"({prm.name}: {show_stype(prm.ty)})")
            head = " ".join(parts)
            if d.ret is not None:
                head += f" : {show_stype(d.ret)}"
            lines.append(f"{head} = {show_sexpr(d.body)}")
    lines.append(show_sexpr(p.main))
    return "\n".join(lines) + "\n"
