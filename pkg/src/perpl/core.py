"""Core intermediate representation: types, expressions and programs.

Expressions compare by identity so that per-node annotations can be kept in
ordinary dictionaries.  Types compare structurally, except that recursive
types compare by tag.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

Pos = Optional[tuple[int, int]]


# ---------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TArrow(Type):
    dom: Type
    cod: Type

    def __hash__(self):
        return _cached_hash(self, ("->", self.dom, self.cod))


@dataclass(frozen=True)
class TTensor(Type):
    items: tuple[Type, ...]

    def __hash__(self):
        return _cached_hash(self, ("*",) + self.items)


@dataclass(frozen=True)
class TWith(Type):
    items: tuple[Type, ...]

    def __hash__(self):
        return _cached_hash(self, ("&",) + self.items)


@dataclass(frozen=True)
class TSum(Type):
    items: tuple[Type, ...]

    def __hash__(self):
        return _cached_hash(self, ("+",) + self.items)


@dataclass(frozen=True, eq=False)
class TMu(Type):
    """Iso-recursive type.  `name` is the datatype it came from; `tag` tells
    recursive types apart and is what equality looks at."""

    name: str
    tag: object
    var: str
    body: Type

    def __eq__(self, other):
        return isinstance(other, TMu) and self.tag == other.tag

    def __hash__(self):
        return hash(("mu", self.tag))


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True, eq=False)
class THole(Type):
    """A type left for inference to fill in (each hole is distinct)."""

    def __repr__(self):
        return f"THole#{id(self) % 10007}"


class TagVar:
    """Placeholder tag created by the front end; inference merges and names them."""

    def __init__(self, datatype: str, serial: int):
        self.datatype = datatype
        self.serial = serial

    def __repr__(self):
        return f"?{self.datatype}#{self.serial}"


def _cached_hash(obj, key):
    h = obj.__dict__.get("_hash")
    if h is None:
        h = hash(key)
        object.__setattr__(obj, "_hash", h)
    return h


UNIT = TTensor(())
BOOL = TSum((UNIT, UNIT))


def is_positive(t: Type) -> bool:
    """True iff `t` contains no function, additive product or recursive type."""
    if isinstance(t, (TArrow, TWith, TMu)):
        return False
    if isinstance(t, (TTensor, TSum)):
        return all(is_positive(s) for s in t.items)
    return True


def subst_tvar(t: Type, name: str, repl: Type) -> Type:
    """Replace the type variable `name` by `repl` (used to unroll μ-bodies)."""
    if isinstance(t, TVar):
        return repl if t.name == name else t
    if isinstance(t, TArrow):
        return TArrow(subst_tvar(t.dom, name, repl), subst_tvar(t.cod, name, repl))
    if isinstance(t, (TTensor, TWith, TSum)):
        return type(t)(tuple(subst_tvar(s, name, repl) for s in t.items))
    if isinstance(t, TMu):
        if t.var == name:
            return t
        return TMu(t.name, t.tag, t.var, subst_tvar(t.body, name, repl))
    return t


def unroll(mu: TMu) -> Type:
    """The body of `mu` with its variable replaced by `mu` itself."""
    return subst_tvar(mu.body, mu.var, mu)


def map_mu(t: Type, fn) -> Type:
    """Rebuild `t`, replacing each μ-type m by fn(m) when that is not None;
    otherwise recurse into its body."""
    if isinstance(t, TMu):
        r = fn(t)
        if r is not None:
            return r
        return TMu(t.name, t.tag, t.var, map_mu(t.body, fn))
    if isinstance(t, TArrow):
        return TArrow(map_mu(t.dom, fn), map_mu(t.cod, fn))
    if isinstance(t, (TTensor, TWith, TSum)):
        return type(t)(tuple(map_mu(s, fn) for s in t.items))
    return t


def replace_mu(t: Type, tag, repl: Type) -> Type:
    return map_mu(t, lambda m: repl if m.tag == tag else None)


def mus_in(t: Type, acc: Optional[dict] = None) -> dict:
    """Tags of all μ-types occurring in `t` (including nested ones), in order."""
    if acc is None:
        acc = {}
    if isinstance(t, TMu):
        if t.tag not in acc:
            acc[t.tag] = t
            mus_in(t.body, acc)
    elif isinstance(t, TArrow):
        mus_in(t.dom, acc)
        mus_in(t.cod, acc)
    elif isinstance(t, (TTensor, TWith, TSum)):
        for s in t.items:
            mus_in(s, acc)
    return acc


def show_type(t: Type, prec: int = 0) -> str:
    """Render a type; recursive types print as their tag, e.g. String[2]."""
    if t == UNIT:
        return "Unit"
    if t == BOOL:
        return "Bool"
    if isinstance(t, TMu):
        return str(t.tag)
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TArrow):
        s = f"{show_type(t.dom, 1)} -> {show_type(t.cod, 0)}"
        return f"({s})" if prec > 0 else s
    ops = {TSum: (" + ", 1), TWith: (" & ", 2), TTensor: (" * ", 3)}
    op, p = ops[type(t)]
    if len(t.items) == 0:
        return "Void" if isinstance(t, TSum) else "Top"
    if len(t.items) == 1:
        word = {TSum: "Sum", TWith: "With", TTensor: "Tuple"}[type(t)]
        return f"{word}({show_type(t.items[0])})"
    s = op.join(show_type(s, p + 1) for s in t.items)
    return f"({s})" if prec > p else s


# ---------------------------------------------------------------------------
# Expressions


@dataclass(eq=False)
class Expr:
    pos: Pos = field(default=None, kw_only=True, repr=False)


@dataclass(eq=False)
class Var(Expr):
    name: str


@dataclass(eq=False)
class Lam(Expr):
    var: str
    ty: Optional[Type]
    body: Expr


@dataclass(eq=False)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(eq=False)
class Amb(Expr):
    left: Expr
    right: Expr


@dataclass(eq=False)
class Fail(Expr):
    ty: Optional[Type] = None


@dataclass(eq=False)
class Factor(Expr):
    weight: Fraction
    body: Expr


@dataclass(eq=False)
class Tuple(Expr):
    items: tuple[Expr, ...]


@dataclass(eq=False)
class AddTuple(Expr):
    items: tuple[Expr, ...]


@dataclass(eq=False)
class LetTuple(Expr):
    vars: tuple[str, ...]
    bound: Expr
    body: Expr


@dataclass(eq=False)
class Proj(Expr):
    expr: Expr
    index: int


@dataclass(eq=False)
class Inj(Expr):
    index: int
    ty: Optional[Type]
    expr: Expr


@dataclass(eq=False)
class Case(Expr):
    scrut: Expr
    arms: tuple[tuple[str, Expr], ...]
    # sum type of the scrutinee, when the front end knows it
    ty: Optional[Type] = field(default=None, kw_only=True)


@dataclass(eq=False)
class Fold(Expr):
    ty: Optional[Type]
    expr: Expr


@dataclass(eq=False)
class Unfold(Expr):
    ty: Optional[Type]
    var: str
    bound: Expr
    body: Expr


@dataclass(eq=False)
class Equal(Expr):
    """Structural equality; expanded into cases once operand types are known."""

    left: Expr
    right: Expr


def unit(pos: Pos = None) -> Tuple:
    return Tuple((), pos=pos)


def true(pos: Pos = None) -> Inj:
    return Inj(0, BOOL, unit(), pos=pos)


def false(pos: Pos = None) -> Inj:
    return Inj(1, BOOL, unit(), pos=pos)


def let(var: str, ty: Optional[Type], bound: Expr, body: Expr, pos: Pos = None) -> App:
    """`let x = e in e'` as the application of an abstraction."""
    return App(Lam(var, ty, body, pos=pos), bound, pos=pos)


def let_unit(bound: Expr, body: Expr) -> LetTuple:
    return LetTuple((), bound, body)


def children(e: Expr) -> Iterator[Expr]:
    if isinstance(e, Lam):
        yield e.body
    elif isinstance(e, (App,)):
        yield e.fn
        yield e.arg
    elif isinstance(e, Amb):
        yield e.left
        yield e.right
    elif isinstance(e, Factor):
        yield e.body
    elif isinstance(e, (Tuple, AddTuple)):
        yield from e.items
    elif isinstance(e, LetTuple):
        yield e.bound
        yield e.body
    elif isinstance(e, (Proj, Inj, Fold)):
        yield e.expr
    elif isinstance(e, Case):
        yield e.scrut
        for _, arm in e.arms:
            yield arm
    elif isinstance(e, Unfold):
        yield e.bound
        yield e.body
    elif isinstance(e, Equal):
        yield e.left
        yield e.right


def preorder(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def free_vars(e: Expr) -> list[str]:
    """Free variable names of `e` in order of first occurrence."""
    out: dict[str, None] = {}

    def go(e: Expr, bound: frozenset):
        if isinstance(e, Var):
            if e.name not in bound:
                out.setdefault(e.name)
        elif isinstance(e, Lam):
            go(e.body, bound | {e.var})
        elif isinstance(e, LetTuple):
            go(e.bound, bound)
            go(e.body, bound | set(e.vars))
        elif isinstance(e, Case):
            go(e.scrut, bound)
            for x, arm in e.arms:
                go(arm, bound | {x})
        elif isinstance(e, Unfold):
            go(e.bound, bound)
            go(e.body, bound | {e.var})
        else:
            for c in children(e):
                go(c, bound)

    go(e, frozenset())
    return list(out)


def rename_var(e: Expr, old: str, new: str) -> Expr:
    """Rename free occurrences of `old` to `new` (new must be fresh)."""
    return subst(e, {old: Var(new)}, copy_values=True)


def subst(e: Expr, env: dict[str, Expr], copy_values: bool = False) -> Expr:
    """Substitute closed expressions (or fresh variables) for free variables.

    No capture avoidance is attempted: callers substitute closed values or
    globally fresh names only.
    """
    if not env:
        return e

    def val(name):
        v = env[name]
        return copy_expr(v) if copy_values else v

    def go(e: Expr, env_names: frozenset) -> Expr:
        if not env_names:
            return e
        if isinstance(e, Var):
            return val(e.name) if e.name in env_names else e
        if isinstance(e, Lam):
            return Lam(e.var, e.ty, go(e.body, env_names - {e.var}), pos=e.pos)
        if isinstance(e, App):
            return App(go(e.fn, env_names), go(e.arg, env_names), pos=e.pos)
        if isinstance(e, Amb):
            return Amb(go(e.left, env_names), go(e.right, env_names), pos=e.pos)
        if isinstance(e, Fail):
            return e
        if isinstance(e, Factor):
            return Factor(e.weight, go(e.body, env_names), pos=e.pos)
        if isinstance(e, Tuple):
            return Tuple(tuple(go(c, env_names) for c in e.items), pos=e.pos)
        if isinstance(e, AddTuple):
            return AddTuple(tuple(go(c, env_names) for c in e.items), pos=e.pos)
        if isinstance(e, LetTuple):
            return LetTuple(e.vars, go(e.bound, env_names), go(e.body, env_names - set(e.vars)), pos=e.pos)
        if isinstance(e, Proj):
            return Proj(go(e.expr, env_names), e.index, pos=e.pos)
        if isinstance(e, Inj):
            return Inj(e.index, e.ty, go(e.expr, env_names), pos=e.pos)
        if isinstance(e, Case):
            arms = tuple((x, go(a, env_names - {x})) for x, a in e.arms)
            return Case(go(e.scrut, env_names), arms, ty=e.ty, pos=e.pos)
        if isinstance(e, Fold):
            return Fold(e.ty, go(e.expr, env_names), pos=e.pos)
        if isinstance(e, Unfold):
            return Unfold(e.ty, e.var, go(e.bound, env_names), go(e.body, env_names - {e.var}), pos=e.pos)
        if isinstance(e, Equal):
            return Equal(go(e.left, env_names), go(e.right, env_names), pos=e.pos)
        raise TypeError(f"unknown expression {e!r}")

    return go(e, frozenset(env))


def copy_expr(e: Expr) -> Expr:
    """Deep copy producing fresh node identities."""
    return map_expr(e, lambda n: None)


def map_expr(e: Expr, fn) -> Expr:
    """Bottom-up rebuild.  `fn(node)` may return a replacement for a node
    (whose children it is then responsible for) or None to recurse."""
    r = fn(e)
    if r is not None:
        return r

    def m(x):
        return map_expr(x, fn)

    if isinstance(e, Var):
        return Var(e.name, pos=e.pos)
    if isinstance(e, Lam):
        return Lam(e.var, e.ty, m(e.body), pos=e.pos)
    if isinstance(e, App):
        return App(m(e.fn), m(e.arg), pos=e.pos)
    if isinstance(e, Amb):
        return Amb(m(e.left), m(e.right), pos=e.pos)
    if isinstance(e, Fail):
        return Fail(e.ty, pos=e.pos)
    if isinstance(e, Factor):
        return Factor(e.weight, m(e.body), pos=e.pos)
    if isinstance(e, Tuple):
        return Tuple(tuple(m(c) for c in e.items), pos=e.pos)
    if isinstance(e, AddTuple):
        return AddTuple(tuple(m(c) for c in e.items), pos=e.pos)
    if isinstance(e, LetTuple):
        return LetTuple(e.vars, m(e.bound), m(e.body), pos=e.pos)
    if isinstance(e, Proj):
        return Proj(m(e.expr), e.index, pos=e.pos)
    if isinstance(e, Inj):
        return Inj(e.index, e.ty, m(e.expr), pos=e.pos)
    if isinstance(e, Case):
        return Case(m(e.scrut), tuple((x, m(a)) for x, a in e.arms), ty=e.ty, pos=e.pos)
    if isinstance(e, Fold):
        return Fold(e.ty, m(e.expr), pos=e.pos)
    if isinstance(e, Unfold):
        return Unfold(e.ty, e.var, m(e.bound), m(e.body), pos=e.pos)
    if isinstance(e, Equal):
        return Equal(m(e.left), m(e.right), pos=e.pos)
    raise TypeError(f"unknown expression {e!r}")


def map_types(e: Expr, fn) -> Expr:
    """Rewrite every type annotation in `e` with `fn`."""

    def f(t):
        return None if t is None else fn(t)

    def rewrite(n):
        if isinstance(n, Lam):
            return Lam(n.var, f(n.ty), map_types(n.body, fn), pos=n.pos)
        if isinstance(n, Fail):
            return Fail(f(n.ty), pos=n.pos)
        if isinstance(n, Inj):
            return Inj(n.index, f(n.ty), map_types(n.expr, fn), pos=n.pos)
        if isinstance(n, Case):
            return Case(map_types(n.scrut, fn), tuple((x, map_types(a, fn)) for x, a in n.arms),
                        ty=f(n.ty), pos=n.pos)
        if isinstance(n, Fold):
            return Fold(f(n.ty), map_types(n.expr, fn), pos=n.pos)
        if isinstance(n, Unfold):
            return Unfold(f(n.ty), n.var, map_types(n.bound, fn), map_types(n.body, fn), pos=n.pos)
        return None

    return map_expr(e, rewrite)


# ---------------------------------------------------------------------------
# Programs


@dataclass
class Global:
    name: str
    body: Expr
    ty: Optional[Type] = None
    pos: Pos = None


@dataclass
class CoreProgram:
    globals: list[Global]
    main: Expr

    def global_map(self) -> dict[str, Global]:
        return {g.name: g for g in self.globals}

    def roots(self) -> Iterator[tuple[str, Expr]]:
        for g in self.globals:
            yield g.name, g.body
        yield "main", self.main


def reachable_globals(p: CoreProgram) -> CoreProgram:
    """Drop globals not reachable from the main expression."""
    gmap = p.global_map()
    seen: set[str] = set()
    todo = [p.main]
    while todo:
        e = todo.pop()
        for n in preorder(e):
            if isinstance(n, Var) and n.name in gmap and n.name not in seen:
                seen.add(n.name)
                todo.append(gmap[n.name].body)
    # a local binder may shadow a global of the same name; keeping a few
    # extra globals in that case is harmless
    return CoreProgram([g for g in p.globals if g.name in seen], p.main)


# ---------------------------------------------------------------------------
# Printing


def show_expr(e: Expr, prec: int = 0) -> str:
    def paren(s, p):
        return f"({s})" if prec > p else s

    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lam):
        ann = f": {show_type(e.ty)}" if e.ty is not None else ""
        return paren(f"\\{e.var}{ann}. {show_expr(e.body)}", 0)
    if isinstance(e, App):
        return paren(f"{show_expr(e.fn, 2)} {show_expr(e.arg, 3)}", 2)
    if isinstance(e, Amb):
        return paren(f"amb {show_expr(e.left, 3)} {show_expr(e.right, 3)}", 2)
    if isinstance(e, Fail):
        return "fail"
    if isinstance(e, Factor):
        return paren(f"factor {e.weight} in {show_expr(e.body)}", 0)
    if isinstance(e, Tuple):
        if len(e.items) == 1:
            return f"({show_expr(e.items[0])},)"
        return "(" + ", ".join(show_expr(c) for c in e.items) + ")"
    if isinstance(e, AddTuple):
        return "<" + ", ".join(show_expr(c) for c in e.items) + ">"
    if isinstance(e, LetTuple):
        vs = "(" + ", ".join(e.vars) + ("," if len(e.vars) == 1 else "") + ")"
        return paren(f"let {vs} = {show_expr(e.bound)} in {show_expr(e.body)}", 0)
    if isinstance(e, Proj):
        return f"{show_expr(e.expr, 3)}.{e.index + 1}"
    if isinstance(e, Inj):
        return paren(f"in{e.index + 1} {show_expr(e.expr, 3)}", 2)
    if isinstance(e, Case):
        arms = " | ".join(f"in{i + 1} {x} => {show_expr(a, 1)}" for i, (x, a) in enumerate(e.arms))
        return paren(f"case {show_expr(e.scrut)} of {arms}", 0)
    if isinstance(e, Fold):
        return paren(f"fold[{show_type(e.ty)}] {show_expr(e.expr, 3)}", 2)
    if isinstance(e, Unfold):
        return paren(f"unfold[{show_type(e.ty)}] {e.var} = {show_expr(e.bound)} in {show_expr(e.body)}", 0)
    if isinstance(e, Equal):
        return paren(f"{show_expr(e.left, 2)} == {show_expr(e.right, 2)}", 1)
    raise TypeError(f"unknown expression {e!r}")


def show_program(p: CoreProgram) -> str:
    lines = []
    for g in p.globals:
        ann = f" : {show_type(g.ty)}" if g.ty is not None else ""
        lines.append(f"define {g.name}{ann} = {show_expr(g.body)}")
    lines.append(show_expr(p.main))
    return "\n".join(lines) + "\n"
