"""Recursive-descent parser for PERPL.

Layout: a token that begins a line at or left of the innermost layout
column ends the current construct.  Top-level items use column 1, so
every `data`/`define` item and the main expression start at the left
margin and their continuation lines are indented.  `case` arms written one
per line use the column of the first arm; arms may also be separated by
`|` on one line.
"""
from __future__ import annotations

from fractions import Fraction

from ..errors import ParseError
from . import surface as S
from .lexer import Token, tokenize

_ATOM_START_KW = {"fail", "true", "false"}


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.layout = [1]
        self.exempt = 0

    # -- token helpers -----------------------------------------------------

    def peek(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof" and t.bol and self.i != self.exempt and t.col <= self.layout[-1]:
            return Token("sep", "<layout>", t.line, t.col)
        return t

    def raw(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.peek()
        if t.kind == "sep":
            self.fail(t, "unexpected line break (indent continuation lines)")
        self.i += 1
        return t

    def is_op(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def is_kw(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == text

    def expect_op(self, text: str) -> Token:
        t = self.peek()
        if not (t.kind == "op" and t.text == text):
            self.fail(t, f"expected '{text}'")
        return self.next()

    def expect_kw(self, text: str) -> Token:
        t = self.peek()
        if not (t.kind == "kw" and t.text == text):
            self.fail(t, f"expected '{text}'")
        return self.next()

    def ident(self, what="identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            self.fail(t, f"expected {what}")
        return self.next()

    def binder(self) -> str:
        t = self.peek()
        if t.kind != "ident":
            self.fail(t, "expected a variable name")
        return self.next().text

    def fail(self, t: Token, msg: str):
        if t.kind == "eof":
            found = "end of input"
        elif t.kind == "sep":
            found = "a new line"
        else:
            found = repr(t.text)
        raise ParseError(f"{msg}, found {found}", (t.line, t.col) if t.line else self.raw().pos)

    # -- programs ----------------------------------------------------------

    def program(self) -> S.SurfaceProgram:
        decls, defines, order = [], [], []
        names: dict[str, tuple] = {}
        main = None
        while True:
            self.exempt = self.i
            t = self.raw()
            if t.kind == "eof":
                break
            if main is not None:
                self.fail(t, "expected end of input after the main expression")
            if t.kind == "kw" and t.text == "data":
                d = self.data_decl()
                order.append(("data", len(decls)))
                decls.append(d)
            elif t.kind == "kw" and t.text == "define":
                d = self.define()
                if d.name in names:
                    raise ParseError(f"duplicate definition of '{d.name}'", d.pos)
                names[d.name] = d.pos
                order.append(("define", len(defines)))
                defines.append(d)
            else:
                main = self.expr()
            t = self.peek()
            if t.kind == "op" and t.text == ";":
                self.i += 1
            elif t.kind not in ("sep", "eof"):
                self.fail(t, "expected a new item at the start of a line or ';'")
        if main is None:
            self.fail(self.raw(), "expected a main expression")
        return S.SurfaceProgram(decls, defines, main, order)

    def data_decl(self) -> S.DataDecl:
        kw = self.expect_kw("data")
        name = self.ident("a datatype name").text
        self.expect_op("=")
        if self.is_op("|"):
            self.next()
        ctors = [self.ctor_decl()]
        while self.is_op("|"):
            self.next()
            ctors.append(self.ctor_decl())
        return S.DataDecl(name, tuple(ctors), pos=kw.pos)

    def ctor_decl(self):
        name = self.ident("a constructor name").text
        args = []
        while self.type_atom_start():
            args.append(self.type_atom())
        return name, tuple(args)

    def define(self) -> S.Define:
        kw = self.expect_kw("define")
        name = self.ident("a definition name").text
        params = []
        while True:
            if self.peek().kind == "ident":
                params.append(S.Param(self.next().text, None))
            elif self.is_op("("):
                self.next()
                pname = self.binder()
                self.expect_op(":")
                pty = self.type_()
                self.expect_op(")")
                params.append(S.Param(pname, pty))
            else:
                break
        ret = None
        if self.is_op(":"):
            self.next()
            ret = self.type_()
        self.expect_op("=")
        body = self.expr()
        return S.Define(name, tuple(params), ret, body, pos=kw.pos)

    # -- types -------------------------------------------------------------

    def type_(self) -> S.SType:
        start = self.peek()
        left = self.type_sum()
        if self.is_op("->"):
            self.next()
            return S.TFun(left, self.type_(), pos=start.pos)
        return left

    def _type_nary(self, op, sub):
        start = self.peek()
        items = [sub()]
        while self.is_op(op):
            self.next()
            items.append(sub())
        if len(items) == 1:
            return items[0]
        return S.TOp(op, tuple(items), pos=start.pos)

    def type_sum(self):
        return self._type_nary("+", self.type_with)

    def type_with(self):
        return self._type_nary("&", self.type_tensor)

    def type_tensor(self):
        return self._type_nary("*", self.type_atom)

    def type_atom_start(self) -> bool:
        t = self.peek()
        return t.kind == "ident" or (t.kind == "op" and t.text == "(")

    def type_atom(self) -> S.SType:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return S.TName(t.text, pos=t.pos)
        if t.kind == "op" and t.text == "(":
            self.next()
            ty = self.type_()
            self.expect_op(")")
            return ty
        self.fail(t, "expected a type")

    # -- expressions -------------------------------------------------------

    def expr(self) -> S.SExpr:
        t = self.peek()
        if t.kind == "op" and t.text == "\\":
            self.next()
            var = self.binder()
            ty = None
            if self.is_op(":"):
                self.next()
                ty = self.type_()
            self.expect_op(".")
            return S.Lambda(var, ty, self.expr(), pos=t.pos)
        if t.kind == "kw":
            if t.text == "let":
                return self.let()
            if t.text == "if":
                self.next()
                c = self.expr()
                self.expect_kw("then")
                a = self.expr()
                self.expect_kw("else")
                return S.IfE(c, a, self.expr(), pos=t.pos)
            if t.text == "case":
                return self.case()
            if t.text == "factor":
                self.next()
                w = self.peek()
                if w.kind != "num":
                    self.fail(w, "expected a nonnegative weight")
                self.next()
                self.expect_kw("in")
                return S.FactorE(Fraction(w.text), self.expr(), w.text, pos=t.pos)
        return self.and_expr()

    def let(self) -> S.SExpr:
        t = self.expect_kw("let")
        var, names = None, None
        if self.is_op("("):
            self.next()
            names = []
            if not self.is_op(")"):
                names.append(self.binder())
                while self.is_op(","):
                    self.next()
                    names.append(self.binder())
            self.expect_op(")")
            names = tuple(names)
        else:
            var = self.binder()
        ty = None
        if self.is_op(":"):
            self.next()
            ty = self.type_()
        self.expect_op("=")
        bound = self.expr()
        self.expect_kw("in")
        return S.LetE(var, names, ty, bound, self.expr(), pos=t.pos)

    def case(self) -> S.SExpr:
        t = self.expect_kw("case")
        unfold = False
        if self.is_kw("unfold"):
            self.next()
            unfold = True
        scrut = self.expr()
        self.expect_kw("of")
        if self.is_op("|"):
            self.next()
        first = self.raw()
        col = first.col if first.bol and first.col > self.layout[-1] else None
        arms = []
        while True:
            if col is not None:
                self.layout.append(col)
                self.exempt = self.i
            try:
                arms.append(self.arm())
            finally:
                if col is not None:
                    self.layout.pop()
            if self.is_op("|"):
                self.next()
                continue
            nxt = self.raw()
            if col is not None and nxt.kind != "eof" and nxt.bol and nxt.col == col:
                continue
            break
        return S.CaseE(scrut, unfold, tuple(arms), pos=t.pos)

    def arm(self) -> S.Arm:
        t = self.peek()
        if t.kind == "kw" and t.text in ("true", "false"):
            self.next()
            ctor, binders = t.text, ()
        else:
            ctor = self.ident("a constructor pattern").text
            binders = []
            while self.peek().kind == "ident":
                binders.append(self.next().text)
            binders = tuple(binders)
        self.expect_op("=>")
        return S.Arm(ctor, binders, self.expr(), pos=t.pos)

    def and_expr(self) -> S.SExpr:
        left = self.eq_expr()
        if self.is_kw("and"):
            t = self.next()
            return S.AndE(left, self.and_expr(), pos=t.pos)
        return left

    def eq_expr(self) -> S.SExpr:
        left = self.app_expr()
        if self.is_op("=="):
            t = self.next()
            return S.EqE(left, self.app_expr(), pos=t.pos)
        return left

    def atom_start(self) -> bool:
        t = self.peek()
        if t.kind == "ident":
            return True
        if t.kind == "kw":
            return t.text in _ATOM_START_KW
        return t.kind == "op" and t.text in ("(", "<")

    def app_expr(self) -> S.SExpr:
        t = self.peek()
        if t.kind == "kw" and t.text == "amb":
            self.next()
            left = self.postfix()
            right = self.postfix()
            e = S.AmbE(left, right, pos=t.pos)
        elif t.kind == "kw" and t.text == "fold":
            self.next()
            e = S.FoldE(self.postfix(), pos=t.pos)
        else:
            e = self.postfix()
        while self.atom_start():
            arg = self.postfix()
            e = S.Apply(e, arg, pos=e.pos)
        return e

    def postfix(self) -> S.SExpr:
        e = self.atom()
        while self.is_op("."):
            dot = self.next()
            n = self.peek()
            if n.kind != "num":
                self.fail(n, "expected a projection index")
            self.next()
            idx = int(n.text)
            if idx < 1:
                raise ParseError("projection indices start at 1", n.pos)
            e = S.ProjE(e, idx, pos=dot.pos)
        return e

    def atom(self) -> S.SExpr:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return S.Name(t.text, pos=t.pos)
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.next()
                return S.Name(t.text, pos=t.pos)
            if t.text == "fail":
                self.next()
                return S.FailE(pos=t.pos)
        if t.kind == "op" and t.text == "(":
            self.next()
            if self.is_op(")"):
                self.next()
                return S.TupleE((), pos=t.pos)
            items = [self.expr()]
            trailing = False
            while self.is_op(","):
                self.next()
                if self.is_op(")"):
                    trailing = True
                    break
                items.append(self.expr())
            self.expect_op(")")
            if len(items) == 1 and not trailing:
                return items[0]
            return S.TupleE(tuple(items), pos=t.pos)
        if t.kind == "op" and t.text == "<":
            self.next()
            items = []
            if not self.is_op(">"):
                items.append(self.expr())
                while self.is_op(","):
                    self.next()
                    items.append(self.expr())
            self.expect_op(">")
            return S.AddTupleE(tuple(items), pos=t.pos)
        self.fail(t, "expected an expression")


def parse_program(source: str) -> S.SurfaceProgram:
    return Parser(source).program()


def parse_type(source: str) -> S.SType:
    p = Parser(source)
    ty = p.type_()
    if p.raw().kind != "eof":
        p.fail(p.raw(), "expected end of type")
    return ty
