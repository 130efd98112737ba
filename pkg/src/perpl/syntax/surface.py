"""Surface syntax tree, as written by the programmer.

Positions are carried for diagnostics but ignored by equality, so a
pretty-printed and re-parsed program compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

Pos = Optional[tuple[int, int]]


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


# types

@dataclass
class SType:
    pos: Pos = _pos()


@dataclass
class TName(SType):
    name: str


@dataclass
class TFun(SType):
    dom: SType
    cod: SType


@dataclass
class TOp(SType):
    """n-ary `*` (tensor), `&` (with) or `+` (sum)."""

    op: str
    items: tuple[SType, ...]


# expressions

@dataclass
class SExpr:
    pos: Pos = _pos()


@dataclass
class Name(SExpr):
    name: str


@dataclass
class Lambda(SExpr):
    var: str
    ty: Optional[SType]
    body: SExpr


@dataclass
class Apply(SExpr):
    fn: SExpr
    arg: SExpr


@dataclass
class AmbE(SExpr):
    left: SExpr
    right: SExpr


@dataclass
class FailE(SExpr):
    pass


@dataclass
class FactorE(SExpr):
    weight: Fraction
    body: SExpr
    text: Optional[str] = field(default=None, compare=False)  # literal as written


@dataclass
class TupleE(SExpr):
    items: tuple[SExpr, ...]


@dataclass
class AddTupleE(SExpr):
    items: tuple[SExpr, ...]


@dataclass
class ProjE(SExpr):
    expr: SExpr
    index: int  # 1-based, as written


@dataclass
class LetE(SExpr):
    """`let x = ...`, or with `names` a tuple pattern `let (x, y) = ...`."""

    var: Optional[str]
    names: Optional[tuple[str, ...]]
    ty: Optional[SType]
    bound: SExpr
    body: SExpr


@dataclass
class IfE(SExpr):
    cond: SExpr
    then: SExpr
    other: SExpr


@dataclass
class AndE(SExpr):
    left: SExpr
    right: SExpr


@dataclass
class EqE(SExpr):
    left: SExpr
    right: SExpr


@dataclass
class Arm:
    ctor: str
    binders: tuple[str, ...]
    body: SExpr
    pos: Pos = _pos()


@dataclass
class CaseE(SExpr):
    scrut: SExpr
    unfold: bool
    arms: tuple[Arm, ...]


@dataclass
class FoldE(SExpr):
    expr: SExpr


# programs

@dataclass
class DataDecl:
    name: str
    ctors: tuple[tuple[str, tuple[SType, ...]], ...]
    pos: Pos = _pos()


@dataclass
class Param:
    name: str
    ty: Optional[SType]


@dataclass
class Define:
    name: str
    params: tuple[Param, ...]
    ret: Optional[SType]
    body: SExpr
    pos: Pos = _pos()


@dataclass
class SurfaceProgram:
    data_decls: list[DataDecl]
    defines: list[Define]
    main: SExpr
    # order in which data/define items appeared
    order: list[tuple[str, int]] = field(default_factory=list, compare=False)
