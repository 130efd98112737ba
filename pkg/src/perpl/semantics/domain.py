"""Finite denotations of μ-free types.

Values are numbered with a mixed radix so that the compiler can do index
arithmetic instead of building value objects:

* tensors are row-major over their components,
* sums and additive products number their components one block after another,
* a function value (a, b) is a·|B| + b.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

from .. import core as C
from ..errors import CompileError


class Tagged(NamedTuple):
    """A value of a sum or additive product: 1-based component index and payload."""

    index: int
    value: object


@lru_cache(maxsize=None)
def size(t: C.Type) -> int:
    if isinstance(t, C.TTensor):
        n = 1
        for s in t.items:
            n *= size(s)
        return n
    if isinstance(t, (C.TSum, C.TWith)):
        return sum(size(s) for s in t.items)
    if isinstance(t, C.TArrow):
        return size(t.dom) * size(t.cod)
    raise CompileError(f"type {C.show_type(t)} has no finite denotation (recursive types must be eliminated)")


@lru_cache(maxsize=None)
def offsets(t: C.Type) -> tuple:
    """Start index of each component block of a sum or additive product."""
    out, k = [], 0
    for s in t.items:
        out.append(k)
        k += size(s)
    return tuple(out)


def value_of(t: C.Type, i: int):
    """The SemValue numbered i in ⟦t⟧."""
    if isinstance(t, C.TTensor):
        parts = []
        for s in reversed(t.items):
            i, r = divmod(i, size(s))
            parts.append(value_of(s, r))
        return tuple(reversed(parts))
    if isinstance(t, (C.TSum, C.TWith)):
        for k, (off, s) in enumerate(zip(offsets(t), t.items)):
            if i < off + size(s):
                return Tagged(k + 1, value_of(s, i - off))
    if isinstance(t, C.TArrow):
        a, b = divmod(i, size(t.cod))
        return (value_of(t.dom, a), value_of(t.cod, b))
    raise CompileError(f"no value {i} in {C.show_type(t)}")


def index_of(t: C.Type, v) -> int:
    if isinstance(t, C.TTensor):
        i = 0
        for s, x in zip(t.items, v):
            i = i * size(s) + index_of(s, x)
        return i
    if isinstance(t, (C.TSum, C.TWith)):
        k, x = v
        return offsets(t)[k - 1] + index_of(t.items[k - 1], x)
    if isinstance(t, C.TArrow):
        a, b = v
        return index_of(t.dom, a) * size(t.cod) + index_of(t.cod, b)
    raise CompileError(f"not a value of {C.show_type(t)}")


def enumerate_domain(t: C.Type) -> list:
    """⟦t⟧ in canonical order."""
    return [value_of(t, i) for i in range(size(t))]


def render(t: C.Type, i: int) -> str:
    """Text for value i of t: (), true, false, (a, b), in2(v), pr1(v), (a -> b)."""
    if t == C.BOOL:
        return "true" if i == 0 else "false"
    if isinstance(t, C.TTensor):
        parts = []
        for s in reversed(t.items):
            i, r = divmod(i, size(s))
            parts.append(render(s, r))
        parts.reverse()
        if len(parts) == 1:
            return f"({parts[0]},)"
        return "(" + ", ".join(parts) + ")"
    if isinstance(t, (C.TSum, C.TWith)):
        word = "in" if isinstance(t, C.TSum) else "pr"
        for k, (off, s) in enumerate(zip(offsets(t), t.items)):
            if i < off + size(s):
                return f"{word}{k + 1}({render(s, i - off)})"
    if isinstance(t, C.TArrow):
        a, b = divmod(i, size(t.cod))
        return f"({render(t.dom, a)} -> {render(t.cod, b)})"
    raise CompileError(f"no value {i} in {C.show_type(t)}")

