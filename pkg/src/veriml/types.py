"""Types shared by the program layer and the logic layer.

A single type language covers both worlds.  The program layer additionally
uses ref types (function-local only) and the logic layer additionally uses
arrow types (only as parameters of higher-order logical functions).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Type:
    pass


@dataclass(frozen=True)
class TInt(Type):
    """Mathematical integers; there is no machine-integer type."""


@dataclass(frozen=True)
class TBool(Type):
    pass


@dataclass(frozen=True)
class TUnit(Type):
    pass


@dataclass(frozen=True)
class TAbstract(Type):
    name: str


@dataclass(frozen=True)
class TAdt(Type):
    name: str
    args: tuple[Type, ...] = ()


@dataclass(frozen=True)
class TTuple(Type):
    items: tuple[Type, ...]


@dataclass(frozen=True)
class TArray(Type):
    elem: Type


@dataclass(frozen=True)
class TRef(Type):
    elem: Type


@dataclass(frozen=True)
class TArrow(Type):
    params: tuple[Type, ...]
    result: Type


@dataclass(frozen=True)
class TVar(Type):
    """Unification/scheme variable; never survives type checking."""

    name: str


INT = TInt()
BOOL = TBool()
UNIT = TUnit()


def list_of(elem: Type) -> TAdt:
    return TAdt("list", (elem,))


def type_str(t: Type) -> str:
    """Surface syntax for a type, e.g. ``(t * tree) list``."""
    return _type_str(t, 0)


def _type_str(t: Type, prec: int) -> str:
    # prec levels: 0 = arrow, 1 = tuple, 2 = postfix application, 3 = atom
    if isinstance(t, TInt):
        return "int"
    if isinstance(t, TBool):
        return "bool"
    if isinstance(t, TUnit):
        return "unit"
    if isinstance(t, TAbstract):
        return t.name
    if isinstance(t, TVar):
        return "'" + t.name
    if isinstance(t, TAdt):
        if not t.args:
            return t.name
        if len(t.args) == 1:
            return f"{_type_str(t.args[0], 3)} {t.name}"
        inner = ", ".join(_type_str(a, 0) for a in t.args)
        return f"({inner}) {t.name}"
    if isinstance(t, TArray):
        return f"{_type_str(t.elem, 3)} array"
    if isinstance(t, TRef):
        return f"{_type_str(t.elem, 3)} ref"
    if isinstance(t, TTuple):
        s = " * ".join(_type_str(i, 2) for i in t.items)
        return f"({s})" if prec > 1 else s
    if isinstance(t, TArrow):
        parts = [_type_str(p, 1) for p in t.params] + [_type_str(t.result, 1)]
        s = " -> ".join(parts)
        return f"({s})" if prec > 0 else s
    raise AssertionError(f"unknown type node {t!r}")


def free_tvars(t: Type) -> set[str]:
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, TAdt):
        out: set[str] = set()
        for a in t.args:
            out |= free_tvars(a)
        return out
    if isinstance(t, TTuple):
        out = set()
        for a in t.items:
            out |= free_tvars(a)
        return out
    if isinstance(t, (TArray, TRef)):
        return free_tvars(t.elem)
    if isinstance(t, TArrow):
        out = free_tvars(t.result)
        for a in t.params:
            out |= free_tvars(a)
        return out
    return set()


def subst_type(t: Type, mapping: dict[str, Type]) -> Type:
    """Replace type variables by name; used for scheme instantiation."""
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, TAdt):
        return TAdt(t.name, tuple(subst_type(a, mapping) for a in t.args))
    if isinstance(t, TTuple):
        return TTuple(tuple(subst_type(a, mapping) for a in t.items))
    if isinstance(t, TArray):
        return TArray(subst_type(t.elem, mapping))
    if isinstance(t, TRef):
        return TRef(subst_type(t.elem, mapping))
    if isinstance(t, TArrow):
        return TArrow(
            tuple(subst_type(p, mapping) for p in t.params),
            subst_type(t.result, mapping),
        )
    return t
