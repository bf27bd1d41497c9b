"""Typed first-order core: terms, formulas, patterns.

Every node is immutable.  Type arguments of polymorphic symbols are recorded
at each application so later passes (monomorphization, evaluation) need no
extra inference.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from veriml.types import Type, TAdt, TArrow


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Formula:
    pass


Body = Union[Term, Formula]


@dataclass(frozen=True)
class Var(Term):
    name: str
    ty: Type


@dataclass(frozen=True)
class IntConst(Term):
    value: int


@dataclass(frozen=True)
class BoolConst(Term):
    value: bool


@dataclass(frozen=True)
class UnitConst(Term):
    pass


@dataclass(frozen=True)
class Arith(Term):
    op: str  # + - *
    left: Term
    right: Term


@dataclass(frozen=True)
class App(Term):
    """Application of a logical function symbol or of a function-sorted
    variable (``via_var``)."""

    name: str
    args: tuple[Term, ...]
    ty: Type
    tyargs: tuple[Type, ...] = ()
    via_var: bool = False


@dataclass(frozen=True)
class Constr(Term):
    name: str
    args: tuple[Term, ...]
    ty: TAdt


@dataclass(frozen=True)
class TupleT(Term):
    items: tuple[Term, ...]
    ty: Type


@dataclass(frozen=True)
class Ite(Term):
    cond: Formula
    then: Term
    els: Term
    ty: Type


@dataclass(frozen=True)
class ArrayRead(Term):
    array: Term
    index: Term
    ty: Type  # element type


@dataclass(frozen=True)
class ArrayLen(Term):
    array: Term


@dataclass(frozen=True)
class Lambda(Term):
    """Anonymous function; appears only as an argument of a higher-order
    symbol and is eliminated by defunctionalization."""

    params: tuple[tuple[str, Type], ...]
    body: Body
    ty: TArrow


# -- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class Pat:
    pass


@dataclass(frozen=True)
class PatWild(Pat):
    ty: Type


@dataclass(frozen=True)
class PatVar(Pat):
    name: str
    ty: Type


@dataclass(frozen=True)
class PatConstr(Pat):
    name: str
    args: tuple[Pat, ...]
    ty: TAdt


@dataclass(frozen=True)
class PatTuple(Pat):
    items: tuple[Pat, ...]
    ty: Type


@dataclass(frozen=True)
class Match(Term):
    """Pattern match; used in term position, or in formula position wrapped
    in ``TermF`` (branch bodies are then formulas)."""

    scrutinee: Term
    branches: tuple[tuple[Pat, Body], ...]
    ty: Type


# -- formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True)
class FFalse(Formula):
    pass


@dataclass(frozen=True)
class PredApp(Formula):
    name: str
    args: tuple[Term, ...]
    tyargs: tuple[Type, ...] = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term
    ty: Type  # operand type; any non-arrow sort


@dataclass(frozen=True)
class Cmp(Formula):
    op: str  # < <= > >=
    left: Term
    right: Term


@dataclass(frozen=True)
class Conn(Formula):
    op: str  # and | or | implies | iff
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Quant(Formula):
    quant: str  # forall | exists
    binders: tuple[tuple[str, Type], ...]
    body: Formula


@dataclass(frozen=True)
class TermF(Formula):
    """A boolean term used as a formula."""

    term: Term


@dataclass(frozen=True)
class Tagged(Formula):
    """Obligation marker produced by the WP transformer and consumed by the
    VC splitter; never reaches a finished task."""

    kind: str
    span: tuple[int, int]
    formula: Formula
    label: str = ""


TRUE = FTrue()
FALSE = FFalse()


def conj(parts: list[Formula]) -> Formula:
    parts = [p for p in parts if not isinstance(p, FTrue)]
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Conn("and", p, out)
    return out


def implies(premise: Formula, conclusion: Formula) -> Formula:
    if isinstance(premise, FTrue):
        return conclusion
    if isinstance(conclusion, FTrue):
        return TRUE
    return Conn("implies", premise, conclusion)


def forall(binders: list[tuple[str, Type]], body: Formula) -> Formula:
    if not binders:
        return body
    if isinstance(body, FTrue):
        return TRUE
    return Quant("forall", tuple(binders), body)


def pat_vars(p: Pat) -> list[tuple[str, Type]]:
    if isinstance(p, PatVar):
        return [(p.name, p.ty)]
    if isinstance(p, PatConstr):
        out: list[tuple[str, Type]] = []
        for a in p.args:
            out.extend(pat_vars(a))
        return out
    if isinstance(p, PatTuple):
        out = []
        for a in p.items:
            out.extend(pat_vars(a))
        return out
    return []


def pat_to_term(p: Pat) -> Term:
    """The term a pattern denotes; wildcards must have been named first."""
    if isinstance(p, PatVar):
        return Var(p.name, p.ty)
    if isinstance(p, PatConstr):
        return Constr(p.name, tuple(pat_to_term(a) for a in p.args), p.ty)
    if isinstance(p, PatTuple):
        return TupleT(tuple(pat_to_term(i) for i in p.items), p.ty)
    raise ValueError("wildcard pattern has no term form")
