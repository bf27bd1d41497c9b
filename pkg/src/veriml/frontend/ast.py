"""Surface syntax tree.

All nodes carry a byte-offset span into the source file.  Spans are excluded
from structural equality so that ``parse(pretty_print(p)) == p`` holds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from veriml.types import Type

Span = tuple[int, int]

NOSPAN: Span = (0, 0)


def _span_field() -> Span:
    return field(default=NOSPAN, compare=False)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Logic syntax: terms and formulas share one surface grammar, GOSPEL-style.
# ---------------------------------------------------------------------------


@dataclass
class LExpr:
    pass


@dataclass
class LInt(LExpr):
    value: int
    span: Span = _span_field()


@dataclass
class LBool(LExpr):
    value: bool
    span: Span = _span_field()


@dataclass
class LUnit(LExpr):
    span: Span = _span_field()


@dataclass
class LVar(LExpr):
    name: str
    span: Span = _span_field()


@dataclass
class LDeref(LExpr):
    """``!r`` inside an annotation: the current value of a mutable variable."""

    name: str
    span: Span = _span_field()


@dataclass
class LApp(LExpr):
    """Application of a logical function, predicate, constructor or
    higher-order parameter.  Resolution happens during type checking."""

    name: str
    args: list[LExpr]
    span: Span = _span_field()


@dataclass
class LBinop(LExpr):
    """Arithmetic (+ - *), equality (= <>) and comparisons (< <= > >=)."""

    op: str
    left: LExpr
    right: LExpr
    span: Span = _span_field()


@dataclass
class LNeg(LExpr):
    arg: LExpr
    span: Span = _span_field()


@dataclass
class LTuple(LExpr):
    items: list[LExpr]
    span: Span = _span_field()


@dataclass
class LArrayRead(LExpr):
    array: LExpr
    index: LExpr
    span: Span = _span_field()


@dataclass
class LConn(LExpr):
    """Logical connective: 'and', 'or', 'implies', 'iff'."""

    op: str
    left: LExpr
    right: LExpr
    span: Span = _span_field()


@dataclass
class LNot(LExpr):
    arg: LExpr
    span: Span = _span_field()


@dataclass
class LQuant(LExpr):
    """'forall' or 'exists' with optionally annotated binders."""

    quant: str
    binders: list[tuple[str, Optional[Type]]]
    body: LExpr
    span: Span = _span_field()


@dataclass
class LIf(LExpr):
    cond: LExpr
    then: LExpr
    els: LExpr
    span: Span = _span_field()


@dataclass
class LMatch(LExpr):
    scrutinee: LExpr
    branches: list[tuple["Pattern", LExpr]]
    span: Span = _span_field()


@dataclass
class LLambda(LExpr):
    """``fun x -> e``; only legal as an argument of a higher-order symbol."""

    params: list[tuple[str, Optional[Type]]]
    body: LExpr
    span: Span = _span_field()


# ---------------------------------------------------------------------------
# Patterns (shared by program matches and logic matches).
# ---------------------------------------------------------------------------


@dataclass
class Pattern:
    pass


@dataclass
class PWild(Pattern):
    span: Span = _span_field()


@dataclass
class PVar(Pattern):
    name: str
    span: Span = _span_field()


@dataclass
class PConstr(Pattern):
    name: str  # "::" and "[]" are the list constructors
    args: list[Pattern]
    span: Span = _span_field()


@dataclass
class PTuple(Pattern):
    items: list[Pattern]
    span: Span = _span_field()


@dataclass
class POr(Pattern):
    alts: list[Pattern]
    span: Span = _span_field()


# ---------------------------------------------------------------------------
# Program expressions.
# ---------------------------------------------------------------------------


@dataclass
class Expr:
    pass


@dataclass
class EInt(Expr):
    value: int
    span: Span = _span_field()


@dataclass
class EBool(Expr):
    value: bool
    span: Span = _span_field()


@dataclass
class EUnit(Expr):
    span: Span = _span_field()


@dataclass
class EVar(Expr):
    name: str
    span: Span = _span_field()


@dataclass
class EBinop(Expr):
    op: str  # + - * = <> < <= > >=
    left: Expr
    right: Expr
    span: Span = _span_field()


@dataclass
class EAnd(Expr):
    left: Expr
    right: Expr
    span: Span = _span_field()


@dataclass
class EOr(Expr):
    left: Expr
    right: Expr
    span: Span = _span_field()


@dataclass
class ENot(Expr):
    arg: Expr
    span: Span = _span_field()


@dataclass
class ETuple(Expr):
    items: list[Expr]
    span: Span = _span_field()


@dataclass
class EConstr(Expr):
    name: str
    args: list[Expr]
    span: Span = _span_field()


@dataclass
class EApp(Expr):
    fn: str
    args: list[Expr]
    span: Span = _span_field()


@dataclass
class ELet(Expr):
    name: str
    value: Expr
    body: Expr
    span: Span = _span_field()


@dataclass
class EIf(Expr):
    cond: Expr
    then: Expr
    els: Optional[Expr]  # None: one-armed if of type unit
    span: Span = _span_field()


@dataclass
class EMatch(Expr):
    scrutinee: Expr
    branches: list[tuple[Pattern, Expr]]
    span: Span = _span_field()


@dataclass
class EArrayRead(Expr):
    array: Expr
    index: Expr
    span: Span = _span_field()


@dataclass
class EArrayLength(Expr):
    array: Expr
    span: Span = _span_field()


@dataclass
class ERef(Expr):
    init: Expr
    span: Span = _span_field()


@dataclass
class EDeref(Expr):
    name: str
    span: Span = _span_field()


@dataclass
class EAssign(Expr):
    name: str
    value: Expr
    span: Span = _span_field()


@dataclass
class EIncr(Expr):
    name: str
    span: Span = _span_field()


@dataclass
class EDecr(Expr):
    name: str
    span: Span = _span_field()


@dataclass
class ESeq(Expr):
    first: Expr
    second: Expr
    span: Span = _span_field()


@dataclass
class EFor(Expr):
    var: str
    lo: Expr
    hi: Expr
    invariants: list[LExpr]
    body: Expr
    span: Span = _span_field()


@dataclass
class ELetException(Expr):
    name: str
    payload: Optional[Type]
    body: Expr
    span: Span = _span_field()


@dataclass
class ERaise(Expr):
    exc: str
    payload: Optional[Expr]
    span: Span = _span_field()


@dataclass
class ETry(Expr):
    body: Expr
    handlers: list[tuple[str, Optional[Pattern], Expr]]
    span: Span = _span_field()


# ---------------------------------------------------------------------------
# Contracts and declarations.
# ---------------------------------------------------------------------------


@dataclass
class RaiseClause:
    exc: str
    payload: Optional[str]  # payload binder name, if any
    formula: LExpr
    span: Span = _span_field()


@dataclass
class Contract:
    result: Optional[str]
    fn_name: str
    args: list[str]
    requires: list[LExpr] = field(default_factory=list)
    ensures: list[LExpr] = field(default_factory=list)
    raises: list[RaiseClause] = field(default_factory=list)
    variants: list[LExpr] = field(default_factory=list)
    span: Span = _span_field()


@dataclass
class Decl:
    pass


@dataclass
class AbstractType(Decl):
    name: str
    span: Span = _span_field()


@dataclass
class AdtDef(Decl):
    name: str
    constructors: list[tuple[str, list[Type]]]
    span: Span = _span_field()


@dataclass
class TypeAlias(Decl):
    name: str
    body: Type
    span: Span = _span_field()


@dataclass
class AbstractVal(Decl):
    name: str
    type: Type
    contract: Optional[Contract]
    span: Span = _span_field()


@dataclass
class LetFun(Decl):
    name: str
    rec: bool
    params: list[tuple[str, Optional[Type]]]
    body: Expr
    contract: Optional[Contract]
    span: Span = _span_field()


@dataclass
class LogicFun(Decl):
    name: str
    rec: bool
    params: list[tuple[str, Type]]
    result: Type
    body: Optional[LExpr]
    variants: list[LExpr] = field(default_factory=list)
    span: Span = _span_field()


@dataclass
class LogicPred(Decl):
    name: str
    rec: bool
    params: list[tuple[str, Type]]
    body: Optional[LExpr]
    variants: list[LExpr] = field(default_factory=list)
    span: Span = _span_field()


@dataclass
class Lemma(Decl):
    name: str
    formula: LExpr
    span: Span = _span_field()


@dataclass
class Axiom(Decl):
    name: str
    formula: LExpr
    span: Span = _span_field()


@dataclass
class SurfaceProgram:
    decls: list[Decl]
    path: str = field(default="<memory>", compare=False)


Annotation = Union[Contract, Decl, list[LExpr]]
