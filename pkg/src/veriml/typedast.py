"""Typed program layer produced by the type checker.

Expression nodes mirror the surface tree with resolved types and spans;
contract clauses are core-logic formulas paired with their source spans.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from veriml.frontend.ast import Span, NOSPAN
from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import Type, TAdt, TRef


@dataclass
class XExpr:
    pass


@dataclass
class XInt(XExpr):
    value: int
    span: Span = NOSPAN


@dataclass
class XBool(XExpr):
    value: bool
    span: Span = NOSPAN


@dataclass
class XUnit(XExpr):
    span: Span = NOSPAN


@dataclass
class XVar(XExpr):
    name: str
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XBinop(XExpr):
    op: str  # + - * = <> < <= > >=
    left: XExpr
    right: XExpr
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XAnd(XExpr):
    left: XExpr
    right: XExpr
    span: Span = NOSPAN


@dataclass
class XOr(XExpr):
    left: XExpr
    right: XExpr
    span: Span = NOSPAN


@dataclass
class XNot(XExpr):
    arg: XExpr
    span: Span = NOSPAN


@dataclass
class XTuple(XExpr):
    items: list[XExpr]
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XConstr(XExpr):
    name: str
    args: list[XExpr]
    ty: TAdt = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XApp(XExpr):
    fn: str
    args: list[XExpr]
    ty: Type = None  # type: ignore[assignment]
    tyargs: tuple[Type, ...] = ()
    span: Span = NOSPAN


@dataclass
class XLet(XExpr):
    name: str
    value: XExpr
    body: XExpr
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XIf(XExpr):
    cond: XExpr
    then: XExpr
    els: Optional[XExpr]
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XMatch(XExpr):
    scrutinee: XExpr
    branches: list[tuple[L.Pat, XExpr]]
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XArrayRead(XExpr):
    array: XExpr
    index: XExpr
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XArrayLen(XExpr):
    array: XExpr
    span: Span = NOSPAN


@dataclass
class XRef(XExpr):
    init: XExpr
    ty: TRef = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XDeref(XExpr):
    name: str
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XAssign(XExpr):
    name: str
    value: XExpr
    span: Span = NOSPAN


@dataclass
class XIncr(XExpr):
    name: str
    span: Span = NOSPAN


@dataclass
class XDecr(XExpr):
    name: str
    span: Span = NOSPAN


@dataclass
class XSeq(XExpr):
    first: XExpr
    second: XExpr
    span: Span = NOSPAN


@dataclass
class XFor(XExpr):
    var: str
    lo: XExpr
    hi: XExpr
    invariants: list[tuple[L.Formula, Span]]
    body: XExpr
    modified: tuple[str, ...]  # mutable variables assigned in the body
    span: Span = NOSPAN


@dataclass
class XLetExc(XExpr):
    name: str
    payload: Optional[Type]
    body: XExpr
    span: Span = NOSPAN


@dataclass
class XRaise(XExpr):
    exc: str
    payload: Optional[XExpr]
    ty: Type = None  # type: ignore[assignment]
    span: Span = NOSPAN


@dataclass
class XTry(XExpr):
    body: XExpr
    handlers: list[tuple[str, Optional[L.Pat], XExpr]]
    span: Span = NOSPAN


def expr_type(e: XExpr) -> Type:
    from veriml.types import INT, BOOL, UNIT

    if isinstance(e, XInt):
        return INT
    if isinstance(e, (XBool, XAnd, XOr, XNot)):
        return BOOL
    if isinstance(
        e, (XUnit, XAssign, XIncr, XDecr, XFor)
    ):
        return UNIT
    if isinstance(e, XBinop):
        return e.ty
    if isinstance(e, XArrayLen):
        return INT
    if isinstance(e, XSeq):
        return expr_type(e.second)
    if isinstance(e, (XLetExc, XTry)):
        return expr_type(e.body)
    if isinstance(e, XIf):
        return UNIT if e.els is None else e.ty
    return e.ty  # type: ignore[attr-defined]


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass
class TContract:
    result: str
    requires: list[tuple[L.Formula, Span]] = field(default_factory=list)
    ensures: list[tuple[L.Formula, Span]] = field(default_factory=list)
    raises: list[tuple[str, Optional[str], L.Formula, Span]] = field(default_factory=list)
    variants: list[L.Term] = field(default_factory=list)


@dataclass
class TDecl:
    pass


@dataclass
class TTypeDecl(TDecl):
    """Abstract type or ADT; carries the logic-side declaration."""

    decl: Union[D.SortDecl, D.AdtDecl]
    span: Span = NOSPAN


@dataclass
class TVal(TDecl):
    """Abstract program function (``val``) with its contract."""

    name: str
    params: list[tuple[str, Type]]
    result: Type
    contract: Optional[TContract]
    span: Span = NOSPAN


@dataclass
class TFun(TDecl):
    name: str
    rec: bool
    params: list[tuple[str, Type]]
    result: Type
    body: XExpr
    contract: Optional[TContract]
    span: Span = NOSPAN


@dataclass
class TLogic(TDecl):
    """Logical function/predicate, axiom or lemma."""

    decl: D.Declaration
    span: Span = NOSPAN


@dataclass
class TypedProgram:
    decls: list[TDecl]
    symbols: "SymbolTable" = None  # type: ignore[assignment]
    warnings: list[str] = field(default_factory=list)
    path: str = "<memory>"
    source: str = ""


@dataclass
class SymbolTable:
    """Name -> kind map for --dump-types and cross-layer lookups."""

    types: dict[str, str] = field(default_factory=dict)
    constructors: dict[str, tuple[str, tuple[Type, ...]]] = field(default_factory=dict)
    program_fns: dict[str, tuple[list[Type], Type]] = field(default_factory=dict)
    logic_fns: dict[str, D.Declaration] = field(default_factory=dict)
    lemmas: dict[str, D.LemmaDecl] = field(default_factory=dict)
    axioms: dict[str, D.AxiomDecl] = field(default_factory=dict)
    exceptions: dict[str, Optional[Type]] = field(default_factory=dict)

    def dump(self) -> str:
        lines = []
        for name in sorted(self.types):
            lines.append(f"type {name} : {self.types[name]}")
        for name in sorted(self.constructors):
            adt, args = self.constructors[name]
            from veriml.types import type_str

            sig = " * ".join(type_str(a) for a in args) if args else "<no arguments>"
            lines.append(f"constructor {name} : {sig} -> {adt}")
        for name in sorted(self.exceptions):
            payload = self.exceptions[name]
            from veriml.types import type_str

            p = f" of {type_str(payload)}" if payload is not None else ""
            lines.append(f"exception {name}{p}")
        from veriml.types import type_str

        for name in sorted(self.program_fns):
            params, result = self.program_fns[name]
            sig = " -> ".join([type_str(p) for p in params] + [type_str(result)])
            lines.append(f"program function {name} : {sig}")
        for name in sorted(self.logic_fns):
            d = self.logic_fns[name]
            if isinstance(d, (D.FunDecl, D.FunDef)):
                kind = "logical predicate" if d.result is None else "logical function"
                defined = "defined" if isinstance(d, D.FunDef) else "abstract"
                ps = d.params if isinstance(d, D.FunDecl) else tuple(t for _, t in d.params)
                sig = " -> ".join(
                    [type_str(p) for p in ps]
                    + ([type_str(d.result)] if d.result is not None else ["prop"])
                )
                lines.append(f"{kind} {name} ({defined}) : {sig}")
        for name in sorted(self.axioms):
            lines.append(f"axiom {name}")
        for name in sorted(self.lemmas):
            lines.append(f"lemma {name}")
        return "\n".join(lines) + "\n"
