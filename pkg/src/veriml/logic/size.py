"""Structural size measures for algebraic types.

Structural variants compile to integer measures via a per-ADT ``size``
function: leaf-like constructors measure 0 and every recursive argument adds
one plus its own size.  Each size function comes with a nonnegativity axiom.
"""
from __future__ import annotations

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import INT, TAdt, TVar, Type


def size_fn_name(adt_name: str) -> str:
    return f"size_{adt_name}"


def adt_size(adt: D.AdtDecl) -> tuple[D.FunDef, D.AxiomDecl]:
    """Size function and its ``size >= 0`` axiom for one ADT."""
    name = size_fn_name(adt.name)
    self_ty = TAdt(adt.name, tuple(TVar(v) for v in adt.tyvars))
    branches = []
    for cname, arg_tys in adt.constructors:
        binders = []
        total: L.Term = L.IntConst(0)
        pats: list[L.Pat] = []
        for i, at in enumerate(arg_tys):
            if _is_recursive(at, adt.name):
                vn = f"s{i}"
                pats.append(L.PatVar(vn, at))
                total = L.Arith(
                    "+",
                    total,
                    L.Arith(
                        "+",
                        L.IntConst(1),
                        L.App(name, (L.Var(vn, at),), INT, tuple(TVar(v) for v in adt.tyvars)),
                    ),
                )
            else:
                pats.append(L.PatWild(at))
        branches.append((L.PatConstr(cname, tuple(pats), self_ty), _simplify(total)))
    body = L.Match(L.Var("x", self_ty), tuple(branches), INT)
    fn = D.FunDef(
        name, adt.tyvars, (("x", self_ty),), INT, body, rec=True,
        variants=(L.Var("x", self_ty),),
    )
    axiom = D.AxiomDecl(
        f"{name}_nonneg",
        L.Quant(
            "forall",
            (("x", self_ty),),
            L.Cmp(
                "<=",
                L.IntConst(0),
                L.App(name, (L.Var("x", self_ty),), INT, tuple(TVar(v) for v in adt.tyvars)),
            ),
        ),
        adt.tyvars,
    )
    return fn, axiom


def _is_recursive(t: Type, adt_name: str) -> bool:
    return isinstance(t, TAdt) and t.name == adt_name


def _simplify(t: L.Term) -> L.Term:
    # drop the leading 0 of the sum accumulator
    if isinstance(t, L.Arith) and t.op == "+" and t.left == L.IntConst(0):
        return t.right
    return t
