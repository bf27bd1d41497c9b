"""Monomorphization: clone the polymorphic list library at every ground
element instance reachable from a task, leaving no type variables for the
first-order back end.

Only the prelude is polymorphic (user code is monomorphic by construction),
so the pass instantiates the whole list library once per element type and
rewrites applications, constructors and types accordingly.
"""
from __future__ import annotations

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.logic.subst import instantiate_scheme, map_types
from veriml.types import (
    INT,
    BOOL,
    UNIT,
    TAbstract,
    TAdt,
    TArray,
    TArrow,
    TTuple,
    TVar,
    Type,
)


class MonoError(Exception):
    pass


def type_key(t: Type) -> str:
    if isinstance(t, TAbstract):
        return t.name
    if t == INT:
        return "int"
    if t == BOOL:
        return "bool"
    if t == UNIT:
        return "unit"
    if isinstance(t, TAdt):
        if not t.args:
            return t.name
        return t.name + "_" + "_".join(type_key(a) for a in t.args)
    if isinstance(t, TTuple):
        return f"tup{len(t.items)}_" + "_".join(type_key(i) for i in t.items)
    if isinstance(t, TArray):
        return "arr_" + type_key(t.elem)
    if isinstance(t, TVar):
        raise MonoError(f"type variable '{t.name} survived into monomorphization")
    raise MonoError(f"cannot name type {t!r}")


def _mono_type(t: Type) -> Type:
    if isinstance(t, TAdt) and t.name == "list" and t.args:
        elem = _mono_type(t.args[0])
        return TAdt(f"list_{type_key(elem)}", ())
    if isinstance(t, TAdt):
        return TAdt(t.name, tuple(_mono_type(a) for a in t.args))
    if isinstance(t, TTuple):
        return TTuple(tuple(_mono_type(i) for i in t.items))
    if isinstance(t, TArray):
        return TArray(_mono_type(t.elem))
    if isinstance(t, TArrow):
        raise MonoError("arrow type survived into monomorphization")
    if isinstance(t, TVar):
        raise MonoError(f"type variable '{t.name} survived into monomorphization")
    return t


def _collect_list_elems(t: Type, out: list[Type]) -> None:
    if isinstance(t, TAdt):
        if t.name == "list" and t.args:
            _collect_list_elems(t.args[0], out)
            if t.args[0] not in out:
                out.append(t.args[0])
            return
        for a in t.args:
            _collect_list_elems(a, out)
    elif isinstance(t, TTuple):
        for i in t.items:
            _collect_list_elems(i, out)
    elif isinstance(t, (TArray,)):
        _collect_list_elems(t.elem, out)
    elif isinstance(t, TArrow):
        for p in t.params:
            _collect_list_elems(p, out)
        _collect_list_elems(t.result, out)


def _scan_types(node, out: list[Type]) -> None:
    map_types(node, lambda t: (_collect_list_elems(t, out), t)[1])


def _nil_name(k: str) -> str:
    return f"nil_{k}"


def _cons_name(k: str) -> str:
    return f"cons_{k}"


def _rewrite(node, poly: set[str]):
    def fix_constr_name(name: str, ty: Type) -> str:
        if name == "[]" or name == "::":
            assert isinstance(ty, TAdt) and ty.name == "list"
            k = type_key(_mono_type(ty.args[0]))
            return _nil_name(k) if name == "[]" else _cons_name(k)
        return name

    def walk(n):
        if isinstance(n, L.App):
            args = tuple(walk(a) for a in n.args)
            if n.name in poly and not n.via_var:
                if len(n.tyargs) != 1:
                    raise MonoError(f"unexpected type arity for {n.name!r}")
                k = type_key(_mono_type(n.tyargs[0]))
                return L.App(f"{n.name}_{k}", args, _mono_type(n.ty), ())
            return L.App(n.name, args, _mono_type(n.ty), (), n.via_var)
        if isinstance(n, L.PredApp):
            args = tuple(walk(a) for a in n.args)
            if n.name in poly:
                if len(n.tyargs) != 1:
                    raise MonoError(f"unexpected type arity for {n.name!r}")
                k = type_key(_mono_type(n.tyargs[0]))
                return L.PredApp(f"{n.name}_{k}", args, ())
            return L.PredApp(n.name, args, ())
        if isinstance(n, L.Constr):
            return L.Constr(
                fix_constr_name(n.name, n.ty),
                tuple(walk(a) for a in n.args),
                _mono_type(n.ty),  # type: ignore[arg-type]
            )
        if isinstance(n, L.PatConstr):
            return L.PatConstr(
                fix_constr_name(n.name, n.ty),
                tuple(walk(a) for a in n.args),
                _mono_type(n.ty),  # type: ignore[arg-type]
            )
        if isinstance(n, L.PatWild):
            return L.PatWild(_mono_type(n.ty))
        if isinstance(n, L.PatVar):
            return L.PatVar(n.name, _mono_type(n.ty))
        if isinstance(n, L.PatTuple):
            return L.PatTuple(tuple(walk(i) for i in n.items), _mono_type(n.ty))
        if isinstance(n, L.Var):
            return L.Var(n.name, _mono_type(n.ty))
        if isinstance(n, (L.IntConst, L.BoolConst, L.UnitConst, L.FTrue, L.FFalse)):
            return n
        if isinstance(n, L.Arith):
            return L.Arith(n.op, walk(n.left), walk(n.right))
        if isinstance(n, L.TupleT):
            return L.TupleT(tuple(walk(i) for i in n.items), _mono_type(n.ty))
        if isinstance(n, L.Ite):
            return L.Ite(walk(n.cond), walk(n.then), walk(n.els), _mono_type(n.ty))
        if isinstance(n, L.ArrayRead):
            return L.ArrayRead(walk(n.array), walk(n.index), _mono_type(n.ty))
        if isinstance(n, L.ArrayLen):
            return L.ArrayLen(walk(n.array))
        if isinstance(n, L.Match):
            return L.Match(
                walk(n.scrutinee),
                tuple((walk(p), walk(b)) for p, b in n.branches),
                _mono_type(n.ty),
            )
        if isinstance(n, L.Eq):
            return L.Eq(walk(n.left), walk(n.right), _mono_type(n.ty))
        if isinstance(n, L.Cmp):
            return L.Cmp(n.op, walk(n.left), walk(n.right))
        if isinstance(n, L.Conn):
            return L.Conn(n.op, walk(n.left), walk(n.right))
        if isinstance(n, L.Not):
            return L.Not(walk(n.arg))
        if isinstance(n, L.TermF):
            return L.TermF(walk(n.term))
        if isinstance(n, L.Tagged):
            return L.Tagged(n.kind, n.span, walk(n.formula), n.label)
        if isinstance(n, L.Quant):
            return L.Quant(
                n.quant, tuple((b, _mono_type(t)) for b, t in n.binders), walk(n.body)
            )
        if isinstance(n, L.Lambda):
            raise MonoError("lambda survived into monomorphization")
        raise AssertionError(f"mono rewrite: unknown node {n!r}")

    return walk(node)


def monomorphize(task: D.Task) -> D.Task:
    """Clone polymorphic declarations at every ground instance reachable
    from the task; the result contains no type variables."""
    elems: list[Type] = []
    for d in task.decls:
        if isinstance(d, D.ConstDecl):
            _collect_list_elems(d.ty, elems)
        elif isinstance(d, D.FunDef) and not d.tyvars:
            for _, t in d.params:
                _collect_list_elems(t, elems)
            if d.result is not None:
                _collect_list_elems(d.result, elems)
            _scan_types(d.body, elems)
        elif isinstance(d, D.FunDecl) and not d.tyvars:
            for t in d.params:
                _collect_list_elems(t, elems)
            if d.result is not None:
                _collect_list_elems(d.result, elems)
        elif isinstance(d, (D.AxiomDecl, D.LemmaDecl)) and not d.tyvars:
            _scan_types(d.formula, elems)
    for _, h in task.hyps:
        _scan_types(h, elems)
    _scan_types(task.goal, elems)

    # nested lists first, then by name, for a stable dependency order
    def depth(t: Type) -> int:
        inner: list[Type] = []
        _collect_list_elems(t, inner)
        return len(inner)

    elems = sorted(set(elems), key=lambda t: (depth(t), type_key(t)))

    poly = {
        d.name
        for d in task.decls
        if isinstance(d, (D.FunDef, D.FunDecl, D.AxiomDecl, D.LemmaDecl))
        and getattr(d, "tyvars", ())
    }

    out: list[D.Declaration] = []
    for d in task.decls:
        if isinstance(d, D.AdtDecl) and d.name == "list":
            for elem in elems:
                k = type_key(_mono_type(elem))
                em = _mono_type(elem)
                out.append(
                    D.AdtDecl(
                        f"list_{k}",
                        (),
                        (
                            (_nil_name(k), ()),
                            (_cons_name(k), (em, TAdt(f"list_{k}", ()))),
                        ),
                    )
                )
            continue
        if isinstance(d, (D.FunDef, D.FunDecl, D.AxiomDecl, D.LemmaDecl)) and getattr(d, "tyvars", ()):
            tyvars = d.tyvars
            if len(tyvars) != 1:
                raise MonoError(f"unsupported polymorphic arity in {d!r}")
            for elem in elems:
                k = type_key(_mono_type(elem))
                if isinstance(d, D.FunDef):
                    inst_body = instantiate_scheme(d.body, tyvars, (elem,))
                    out.append(
                        D.FunDef(
                            f"{d.name}_{k}",
                            (),
                            tuple(
                                (n, _mono_type(instantiate_type(t, tyvars[0], elem)))
                                for n, t in d.params
                            ),
                            _mono_type(instantiate_type(d.result, tyvars[0], elem))
                            if d.result is not None
                            else None,
                            _rewrite(inst_body, poly),
                            d.rec,
                            tuple(
                                _rewrite(instantiate_scheme(v, tyvars, (elem,)), poly)
                                for v in d.variants
                            ),
                        )
                    )
                elif isinstance(d, D.FunDecl):
                    out.append(
                        D.FunDecl(
                            f"{d.name}_{k}",
                            (),
                            tuple(
                                _mono_type(instantiate_type(t, tyvars[0], elem))
                                for t in d.params
                            ),
                            _mono_type(instantiate_type(d.result, tyvars[0], elem))
                            if d.result is not None
                            else None,
                        )
                    )
                else:
                    inst_formula = instantiate_scheme(d.formula, tyvars, (elem,))
                    out.append(
                        type(d)(f"{d.name}_{k}", _rewrite(inst_formula, poly), ())
                    )
            continue
        if isinstance(d, D.FunDef):
            out.append(
                D.FunDef(
                    d.name,
                    (),
                    tuple((n, _mono_type(t)) for n, t in d.params),
                    _mono_type(d.result) if d.result is not None else None,
                    _rewrite(d.body, poly),
                    d.rec,
                    tuple(_rewrite(v, poly) for v in d.variants),
                )
            )
        elif isinstance(d, D.FunDecl):
            out.append(
                D.FunDecl(
                    d.name,
                    (),
                    tuple(_mono_type(t) for t in d.params),
                    _mono_type(d.result) if d.result is not None else None,
                )
            )
        elif isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
            out.append(type(d)(d.name, _rewrite(d.formula, poly), ()))
        elif isinstance(d, D.ConstDecl):
            out.append(D.ConstDecl(d.name, _mono_type(d.ty)))
        else:
            out.append(d)

    hyps = tuple((n, _rewrite(h, poly)) for n, h in task.hyps)
    goal = _rewrite(task.goal, poly)
    return D.Task(task.name, tuple(out), hyps, goal)


def instantiate_type(t: Type, tyvar: str, at: Type) -> Type:
    from veriml.types import subst_type

    return subst_type(t, {tyvar: at})
