"""Defunctionalization: eliminate lambda arguments of higher-order logical
functions.

For each syntactically distinct lambda shape passed to a higher-order
symbol, a fresh first-order instance of that symbol is emitted whose leading
parameters are the lambda's closure variables, with defining equations
specialized by beta reduction.  Lemmas and axioms universally quantified
over a function sort are instantiated once per emitted instance.  Instance
names reuse the schema name when there is a single instance, so task names
and proof scripts stay readable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.logic.subst import free_vars, substitute
from veriml.types import TArrow, Type


class DefuncError(Exception):
    pass


@dataclass
class _Instance:
    schema: str
    key: str
    name: str
    closure: tuple[tuple[str, Type], ...]  # normalized closure parameters
    lam: L.Lambda  # normalized lambda (closure params free)
    positions: tuple[int, ...]


@dataclass
class DefuncResult:
    decls: list[D.Declaration]
    instances: dict[str, list[str]] = field(default_factory=dict)

    def rewrite(self, node: L.Body) -> L.Body:
        return _rewrite(node, self._by_key)  # type: ignore[attr-defined]


def _ordered_free_vars(node: L.Body, bound: set[str]) -> list[tuple[str, Type]]:
    """Free variables in deterministic first-appearance order."""
    out: list[tuple[str, Type]] = []
    seen: set[str] = set()

    def walk(n, bnd: set[str]) -> None:
        if isinstance(n, L.Var):
            if n.name not in bnd and n.name not in seen:
                seen.add(n.name)
                out.append((n.name, n.ty))
            return
        if isinstance(n, L.Quant):
            walk_body_with(n.body, bnd | {x for x, _ in n.binders})
            return
        if isinstance(n, L.Lambda):
            walk_body_with(n.body, bnd | {x for x, _ in n.params})
            return
        if isinstance(n, L.Match):
            walk(n.scrutinee, bnd)
            for pat, body in n.branches:
                walk_body_with(body, bnd | {x for x, _ in L.pat_vars(pat)})
            return
        if isinstance(n, L.App) and n.via_var and n.name not in bnd:
            raise DefuncError(
                "lambda closing over a function-sorted variable is not supported"
            )
        for attr in ("left", "right", "arg", "cond", "then", "els", "term",
                     "formula", "array", "index"):
            child = getattr(n, attr, None)
            if isinstance(child, (L.Term, L.Formula)):
                walk(child, bnd)
        for attr in ("args", "items"):
            children = getattr(n, attr, None)
            if isinstance(children, tuple):
                for c in children:
                    if isinstance(c, (L.Term, L.Formula)):
                        walk(c, bnd)

    def walk_body_with(n, bnd: set[str]) -> None:
        walk(n, bnd)

    walk(node, set(bound))
    return out


def _normalize_lambda(lam: L.Lambda) -> tuple[str, tuple[tuple[str, Type], ...], L.Lambda]:
    """Canonicalize bound names; closure variables keep their spelling (two
    lambdas differing only in closure names count as distinct instances).
    Returns the instance key, closure parameters and normalized lambda."""
    closure = _ordered_free_vars(lam, set())
    bmap = {}
    bparams = []
    for i, (name, ty) in enumerate(lam.params):
        nn = f"b{i}"
        bmap[name] = L.Var(nn, ty)
        bparams.append((nn, ty))
    norm_body = substitute(lam.body, bmap) if bmap else lam.body
    norm = L.Lambda(tuple(bparams), norm_body, lam.ty)
    return repr(norm), tuple(closure), norm


def _collect(node: L.Body, found: list[tuple[str, tuple[int, ...], L.Lambda]]) -> None:
    if isinstance(node, L.App):
        lam_positions = tuple(
            i for i, a in enumerate(node.args) if isinstance(a, L.Lambda)
        )
        if lam_positions:
            if node.via_var:
                raise DefuncError(
                    f"lambda passed to applied variable {node.name!r}"
                )
            if len(lam_positions) != 1:
                raise DefuncError("multiple lambda arguments are not supported")
            found.append((node.name, lam_positions, node.args[lam_positions[0]]))  # type: ignore[arg-type]
    for attr in ("left", "right", "arg", "cond", "then", "els", "term",
                 "formula", "array", "index", "scrutinee", "body"):
        child = getattr(node, attr, None)
        if isinstance(child, (L.Term, L.Formula)):
            _collect(child, found)
    for attr in ("args", "items"):
        children = getattr(node, attr, None)
        if isinstance(children, tuple):
            for c in children:
                if isinstance(c, (L.Term, L.Formula)):
                    _collect(c, found)
    if isinstance(node, L.Match):
        for _, b in node.branches:
            _collect(b, found)


def _decl_bodies(d: D.Declaration) -> list[L.Body]:
    if isinstance(d, D.FunDef):
        return [d.body]
    if isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
        return [d.formula]
    return []


def _rewrite(node, by_key: dict[str, _Instance]):
    """Replace higher-order applications by their first-order instances."""
    if isinstance(node, L.App):
        args = tuple(_rewrite(a, by_key) for a in node.args)
        lam_positions = [i for i, a in enumerate(args) if isinstance(a, L.Lambda)]
        if lam_positions:
            pos = lam_positions[0]
            lam = args[pos]
            assert isinstance(lam, L.Lambda)
            key, closure_params, _norm = _normalize_lambda(lam)
            inst = by_key.get(f"{node.name}|{key}")
            if inst is None:
                raise DefuncError(
                    f"no instance for lambda argument of {node.name!r}"
                )
            closure_args = tuple(
                L.Var(name, ty) for name, ty in _ordered_free_vars(lam, set())
            )
            rest = tuple(a for i, a in enumerate(args) if i != pos)
            return L.App(inst.name, closure_args + rest, node.ty, ())
        return L.App(node.name, args, node.ty, node.tyargs, node.via_var)
    if isinstance(node, (L.Var, L.IntConst, L.BoolConst, L.UnitConst, L.FTrue, L.FFalse)):
        return node
    if isinstance(node, L.Arith):
        return L.Arith(node.op, _rewrite(node.left, by_key), _rewrite(node.right, by_key))
    if isinstance(node, L.Constr):
        return L.Constr(node.name, tuple(_rewrite(a, by_key) for a in node.args), node.ty)
    if isinstance(node, L.TupleT):
        return L.TupleT(tuple(_rewrite(a, by_key) for a in node.items), node.ty)
    if isinstance(node, L.Ite):
        return L.Ite(_rewrite(node.cond, by_key), _rewrite(node.then, by_key),
                     _rewrite(node.els, by_key), node.ty)
    if isinstance(node, L.ArrayRead):
        return L.ArrayRead(_rewrite(node.array, by_key), _rewrite(node.index, by_key), node.ty)
    if isinstance(node, L.ArrayLen):
        return L.ArrayLen(_rewrite(node.array, by_key))
    if isinstance(node, L.Lambda):
        return L.Lambda(node.params, _rewrite(node.body, by_key), node.ty)
    if isinstance(node, L.Match):
        return L.Match(
            _rewrite(node.scrutinee, by_key),
            tuple((p, _rewrite(b, by_key)) for p, b in node.branches),
            node.ty,
        )
    if isinstance(node, L.PredApp):
        return L.PredApp(node.name, tuple(_rewrite(a, by_key) for a in node.args), node.tyargs)
    if isinstance(node, L.Eq):
        return L.Eq(_rewrite(node.left, by_key), _rewrite(node.right, by_key), node.ty)
    if isinstance(node, L.Cmp):
        return L.Cmp(node.op, _rewrite(node.left, by_key), _rewrite(node.right, by_key))
    if isinstance(node, L.Conn):
        return L.Conn(node.op, _rewrite(node.left, by_key), _rewrite(node.right, by_key))
    if isinstance(node, L.Not):
        return L.Not(_rewrite(node.arg, by_key))
    if isinstance(node, L.TermF):
        return L.TermF(_rewrite(node.term, by_key))
    if isinstance(node, L.Tagged):
        return L.Tagged(node.kind, node.span, _rewrite(node.formula, by_key), node.label)
    if isinstance(node, L.Quant):
        return L.Quant(node.quant, node.binders, _rewrite(node.body, by_key))
    raise AssertionError(f"rewrite: unknown node {node!r}")


def _arrow_params(d: D.FunDef) -> list[int]:
    return [i for i, (_, t) in enumerate(d.params) if isinstance(t, TArrow)]


def _freshen_closure(
    closure: tuple[tuple[str, Type], ...], taken: set[str], lam: L.Lambda
) -> tuple[list[tuple[str, Type]], L.Lambda]:
    """Rename closure parameters that clash with the host's own names; the
    host keeps its spelling so proof scripts can refer to it."""
    renames: dict[str, L.Term] = {}
    out: list[tuple[str, Type]] = []
    for name, ty in closure:
        nn = name
        while nn in taken:
            nn = nn + "'"
        taken.add(nn)
        if nn != name:
            renames[name] = L.Var(nn, ty)
        out.append((nn, ty))
    if renames:
        lam = L.Lambda(lam.params, substitute(lam.body, renames), lam.ty)
    return out, lam


def _specialize_fun(schema: D.FunDef, inst: _Instance) -> D.FunDef:
    arrow_idx = _arrow_params(schema)
    if list(inst.positions) != arrow_idx:
        raise DefuncError(
            f"lambda argument positions of {schema.name!r} do not line up with "
            "its function-sorted parameters"
        )
    pos = inst.positions[0]
    p_name = schema.params[pos][0]
    own = [(n, t) for i, (n, t) in enumerate(schema.params) if i != pos]
    closure, lam = _freshen_closure(inst.closure, {n for n, _ in own}, inst.lam)
    new_params = closure + own
    body = substitute(schema.body, {p_name: lam})
    key2, _, _ = _normalize_lambda(lam)
    body = _rewrite(body, {f"{schema.name}|{key2}": inst})
    variants = tuple(_rewrite(v, {}) for v in schema.variants)
    return D.FunDef(
        inst.name, schema.tyvars, tuple(new_params), schema.result, body,
        rec=schema.rec, variants=variants,
    )


def _specialize_lemma(decl, inst: _Instance):
    formula = decl.formula
    if not isinstance(formula, L.Quant) or formula.quant != "forall":
        return None
    arrow_binders = [(n, t) for n, t in formula.binders if isinstance(t, TArrow)]
    if not arrow_binders:
        return None
    if len(arrow_binders) != 1:
        raise DefuncError("lemmas over several function sorts are not supported")
    fn_name, fn_ty = arrow_binders[0]
    if fn_ty != inst.lam.ty:
        return None
    rest = [(n, t) for n, t in formula.binders if n != fn_name]
    closure, lam = _freshen_closure(inst.closure, {n for n, _ in rest}, inst.lam)
    body = substitute(formula.body, {fn_name: lam})
    key2, _, _ = _normalize_lambda(lam)
    body = _rewrite(body, {f"{inst.schema}|{key2}": inst})
    new_binders = tuple(closure) + tuple(rest)
    new_formula = L.Quant("forall", new_binders, body) if new_binders else body
    cls = type(decl)
    return cls(decl.name, new_formula, decl.tyvars)


def defunctionalize(
    decls: list[D.Declaration], extra_bodies: Optional[list[L.Body]] = None
) -> DefuncResult:
    found: list[tuple[str, tuple[int, ...], L.Lambda]] = []
    for d in decls:
        for b in _decl_bodies(d):
            _collect(b, found)
    for b in extra_bodies or []:
        _collect(b, found)

    schemas = {d.name: d for d in decls if isinstance(d, D.FunDef)}
    instances: list[_Instance] = []
    by_key: dict[str, _Instance] = {}
    per_schema: dict[str, list[_Instance]] = {}
    for fname, positions, lam in found:
        key, closure, norm = _normalize_lambda(lam)
        full_key = f"{fname}|{key}"
        if full_key in by_key:
            continue
        if fname not in schemas:
            raise DefuncError(
                f"higher-order symbol {fname!r} has no definition to specialize"
            )
        inst = _Instance(fname, key, "", closure, norm, positions)
        by_key[full_key] = inst
        instances.append(inst)
        per_schema.setdefault(fname, []).append(inst)
    # single instances keep the schema name; others get a stable suffix
    for fname, insts in per_schema.items():
        if len(insts) == 1:
            insts[0].name = fname
        else:
            for i, inst in enumerate(insts):
                inst.name = f"{fname}_{i + 1}"

    out: list[D.Declaration] = []
    inst_names: dict[str, list[str]] = {}
    for d in decls:
        if isinstance(d, D.FunDef) and _arrow_params(d):
            insts = per_schema.get(d.name, [])
            inst_names[d.name] = [i.name for i in insts]
            for inst in insts:
                out.append(_specialize_fun(d, inst))
            continue
        if isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
            f = d.formula
            if isinstance(f, L.Quant) and any(
                isinstance(t, TArrow) for _, t in f.binders
            ):
                produced = []
                for insts in per_schema.values():
                    for inst in insts:
                        candidate = _specialize_lemma(d, inst)
                        if candidate is not None:
                            produced.append((inst, candidate))
                if not produced:
                    raise DefuncError(
                        f"{d.name!r} quantifies over a function sort with no "
                        "matching instance"
                    )
                names = []
                for i, (inst, spec) in enumerate(produced):
                    name = d.name if len(produced) == 1 else f"{d.name}_{i + 1}"
                    spec = type(spec)(name, spec.formula, spec.tyvars)
                    names.append(name)
                    out.append(spec)
                inst_names[d.name] = names
                continue
        if isinstance(d, D.FunDef):
            out.append(
                D.FunDef(
                    d.name, d.tyvars, d.params, d.result,
                    _rewrite(d.body, by_key), d.rec, d.variants,
                )
            )
            continue
        if isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
            out.append(type(d)(d.name, _rewrite(d.formula, by_key), d.tyvars))
            continue
        out.append(d)

    result = DefuncResult(out, inst_names)
    result._by_key = by_key  # type: ignore[attr-defined]
    return result
