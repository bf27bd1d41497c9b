"""Capture-avoiding substitution and related traversals."""
from __future__ import annotations

from typing import Callable, Union

from veriml.logic import terms as T
from veriml.types import Type, subst_type


def free_vars(node: Union[T.Term, T.Formula]) -> set[str]:
    out: set[str] = set()
    _free_vars(node, out)
    return out


def _free_vars(node, out: set[str]) -> None:
    if isinstance(node, T.Var):
        out.add(node.name)
    elif isinstance(node, T.App):
        if node.via_var:
            out.add(node.name)
        for a in node.args:
            _free_vars(a, out)
    elif isinstance(node, (T.Arith, T.Cmp)):
        _free_vars(node.left, out)
        _free_vars(node.right, out)
    elif isinstance(node, T.Eq):
        _free_vars(node.left, out)
        _free_vars(node.right, out)
    elif isinstance(node, T.Conn):
        _free_vars(node.left, out)
        _free_vars(node.right, out)
    elif isinstance(node, (T.Constr, T.TupleT, T.PredApp)):
        args = node.args if not isinstance(node, T.TupleT) else node.items
        for a in args:
            _free_vars(a, out)
    elif isinstance(node, T.Ite):
        _free_vars(node.cond, out)
        _free_vars(node.then, out)
        _free_vars(node.els, out)
    elif isinstance(node, T.ArrayRead):
        _free_vars(node.array, out)
        _free_vars(node.index, out)
    elif isinstance(node, T.ArrayLen):
        _free_vars(node.array, out)
    elif isinstance(node, (T.Not, T.TermF)):
        _free_vars(node.arg if isinstance(node, T.Not) else node.term, out)
    elif isinstance(node, T.Tagged):
        _free_vars(node.formula, out)
    elif isinstance(node, T.Quant):
        inner: set[str] = set()
        _free_vars(node.body, inner)
        out |= inner - {n for n, _ in node.binders}
    elif isinstance(node, T.Lambda):
        inner = set()
        _free_vars(node.body, inner)
        out |= inner - {n for n, _ in node.params}
    elif isinstance(node, T.Match):
        _free_vars(node.scrutinee, out)
        for pat, body in node.branches:
            inner = set()
            _free_vars(body, inner)
            out |= inner - {n for n, _ in T.pat_vars(pat)}


_fresh_counter = [0]


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    stem = base.rstrip("0123456789")
    i = 1
    while True:
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
        i += 1


class SubstError(Exception):
    pass


def substitute(node, mapping: dict[str, T.Term]):
    """Simultaneous capture-avoiding substitution of terms for free
    variables.  Bindings must be sort-correct; variable occurrences check
    their recorded type against the replacement's when both are ground."""
    if not mapping:
        return node
    ranges: set[str] = set()
    for t in mapping.values():
        ranges |= free_vars(t)
    return _subst(node, mapping, ranges)


def _term_type(t: T.Term) -> Type | None:
    if isinstance(t, T.Var):
        return t.ty
    if isinstance(t, T.IntConst):
        from veriml.types import INT

        return INT
    if isinstance(t, T.BoolConst):
        from veriml.types import BOOL

        return BOOL
    if isinstance(t, (T.App, T.Constr, T.TupleT, T.Ite, T.ArrayRead, T.Match, T.Lambda)):
        return t.ty
    return None


def _subst(node, mapping: dict[str, T.Term], ranges: set[str]):
    if isinstance(node, T.Var):
        rep = mapping.get(node.name)
        if rep is None:
            return node
        rep_ty = _term_type(rep)
        from veriml.types import TVar, free_tvars

        if rep_ty is not None and not free_tvars(node.ty) and not free_tvars(rep_ty):
            if rep_ty != node.ty:
                raise SubstError(
                    f"sort mismatch substituting {node.name}: "
                    f"{rep_ty} for {node.ty}"
                )
        return rep
    if isinstance(node, (T.IntConst, T.BoolConst, T.UnitConst, T.FTrue, T.FFalse)):
        return node
    if isinstance(node, T.Arith):
        return T.Arith(node.op, _subst(node.left, mapping, ranges), _subst(node.right, mapping, ranges))
    if isinstance(node, T.App):
        args = tuple(_subst(a, mapping, ranges) for a in node.args)
        if node.via_var and node.name in mapping:
            rep = mapping[node.name]
            if isinstance(rep, T.Var):
                return T.App(rep.name, args, node.ty, node.tyargs, via_var=True)
            if isinstance(rep, T.Lambda):
                inner = {n: a for (n, _), a in zip(rep.params, args)}
                return substitute(rep.body, inner)
            raise SubstError(f"cannot substitute {rep!r} for applied variable {node.name}")
        return T.App(node.name, args, node.ty, node.tyargs, node.via_var)
    if isinstance(node, T.Constr):
        return T.Constr(node.name, tuple(_subst(a, mapping, ranges) for a in node.args), node.ty)
    if isinstance(node, T.TupleT):
        return T.TupleT(tuple(_subst(a, mapping, ranges) for a in node.items), node.ty)
    if isinstance(node, T.Ite):
        return T.Ite(
            _subst(node.cond, mapping, ranges),
            _subst(node.then, mapping, ranges),
            _subst(node.els, mapping, ranges),
            node.ty,
        )
    if isinstance(node, T.ArrayRead):
        return T.ArrayRead(_subst(node.array, mapping, ranges), _subst(node.index, mapping, ranges), node.ty)
    if isinstance(node, T.ArrayLen):
        return T.ArrayLen(_subst(node.array, mapping, ranges))
    if isinstance(node, T.PredApp):
        return T.PredApp(node.name, tuple(_subst(a, mapping, ranges) for a in node.args), node.tyargs)
    if isinstance(node, T.Eq):
        return T.Eq(_subst(node.left, mapping, ranges), _subst(node.right, mapping, ranges), node.ty)
    if isinstance(node, T.Cmp):
        return T.Cmp(node.op, _subst(node.left, mapping, ranges), _subst(node.right, mapping, ranges))
    if isinstance(node, T.Conn):
        return T.Conn(node.op, _subst(node.left, mapping, ranges), _subst(node.right, mapping, ranges))
    if isinstance(node, T.Not):
        return T.Not(_subst(node.arg, mapping, ranges))
    if isinstance(node, T.TermF):
        return T.TermF(_subst(node.term, mapping, ranges))
    if isinstance(node, T.Tagged):
        return T.Tagged(node.kind, node.span, _subst(node.formula, mapping, ranges), node.label)
    if isinstance(node, T.Quant):
        binders, body, sub = _rename_binders(list(node.binders), node.body, mapping, ranges)
        return T.Quant(node.quant, tuple(binders), _subst(body, sub, ranges) if sub else body)
    if isinstance(node, T.Lambda):
        params, body, sub = _rename_binders(list(node.params), node.body, mapping, ranges)
        return T.Lambda(tuple(params), _subst(body, sub, ranges) if sub else body, node.ty)
    if isinstance(node, T.Match):
        scrut = _subst(node.scrutinee, mapping, ranges)
        branches = []
        for pat, body in node.branches:
            bvars = T.pat_vars(pat)
            sub = {k: v for k, v in mapping.items() if k not in {n for n, _ in bvars}}
            clash = {n for n, _ in bvars} & ranges
            if clash:
                avoid = ranges | free_vars(body) | set(sub)
                ren: dict[str, T.Term] = {}
                new_names: dict[str, str] = {}
                for n, ty in bvars:
                    if n in clash:
                        nn = fresh_name(n, avoid)
                        avoid.add(nn)
                        new_names[n] = nn
                        ren[n] = T.Var(nn, ty)
                pat = _rename_pat(pat, new_names)
                body = substitute(body, ren)
            branches.append((pat, _subst(body, sub, ranges) if sub else body))
        return T.Match(scrut, tuple(branches), node.ty)
    raise AssertionError(f"substitute: unknown node {node!r}")


def _rename_binders(binders, body, mapping, ranges):
    names = {n for n, _ in binders}
    sub = {k: v for k, v in mapping.items() if k not in names}
    clash = names & ranges
    if clash:
        avoid = ranges | free_vars(body) | set(sub) | names
        ren: dict[str, T.Term] = {}
        out = []
        for n, ty in binders:
            if n in clash:
                nn = fresh_name(n, avoid)
                avoid.add(nn)
                ren[n] = T.Var(nn, ty)
                out.append((nn, ty))
            else:
                out.append((n, ty))
        body = substitute(body, ren)
        return out, body, sub
    return binders, body, sub


def _rename_pat(pat: T.Pat, new_names: dict[str, str]) -> T.Pat:
    if isinstance(pat, T.PatVar):
        return T.PatVar(new_names.get(pat.name, pat.name), pat.ty)
    if isinstance(pat, T.PatConstr):
        return T.PatConstr(pat.name, tuple(_rename_pat(a, new_names) for a in pat.args), pat.ty)
    if isinstance(pat, T.PatTuple):
        return T.PatTuple(tuple(_rename_pat(i, new_names) for i in pat.items), pat.ty)
    return pat


def map_types(node, fn: Callable[[Type], Type]):
    """Rewrite every type annotation in a term/formula/pattern; used to
    instantiate polymorphic schemes and by monomorphization."""
    if isinstance(node, T.Pat):
        return _map_pat_types(node, fn)
    if isinstance(node, T.Var):
        return T.Var(node.name, fn(node.ty))
    if isinstance(node, (T.IntConst, T.BoolConst, T.UnitConst, T.FTrue, T.FFalse)):
        return node
    if isinstance(node, T.Arith):
        return T.Arith(node.op, map_types(node.left, fn), map_types(node.right, fn))
    if isinstance(node, T.App):
        return T.App(
            node.name,
            tuple(map_types(a, fn) for a in node.args),
            fn(node.ty),
            tuple(fn(t) for t in node.tyargs),
            node.via_var,
        )
    if isinstance(node, T.Constr):
        return T.Constr(node.name, tuple(map_types(a, fn) for a in node.args), fn(node.ty))
    if isinstance(node, T.TupleT):
        return T.TupleT(tuple(map_types(a, fn) for a in node.items), fn(node.ty))
    if isinstance(node, T.Ite):
        return T.Ite(map_types(node.cond, fn), map_types(node.then, fn), map_types(node.els, fn), fn(node.ty))
    if isinstance(node, T.ArrayRead):
        return T.ArrayRead(map_types(node.array, fn), map_types(node.index, fn), fn(node.ty))
    if isinstance(node, T.ArrayLen):
        return T.ArrayLen(map_types(node.array, fn))
    if isinstance(node, T.Lambda):
        return T.Lambda(
            tuple((n, fn(t)) for n, t in node.params),
            map_types(node.body, fn),
            fn(node.ty),  # type: ignore[arg-type]
        )
    if isinstance(node, T.Match):
        return T.Match(
            map_types(node.scrutinee, fn),
            tuple((_map_pat_types(p, fn), map_types(b, fn)) for p, b in node.branches),
            fn(node.ty),
        )
    if isinstance(node, T.PredApp):
        return T.PredApp(node.name, tuple(map_types(a, fn) for a in node.args), tuple(fn(t) for t in node.tyargs))
    if isinstance(node, T.Eq):
        return T.Eq(map_types(node.left, fn), map_types(node.right, fn), fn(node.ty))
    if isinstance(node, T.Cmp):
        return T.Cmp(node.op, map_types(node.left, fn), map_types(node.right, fn))
    if isinstance(node, T.Conn):
        return T.Conn(node.op, map_types(node.left, fn), map_types(node.right, fn))
    if isinstance(node, T.Not):
        return T.Not(map_types(node.arg, fn))
    if isinstance(node, T.TermF):
        return T.TermF(map_types(node.term, fn))
    if isinstance(node, T.Tagged):
        return T.Tagged(node.kind, node.span, map_types(node.formula, fn), node.label)
    if isinstance(node, T.Quant):
        return T.Quant(node.quant, tuple((n, fn(t)) for n, t in node.binders), map_types(node.body, fn))
    raise AssertionError(f"map_types: unknown node {node!r}")


def _map_pat_types(pat: T.Pat, fn) -> T.Pat:
    if isinstance(pat, T.PatWild):
        return T.PatWild(fn(pat.ty))
    if isinstance(pat, T.PatVar):
        return T.PatVar(pat.name, fn(pat.ty))
    if isinstance(pat, T.PatConstr):
        return T.PatConstr(pat.name, tuple(_map_pat_types(a, fn) for a in pat.args), fn(pat.ty))
    if isinstance(pat, T.PatTuple):
        return T.PatTuple(tuple(_map_pat_types(i, fn) for i in pat.items), fn(pat.ty))
    raise AssertionError


def instantiate_scheme(node, tyvars: tuple[str, ...], tyargs: tuple[Type, ...]):
    """Instantiate a polymorphic axiom/definition body at ground types."""
    mapping = dict(zip(tyvars, tyargs))
    return map_types(node, lambda t: subst_type(t, mapping))
