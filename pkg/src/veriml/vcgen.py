"""Verification-condition generation.

The weakest-precondition transformer runs in continuation-passing style with
an explicit environment for local mutable variables (refs and nothing else;
there is no heap).  It carries a normal continuation and one exceptional
continuation per catchable exception, and plants ``Tagged`` markers at every
obligation site: preconditions at calls, postconditions per clause and exit
path, loop invariant initialization/preservation per clause, variant
decrease, array bounds, match exhaustiveness and unhandled raises.  A final
splitting pass closes each marker over its path condition, yielding one task
per obligation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from veriml import prelude
from veriml import typedast as X
from veriml.frontend.ast import NOSPAN, Span
from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.logic.defunc import DefuncResult, defunctionalize
from veriml.logic.size import adt_size, size_fn_name
from veriml.logic.subst import free_vars, substitute
from veriml.types import BOOL, INT, UNIT, TAdt, TArrow, TTuple, Type, subst_type

Value = Union[L.Term, L.Formula]
Env = dict[str, L.Term]
Kont = Callable[[Env, L.Term], L.Formula]
ExcKont = dict[str, Callable[[Env, Optional[L.Term]], L.Formula]]

KIND_PRECONDITION = "precondition"
KIND_POSTCONDITION = "postcondition"
KIND_EXCEPTIONAL = "exceptional"
KIND_LOOP_INIT = "loop_init"
KIND_LOOP_PRESERVE = "loop_preserve"
KIND_VARIANT = "variant"
KIND_BOUNDS = "bounds"
KIND_MATCH = "match"
KIND_UNHANDLED = "unhandled"
KIND_TERMINATION = "termination"
KIND_LEMMA = "lemma"

ALL_KINDS = (
    KIND_PRECONDITION,
    KIND_POSTCONDITION,
    KIND_EXCEPTIONAL,
    KIND_LOOP_INIT,
    KIND_LOOP_PRESERVE,
    KIND_VARIANT,
    KIND_BOUNDS,
    KIND_MATCH,
    KIND_UNHANDLED,
    KIND_TERMINATION,
    KIND_LEMMA,
)


class VcgenError(Exception):
    pass


@dataclass
class VC:
    name: str  # <definition>.<kind>.<index>
    definition: str
    kind: str
    span: Span
    task: D.Task


@dataclass(frozen=True)
class _Anchor(D.Declaration):
    """Position marker for a program definition inside the logic context."""

    name: str


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _to_formula(v: Value) -> L.Formula:
    if isinstance(v, L.Formula):
        return v
    if isinstance(v, L.BoolConst):
        return L.TRUE if v.value else L.FALSE
    return L.TermF(v)


class _Names:
    """Fresh-name supply, deterministic per definition."""

    def __init__(self, taken: set[str]):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        if base not in self.taken:
            self.taken.add(base)
            return base
        i = 1
        while f"{base}{i}" in self.taken:
            i += 1
        name = f"{base}{i}"
        self.taken.add(name)
        return name


def _name_wildcards(pat: L.Pat, names: _Names) -> L.Pat:
    if isinstance(pat, L.PatWild):
        return L.PatVar(names.fresh("_w"), pat.ty)
    if isinstance(pat, L.PatConstr):
        return L.PatConstr(pat.name, tuple(_name_wildcards(a, names) for a in pat.args), pat.ty)
    if isinstance(pat, L.PatTuple):
        return L.PatTuple(tuple(_name_wildcards(i, names) for i in pat.items), pat.ty)
    return pat


# ---------------------------------------------------------------------------
# Match exhaustiveness (usefulness algorithm)
# ---------------------------------------------------------------------------


class ConstructorTable:
    def __init__(self, adts: dict[str, D.AdtDecl]):
        self.adts = adts

    def signature(self, ty: Type) -> Optional[list[tuple[str, tuple[Type, ...]]]]:
        if isinstance(ty, TAdt):
            adt = self.adts.get(ty.name)
            if adt is None:
                return None
            if adt.tyvars:
                mapping = dict(zip(adt.tyvars, ty.args))
                return [
                    (c, tuple(subst_type(a, mapping) for a in args))
                    for c, args in adt.constructors
                ]
            return [(c, args) for c, args in adt.constructors]
        if isinstance(ty, TTuple):
            return [("(,)", ty.items)]
        return None


def _specialize_row(row: list[L.Pat], cname: str, arity: int) -> Optional[list[L.Pat]]:
    head, rest = row[0], row[1:]
    if isinstance(head, (L.PatWild, L.PatVar)):
        ty = head.ty
        return [L.PatWild(ty)] * arity + rest if arity else rest
    if isinstance(head, L.PatConstr):
        if head.name != cname:
            return None
        return list(head.args) + rest
    if isinstance(head, L.PatTuple):
        if cname != "(,)":
            return None
        return list(head.items) + rest
    raise AssertionError


def _useful(matrix: list[list[L.Pat]], q: list[L.Pat], ctors: ConstructorTable) -> bool:
    if not q:
        return not matrix
    head = q[0]
    if isinstance(head, L.PatConstr):
        sig = [(head.name, tuple(a.ty for a in head.args))]
        spec = [
            r for r in (_specialize_row(row, head.name, len(head.args)) for row in matrix)
            if r is not None
        ]
        return _useful(spec, list(head.args) + q[1:], ctors)
    if isinstance(head, L.PatTuple):
        spec = [
            r for r in (_specialize_row(row, "(,)", len(head.items)) for row in matrix)
            if r is not None
        ]
        return _useful(spec, list(head.items) + q[1:], ctors)
    # wildcard head
    sig = ctors.signature(head.ty)
    roots = {
        row[0].name for row in matrix if isinstance(row[0], L.PatConstr)
    } | {"(,)" for row in matrix if isinstance(row[0], L.PatTuple)}
    if sig is not None and roots and roots == {c for c, _ in sig}:
        for cname, arg_tys in sig:
            arity = len(arg_tys)
            spec = [
                r for r in (_specialize_row(row, cname, arity) for row in matrix)
                if r is not None
            ]
            sub_q = [L.PatWild(t) for t in arg_tys] + q[1:]
            if _useful(spec, sub_q, ctors):
                return True
        return False
    default = [
        row[1:] for row in matrix if isinstance(row[0], (L.PatWild, L.PatVar))
    ]
    return _useful(default, q[1:], ctors)


def is_exhaustive(pats: list[L.Pat], ty: Type, ctors: ConstructorTable) -> bool:
    return not _useful([[p] for p in pats], [L.PatWild(ty)], ctors)


# ---------------------------------------------------------------------------
# The WP transformer
# ---------------------------------------------------------------------------


@dataclass
class _FnInfo:
    name: str
    params: list[tuple[str, Type]]
    result: Type
    tyvars: tuple[str, ...]
    contract: Optional[X.TContract]


class WpState:
    def __init__(
        self,
        program_fns: dict[str, _FnInfo],
        current: str,
        entry_measures: list[tuple[L.Term, str]],
        names: _Names,
        rewrite: Callable[[L.Body], L.Body],
    ):
        self.program_fns = program_fns
        self.current = current
        self.entry_measures = entry_measures  # (term over params, kind)
        self.names = names
        self.rewrite = rewrite
        self.ctors: ConstructorTable = ConstructorTable({})

    # obligations -----------------------------------------------------------

    def tag(self, kind: str, span: Span, f: L.Formula, label: str = "") -> L.Formula:
        if isinstance(f, L.FTrue):
            # keep trivial obligations visible: they still make goals
            pass
        return L.Tagged(kind, span, f, label)


def _subst_env(formula: L.Formula, env: Env, extra: Optional[dict[str, L.Term]] = None) -> L.Formula:
    mapping: dict[str, L.Term] = {}
    for name, term in env.items():
        if not (isinstance(term, L.Var) and term.name == name):
            mapping[name] = term
    if extra:
        mapping.update(extra)
    return substitute(formula, mapping) if mapping else formula


def wp(
    st: WpState, env: Env, e: X.XExpr, k: Kont, kexc: ExcKont
) -> L.Formula:
    if isinstance(e, X.XInt):
        return k(env, L.IntConst(e.value))
    if isinstance(e, X.XBool):
        return k(env, L.BoolConst(e.value))
    if isinstance(e, X.XUnit):
        return k(env, L.UnitConst())
    if isinstance(e, X.XVar):
        return k(env, env.get(e.name, L.Var(e.name, e.ty)))
    if isinstance(e, X.XDeref):
        return k(env, env[e.name])
    if isinstance(e, X.XBinop):
        def with_left(env1: Env, lt: L.Term) -> L.Formula:
            def with_right(env2: Env, rt: L.Term) -> L.Formula:
                if e.op in ("+", "-", "*"):
                    return k(env2, L.Arith(e.op, lt, rt))
                if e.op == "=":
                    return _k_bool(st, env2, L.Eq(lt, rt, X.expr_type(e.left)), k)
                if e.op == "<>":
                    return _k_bool(st, env2, L.Not(L.Eq(lt, rt, X.expr_type(e.left))), k)
                return _k_bool(st, env2, L.Cmp(e.op, lt, rt), k)
            return wp(st, env1, e.right, with_right, kexc)
        return wp(st, env, e.left, with_left, kexc)
    if isinstance(e, X.XAnd) or isinstance(e, X.XOr):
        is_and = isinstance(e, X.XAnd)

        def with_left(env1: Env, lt: L.Term) -> L.Formula:
            lf = _to_formula(lt)
            short = k(env1, L.BoolConst(not is_and))

            def with_right(env2: Env, rt: L.Term) -> L.Formula:
                return k(env2, rt)

            through = wp(st, env1, e.right, with_right, kexc)
            if is_and:
                return L.conj([L.implies(lf, through), L.implies(L.Not(lf), short)])
            return L.conj([L.implies(lf, short), L.implies(L.Not(lf), through)])

        return wp(st, env, e.left, with_left, kexc)
    if isinstance(e, X.XNot):
        return wp(
            st, env, e.arg,
            lambda env1, t: _k_bool(st, env1, L.Not(_to_formula(t)), k),
            kexc,
        )
    if isinstance(e, X.XTuple):
        def build(env1: Env, terms: list[L.Term]) -> L.Formula:
            return k(env1, L.TupleT(tuple(terms), e.ty))
        return _wp_list(st, env, e.items, [], build, kexc)
    if isinstance(e, X.XConstr):
        def build(env1: Env, terms: list[L.Term]) -> L.Formula:
            return k(env1, L.Constr(e.name, tuple(terms), e.ty))
        return _wp_list(st, env, e.args, [], build, kexc)
    if isinstance(e, X.XApp):
        def call(env1: Env, terms: list[L.Term]) -> L.Formula:
            return _wp_call(st, env1, e, terms, k, kexc)
        return _wp_list(st, env, e.args, [], call, kexc)
    if isinstance(e, X.XArrayRead):
        def with_arr(env1: Env, arr: L.Term) -> L.Formula:
            def with_idx(env2: Env, idx: L.Term) -> L.Formula:
                bound = L.Conn(
                    "and",
                    L.Cmp("<=", L.IntConst(0), idx),
                    L.Cmp("<", idx, L.ArrayLen(arr)),
                )
                return L.conj([
                    st.tag(KIND_BOUNDS, e.span, bound),
                    k(env2, L.ArrayRead(arr, idx, e.ty)),
                ])
            return wp(st, env1, e.index, with_idx, kexc)
        return wp(st, env, e.array, with_arr, kexc)
    if isinstance(e, X.XArrayLen):
        return wp(st, env, e.array, lambda env1, arr: k(env1, L.ArrayLen(arr)), kexc)
    if isinstance(e, X.XRef):
        raise VcgenError("refs must be introduced by let bindings")
    if isinstance(e, X.XLet):
        if isinstance(e.value, X.XRef):
            def with_init(env1: Env, t: L.Term) -> L.Formula:
                return _wp_bind(st, env1, e.name, t, e.body, k, kexc)
            return wp(st, env, e.value.init, with_init, kexc)

        def with_value(env1: Env, t: L.Term) -> L.Formula:
            return _wp_bind(st, env1, e.name, t, e.body, k, kexc)
        return wp(st, env, e.value, with_value, kexc)
    if isinstance(e, X.XAssign):
        def with_value(env1: Env, t: L.Term) -> L.Formula:
            env2 = dict(env1)
            env2[e.name] = _reify(st, t)
            if isinstance(t, L.Formula):  # pragma: no cover - bools reified below
                raise AssertionError
            return k(env2, L.UnitConst())
        return wp(st, env, e.value, with_value, kexc)
    if isinstance(e, (X.XIncr, X.XDecr)):
        op = "+" if isinstance(e, X.XIncr) else "-"
        env2 = dict(env)
        env2[e.name] = L.Arith(op, env[e.name], L.IntConst(1))
        return k(env2, L.UnitConst())
    if isinstance(e, X.XSeq):
        return wp(st, env, e.first, lambda env1, _t: wp(st, env1, e.second, k, kexc), kexc)
    if isinstance(e, X.XIf):
        def with_cond(env1: Env, c: L.Term) -> L.Formula:
            cf = _to_formula(c)
            then_f = wp(st, env1, e.then, k, kexc)
            if e.els is None:
                else_f = k(env1, L.UnitConst())
            else:
                else_f = wp(st, env1, e.els, k, kexc)
            return L.conj([L.implies(cf, then_f), L.implies(L.Not(cf), else_f)])
        return wp(st, env, e.cond, with_cond, kexc)
    if isinstance(e, X.XMatch):
        return _wp_match(st, env, e, k, kexc)
    if isinstance(e, X.XFor):
        return _wp_for(st, env, e, k, kexc)
    if isinstance(e, X.XLetExc):
        return wp(st, env, e.body, k, kexc)
    if isinstance(e, X.XRaise):
        handler = kexc.get(e.exc)
        if handler is None:
            return st.tag(KIND_UNHANDLED, e.span, L.FALSE, label=e.exc)
        if e.payload is None:
            return handler(env, None)
        return wp(st, env, e.payload, lambda env1, p: handler(env1, _reify(st, p)), kexc)
    if isinstance(e, X.XTry):
        inner_exc = dict(kexc)
        for exc, pat, hexpr in e.handlers:
            inner_exc[exc] = _make_handler(st, pat, hexpr, k, kexc)
        return wp(st, env, e.body, k, inner_exc)
    raise AssertionError(f"wp: unknown expression {e!r}")


def _reify(st: WpState, v: Value) -> L.Term:
    if isinstance(v, L.Formula):
        raise VcgenError("boolean formula value needs reification")
    return v


def _k_bool(st: WpState, env: Env, f: L.Formula, k: Kont) -> L.Formula:
    """Deliver a boolean formula as a value: case-split on its truth so the
    continuation always receives a term."""
    return L.conj([
        L.implies(f, k(env, L.BoolConst(True))),
        L.implies(L.Not(f), k(env, L.BoolConst(False))),
    ])


def _wp_list(
    st: WpState,
    env: Env,
    exprs: list[X.XExpr],
    acc: list[L.Term],
    k: Callable[[Env, list[L.Term]], L.Formula],
    kexc: ExcKont,
) -> L.Formula:
    if not exprs:
        return k(env, acc)
    head, tail = exprs[0], exprs[1:]

    def step(env1: Env, t: L.Term) -> L.Formula:
        if isinstance(t, L.Formula):
            return _k_bool(st, env1, t, lambda e2, b: _wp_list(st, e2, tail, acc + [b], k, kexc))
        return _wp_list(st, env1, tail, acc + [t], k, kexc)

    return wp(st, env, head, step, kexc)


def _wp_bind(
    st: WpState, env: Env, name: str, value: Value, body: X.XExpr, k: Kont, kexc: ExcKont
) -> L.Formula:
    if isinstance(value, L.Formula):
        fresh = st.names.fresh(name)
        v = L.Var(fresh, BOOL)
        env2 = dict(env)
        env2[name] = v
        inner = wp(st, env2, body, k, kexc)
        return L.forall([(fresh, BOOL)], L.implies(L.Conn("iff", L.TermF(v), value), inner))
    env2 = dict(env)
    env2[name] = value
    return wp(st, env2, body, k, kexc)


def _make_handler(st: WpState, pat: Optional[L.Pat], hexpr: X.XExpr, k: Kont, kexc: ExcKont):
    def handle(env: Env, payload: Optional[L.Term]) -> L.Formula:
        env2 = dict(env)
        if pat is not None:
            assert payload is not None
            if isinstance(pat, L.PatVar):
                env2[pat.name] = payload
            elif isinstance(pat, L.PatWild):
                pass
            else:
                raise VcgenError("handler patterns must be variables")
        return wp(st, env2, hexpr, k, kexc)

    return handle


def _wp_call(
    st: WpState, env: Env, e: X.XApp, args: list[L.Term], k: Kont, kexc: ExcKont
) -> L.Formula:
    fn = st.program_fns.get(e.fn)
    if fn is None:
        raise VcgenError(f"call to unknown function {e.fn!r}")
    mapping = dict(zip(fn.tyvars, e.tyargs))

    def inst(f: L.Body) -> L.Body:
        out = f
        if mapping:
            from veriml.logic.subst import map_types

            out = map_types(out, lambda t: subst_type(t, mapping))
        return st.rewrite(out)

    argmap = {p: a for (p, _), a in zip(fn.params, args)}
    parts: list[L.Formula] = []
    contract = fn.contract
    if contract is not None:
        for req, span in contract.requires:
            parts.append(
                st.tag(KIND_PRECONDITION, e.span, substitute(inst(req), argmap), label=e.fn)
            )
    if e.fn == st.current and st.entry_measures:
        parts.append(
            st.tag(KIND_VARIANT, e.span, _lex_decrease(st, argmap), label=e.fn)
        )
    result_ty = X.expr_type(e)
    res_name = st.names.fresh(contract.result if contract is not None else "result")
    res = L.Var(res_name, result_ty)
    ens = [
        substitute(inst(f), {**argmap, (contract.result if contract else "result"): res})
        for f, _ in (contract.ensures if contract is not None else [])
    ]
    normal = L.forall(
        [(res_name, result_ty)], L.implies(L.conj(ens), k(env, res))
    )
    parts.append(normal)
    if contract is not None:
        for exc, payload_var, formula, span in contract.raises:
            handler = kexc.get(exc)
            if handler is None:
                parts.append(st.tag(KIND_UNHANDLED, e.span, L.FALSE, label=exc))
                continue
            if payload_var is None:
                exc_f = substitute(inst(formula), argmap)
                parts.append(L.implies(exc_f, handler(env, None)))
            else:
                pv = st.names.fresh(payload_var)
                payload_ty = st.exc_payloads.get(exc)  # type: ignore[attr-defined]
                assert payload_ty is not None
                pvv = L.Var(pv, payload_ty)
                exc_f = substitute(inst(formula), {**argmap, payload_var: pvv})
                parts.append(
                    L.forall([(pv, payload_ty)], L.implies(exc_f, handler(env, pvv)))
                )
    return L.conj(parts)


def _lex_decrease(st: WpState, argmap: dict[str, L.Term]) -> L.Formula:
    comps = []
    for term, kind in st.entry_measures:
        entry = term
        at_call = substitute(term, argmap)
        if kind == "structural":
            size = size_fn_name(_measure_adt(term))
            tyargs = _measure_tyargs(term)
            entry_m: L.Term = L.App(size, (entry,), INT, tyargs)
            call_m: L.Term = L.App(size, (at_call,), INT, tyargs)
            dec = L.Cmp("<", call_m, entry_m)
        else:
            entry_m, call_m = entry, at_call
            dec = L.Conn(
                "and",
                L.Cmp("<", call_m, entry_m),
                L.Cmp("<=", L.IntConst(0), entry_m),
            )
        comps.append((dec, L.Eq(call_m, entry_m, INT)))
    out: Optional[L.Formula] = None
    prefix: list[L.Formula] = []
    for dec, eq in comps:
        clause = L.conj(prefix + [dec])
        out = clause if out is None else L.Conn("or", out, clause)
        prefix.append(eq)
    assert out is not None
    return out


def _measure_adt(term: L.Term) -> str:
    from veriml.logic.subst import _term_type

    ty = _term_type(term)
    assert isinstance(ty, TAdt)
    return ty.name


def _measure_tyargs(term: L.Term) -> tuple[Type, ...]:
    from veriml.logic.subst import _term_type

    ty = _term_type(term)
    assert isinstance(ty, TAdt)
    return ty.args


def _no_match_formula(scrut: L.Term, sty: Type, pat: L.Pat, avoid: set[str]) -> L.Formula:
    """The scrutinee does not match the pattern (first-match semantics)."""
    named = _name_wildcards(pat, _Names(set(avoid)))
    vars_ = L.pat_vars(named)
    eqf: L.Formula = L.Eq(scrut, L.pat_to_term(named), sty)
    if vars_:
        eqf = L.Quant("exists", tuple(vars_), eqf)
    return L.Not(eqf)


def _wp_match(st: WpState, env: Env, e: X.XMatch, k: Kont, kexc: ExcKont) -> L.Formula:
    def with_scrut(env1: Env, scrut_v: L.Term) -> L.Formula:
        scrut = _reify(st, scrut_v)
        parts: list[L.Formula] = []
        pats = [p for p, _ in e.branches]
        sty = X.expr_type(e.scrutinee)
        avoid = set(env1) | set(free_vars(scrut)) | st.names.taken
        if not is_exhaustive(pats, sty, st.ctors):
            cases = []
            for p in pats:
                named = _name_wildcards(p, _Names(set(avoid)))
                vars_ = L.pat_vars(named)
                eqf: L.Formula = L.Eq(scrut, L.pat_to_term(named), sty)
                if vars_:
                    eqf = L.Quant("exists", tuple(vars_), eqf)
                cases.append(eqf)
            disj = cases[0]
            for c in cases[1:]:
                disj = L.Conn("or", disj, c)
            parts.append(st.tag(KIND_MATCH, e.span, disj))
        for i, (pat, body) in enumerate(e.branches):
            named = _name_wildcards(pat, _Names(set(avoid)))
            vars_ = L.pat_vars(named)
            env2 = dict(env1)
            for n, t in vars_:
                env2[n] = L.Var(n, t)
            hyps: list[L.Formula] = [L.Eq(scrut, L.pat_to_term(named), sty)]
            for prev, _ in e.branches[:i]:
                hyps.append(_no_match_formula(scrut, sty, prev, avoid | {n for n, _ in vars_}))
            inner = wp(st, env2, body, k, kexc)
            parts.append(L.forall(list(vars_), L.implies(L.conj(hyps), inner)))
        return L.conj(parts)

    return wp(st, env, e.scrutinee, with_scrut, kexc)


def _wp_for(st: WpState, env: Env, e: X.XFor, k: Kont, kexc: ExcKont) -> L.Formula:
    def with_lo(env1: Env, lo: L.Term) -> L.Formula:
        def with_hi(env2: Env, hi: L.Term) -> L.Formula:
            invs = [(st.rewrite(f), span) for f, span in e.invariants]

            def inv_at(env_h: Env, i_term: L.Term) -> list[tuple[L.Formula, Span]]:
                return [
                    (_subst_env(f, env_h, {e.var: i_term}), span) for f, span in invs
                ]

            parts: list[L.Formula] = []
            # initialization, per clause
            for f, span in inv_at(env2, lo):
                parts.append(st.tag(KIND_LOOP_INIT, span, f))
            # preservation under a havoc'd environment
            mut_tys = {m: _term_sort(env2[m]) for m in e.modified}
            ivar = st.names.fresh(e.var)
            binders = [(ivar, INT)]
            env_h = dict(env2)
            for m in e.modified:
                hv = st.names.fresh(m)
                binders.append((hv, mut_tys[m]))
                env_h[m] = L.Var(hv, mut_tys[m])
            it = L.Var(ivar, INT)
            env_h[e.var] = it
            guard = L.conj(
                [L.Cmp("<=", lo, it), L.Cmp("<=", it, hi)]
                + [f for f, _ in inv_at(env_h, it)]
            )

            def preserve_k(env_b: Env, _t: L.Term) -> L.Formula:
                nxt = L.Arith("+", it, L.IntConst(1))
                return L.conj(
                    [
                        st.tag(KIND_LOOP_PRESERVE, span, f)
                        for f, span in inv_at(env_b, nxt)
                    ]
                )

            body_f = wp(st, env_h, e.body, preserve_k, kexc)
            parts.append(L.forall(binders, L.implies(guard, body_f)))
            # exit knowledge: when lo <= hi+1 the invariant holds at hi+1
            binders_x = []
            env_x = dict(env2)
            for m in e.modified:
                hv = st.names.fresh(m)
                binders_x.append((hv, mut_tys[m]))
                env_x[m] = L.Var(hv, mut_tys[m])
            hi1 = L.Arith("+", hi, L.IntConst(1))
            exit_know = L.implies(
                L.Cmp("<=", lo, hi1),
                L.conj([f for f, _ in inv_at(env_x, hi1)]),
            )
            parts.append(
                L.forall(binders_x, L.implies(exit_know, k(env_x, L.UnitConst())))
            )
            return L.conj(parts)

        return wp(st, env1, e.hi, with_hi, kexc)

    return wp(st, env, e.lo, with_lo, kexc)


def _term_sort(t: L.Term) -> Type:
    from veriml.logic.subst import _term_type

    ty = _term_type(t)
    if ty is None:
        if isinstance(t, (L.Arith,)):
            return INT
        if isinstance(t, L.ArrayLen):
            return INT
        raise AssertionError(f"cannot sort term {t!r}")
    return ty


# ---------------------------------------------------------------------------
# Obligation splitting and task introduction
# ---------------------------------------------------------------------------

PathItem = tuple[str, object]  # ('bind', binders) | ('assume', formula)


def split_obligations(top: L.Formula) -> list[tuple[str, Span, str, L.Formula]]:
    """Walk the WP formula; close every Tagged obligation over its path."""
    out: list[tuple[str, Span, str, L.Formula]] = []

    def close(path: list[PathItem], goal: L.Formula) -> L.Formula:
        for kind, payload in reversed(path):
            if kind == "assume":
                goal = L.implies(payload, goal)  # type: ignore[arg-type]
            else:
                goal = L.forall(list(payload), goal)  # type: ignore[arg-type]
        return goal

    def walk(node: L.Formula, path: list[PathItem]) -> None:
        if isinstance(node, L.Tagged):
            out.append((node.kind, node.span, node.label, close(path, node.formula)))
            return
        if isinstance(node, L.FTrue):
            return
        if isinstance(node, L.Conn) and node.op == "and":
            walk(node.left, path)
            walk(node.right, path)
            return
        if isinstance(node, L.Conn) and node.op == "implies":
            walk(node.right, path + [("assume", node.left)])
            return
        if isinstance(node, L.Quant) and node.quant == "forall":
            walk(node.body, path + [("bind", node.binders)])
            return
        raise AssertionError(f"unexpected node in WP skeleton: {node!r}")

    walk(top, [])
    return out


def _flatten_conj(f: L.Formula) -> list[L.Formula]:
    if isinstance(f, L.Conn) and f.op == "and":
        return _flatten_conj(f.left) + _flatten_conj(f.right)
    if isinstance(f, L.FTrue):
        return []
    return [f]


def introduce(
    goal: L.Formula, taken: set[str]
) -> tuple[list[D.ConstDecl], list[L.Formula], L.Formula]:
    """Peel universal binders and implication premises into constants and
    hypotheses; premise conjunctions are flattened into separate hypotheses."""
    consts: list[D.ConstDecl] = []
    hyps: list[L.Formula] = []
    names = _Names(taken)
    while True:
        if isinstance(goal, L.Quant) and goal.quant == "forall":
            renames: dict[str, L.Term] = {}
            for n, t in goal.binders:
                nn = names.fresh(n)
                consts.append(D.ConstDecl(nn, t))
                if nn != n:
                    renames[n] = L.Var(nn, t)
            goal = substitute(goal.body, renames) if renames else goal.body
            continue
        if isinstance(goal, L.Conn) and goal.op == "implies":
            hyps.extend(_flatten_conj(goal.left))
            goal = goal.right
            continue
        break
    return consts, hyps, goal


def make_task(
    name: str,
    context: list[D.Declaration],
    params: list[tuple[str, Type]],
    pre_hyps: list[L.Formula],
    goal: L.Formula,
    intro: bool = True,
) -> D.Task:
    decls = list(context) + [D.ConstDecl(n, t) for n, t in params]
    taken = {d.name for d in decls if isinstance(d, D.ConstDecl)}
    hyps: list[L.Formula] = list(pre_hyps)
    if intro:
        consts, more, goal = introduce(goal, taken)
        decls.extend(consts)
        hyps.extend(more)
    named = tuple((f"H{i + 1}", h) for i, h in enumerate(hyps))
    return D.Task(name, tuple(decls), named, goal)


# ---------------------------------------------------------------------------
# Per-declaration VC generation
# ---------------------------------------------------------------------------


class Generator:
    def __init__(self, program: X.TypedProgram):
        self.program = program
        logic_decls, extra = _logic_context(program)
        try:
            self.defunc: DefuncResult = defunctionalize(logic_decls, extra)
        except Exception as ex:
            raise VcgenError(str(ex)) from None
        self.context = self.defunc.decls
        self.ctors = ConstructorTable(
            {d.name: d for d in self.context if isinstance(d, D.AdtDecl)}
        )
        self.exc_payloads = dict(program.symbols.exceptions)
        self.program_fns = {
            name: _FnInfo(
                name,
                [(p, t) for p, t in _fn_params(program, name)],
                _fn_result(program, name),
                _fn_tyvars(name),
                _fn_contract(self, program, name),
            )
            for name in program.symbols.program_fns
        }

    def rewrite(self, f: L.Body) -> L.Body:
        return self.defunc.rewrite(f)

    def context_before(self, name: str) -> list[D.Declaration]:
        """Context up to but excluding the named declaration."""
        out = []
        for d in self.context:
            if getattr(d, "name", None) == name:
                break
            if not isinstance(d, _Anchor):
                out.append(d)
        return out


def _logic_context(program: X.TypedProgram) -> tuple[list[D.Declaration], list[L.Body]]:
    decls: list[D.Declaration] = list(prelude.prelude_declarations())
    size_list, size_list_ax = adt_size(prelude.LIST_ADT)
    decls.extend([size_list, size_list_ax])
    extra: list[L.Body] = []
    for d in program.decls:
        if isinstance(d, X.TTypeDecl):
            decls.append(d.decl)
            if isinstance(d.decl, D.AdtDecl):
                fn, ax = adt_size(d.decl)
                if any(getattr(x, "name", None) == fn.name for x in decls):
                    raise VcgenError(
                        f"name {fn.name!r} is reserved for the structural measure"
                    )
                decls.extend([fn, ax])
        elif isinstance(d, X.TLogic):
            decls.append(d.decl)
        elif isinstance(d, (X.TVal, X.TFun)):
            decls.append(_Anchor(d.name))
        if isinstance(d, (X.TVal, X.TFun)) and d.contract is not None:
            extra.extend(f for f, _ in d.contract.requires)
            extra.extend(f for f, _ in d.contract.ensures)
            extra.extend(f for _, _, f, _ in d.contract.raises)
            extra.extend(d.contract.variants)
        if isinstance(d, X.TFun):
            extra.extend(_invariant_formulas(d.body))
    return decls, extra


def _invariant_formulas(body: X.XExpr) -> list[L.Formula]:
    out: list[L.Formula] = []

    def walk(node) -> None:
        if isinstance(node, X.XFor):
            out.extend(f for f, _ in node.invariants)
        for attr in ("left", "right", "arg", "cond", "then", "els", "value",
                     "body", "first", "second", "lo", "hi", "init", "scrutinee",
                     "array", "index", "payload"):
            child = getattr(node, attr, None)
            if isinstance(child, X.XExpr):
                walk(child)
        for attr in ("items", "args"):
            children = getattr(node, attr, None)
            if isinstance(children, list):
                for c in children:
                    if isinstance(c, X.XExpr):
                        walk(c)
        if isinstance(node, X.XMatch):
            for _, b in node.branches:
                walk(b)
        if isinstance(node, X.XTry):
            for _, _, h in node.handlers:
                walk(h)

    walk(body)
    return out


def _fn_params(program: X.TypedProgram, name: str):
    for d in program.decls:
        if isinstance(d, (X.TVal, X.TFun)) and d.name == name:
            return d.params
    if name == prelude.REV_APPEND_NAME:
        return prelude.REV_APPEND_PARAMS
    raise VcgenError(f"unknown function {name!r}")


def _fn_result(program: X.TypedProgram, name: str) -> Type:
    for d in program.decls:
        if isinstance(d, (X.TVal, X.TFun)) and d.name == name:
            return d.result
    if name == prelude.REV_APPEND_NAME:
        return prelude.REV_APPEND_RESULT
    raise VcgenError(f"unknown function {name!r}")


def _fn_tyvars(name: str) -> tuple[str, ...]:
    return prelude.REV_APPEND_TYVARS if name == prelude.REV_APPEND_NAME else ()


def _fn_contract(gen: Generator, program: X.TypedProgram, name: str):
    for d in program.decls:
        if isinstance(d, (X.TVal, X.TFun)) and d.name == name:
            c = d.contract
            if c is None:
                return None
            out = X.TContract(c.result)
            out.requires = [(gen.rewrite(f), s) for f, s in c.requires]
            out.ensures = [(gen.rewrite(f), s) for f, s in c.ensures]
            out.raises = [(e, p, gen.rewrite(f), s) for e, p, f, s in c.raises]
            out.variants = [gen.rewrite(t) for t in c.variants]
            return out
    if name == prelude.REV_APPEND_NAME:
        out = X.TContract(prelude.REV_APPEND_RESULT_NAME)
        out.ensures = [(prelude.REV_APPEND_ENSURES, NOSPAN)]
        return out
    return None


def _measure_kinds(variants: list[L.Term]) -> list[tuple[L.Term, str]]:
    out = []
    for t in variants:
        ty = _term_sort(t)
        out.append((t, "structural" if isinstance(ty, TAdt) else "int"))
    return out


def vcs_for_function(gen: Generator, d: X.TFun) -> list[VC]:
    contract = gen.program_fns[d.name].contract
    entry_measures = _measure_kinds(contract.variants) if contract else []
    names = _Names({p for p, _ in d.params} | {contract.result if contract else "result"})
    st = WpState(gen.program_fns, d.name, entry_measures, names, gen.rewrite)
    st.ctors = gen.ctors
    st.exc_payloads = gen.exc_payloads  # type: ignore[attr-defined]
    env: Env = {p: L.Var(p, t) for p, t in d.params}

    result_name = contract.result if contract else "result"
    ens = contract.ensures if contract else []

    def k_normal(env_k: Env, res: L.Term) -> L.Formula:
        parts = [
            st.tag(
                KIND_POSTCONDITION,
                span,
                _subst_env(f, env_k, {result_name: res}),
            )
            for f, span in ens
        ]
        return L.conj(parts)

    kexc: ExcKont = {}
    for exc, payload_var, formula, span in (contract.raises if contract else []):
        def mk(formula=formula, payload_var=payload_var, span=span):
            def on_raise(env_k: Env, payload: Optional[L.Term]) -> L.Formula:
                extra = {}
                if payload_var is not None and payload is not None:
                    extra[payload_var] = payload
                return st.tag(KIND_EXCEPTIONAL, span, _subst_env(formula, env_k, extra))
            return on_raise
        kexc[exc] = mk()

    top = wp(st, env, d.body, k_normal, kexc)
    context = gen.context_before(d.name)
    pre_hyps = [f for f, _ in (contract.requires if contract else [])]
    vcs: list[VC] = []
    counters: dict[str, int] = {}
    for kind, span, label, closed in split_obligations(top):
        idx = counters.get(kind, 0)
        counters[kind] = idx + 1
        name = f"{d.name}.{kind}.{idx}"
        task = make_task(name, context, d.params, pre_hyps, closed)
        vcs.append(VC(name, d.name, kind, span, task))
    return vcs


def _logic_termination_calls(
    body: L.Body, fname: str
) -> list[tuple[list[tuple[str, Type]], list[L.Formula], tuple[L.Term, ...]]]:
    """Self-calls with their binders and path conditions.  Conjunction and
    disjunction guard their right operand (matching unfolding evaluation)."""
    out: list[tuple[list[tuple[str, Type]], list[L.Formula], tuple[L.Term, ...]]] = []

    def walk(node, binders: list[tuple[str, Type]], conds: list[L.Formula]) -> None:
        if isinstance(node, (L.App, L.PredApp)) and node.name == fname:
            out.append((list(binders), list(conds), tuple(node.args)))
        if isinstance(node, L.Ite):
            walk(node.cond, binders, conds)
            walk(node.then, binders, conds + [node.cond])
            walk(node.els, binders, conds + [L.Not(node.cond)])
            return
        if isinstance(node, L.Match):
            walk(node.scrutinee, binders, conds)
            names = _Names({n for n, _ in binders})
            sty = _term_sort(node.scrutinee)
            for i, (pat, b) in enumerate(node.branches):
                named = _name_wildcards(pat, names)
                vars_ = L.pat_vars(named)
                eqs: list[L.Formula] = [L.Eq(node.scrutinee, L.pat_to_term(named), sty)]
                for prev, _ in node.branches[:i]:
                    eqs.append(
                        _no_match_formula(
                            node.scrutinee, sty, prev, names.taken | {n for n, _ in vars_}
                        )
                    )
                walk(b, binders + list(vars_), conds + eqs)
            return
        if isinstance(node, L.Conn) and node.op in ("and", "or"):
            walk(node.left, binders, conds)
            guard = node.left if node.op == "and" else L.Not(node.left)
            walk(node.right, binders, conds + [guard])
            return
        if isinstance(node, L.Conn) and node.op == "implies":
            walk(node.left, binders, conds)
            walk(node.right, binders, conds + [node.left])
            return
        if isinstance(node, L.Quant):
            walk(node.body, binders + list(node.binders), conds)
            return
        for attr in ("left", "right", "arg", "cond", "then", "els", "term",
                     "formula", "array", "index"):
            child = getattr(node, attr, None)
            if isinstance(child, (L.Term, L.Formula)):
                walk(child, binders, conds)
        for attr in ("args", "items"):
            children = getattr(node, attr, None)
            if isinstance(children, tuple):
                for c in children:
                    if isinstance(c, (L.Term, L.Formula)):
                        walk(c, binders, conds)

    walk(body, [], [])
    return out


def vcs_for_logic_def(gen: Generator, d: D.FunDef, span: Span) -> list[VC]:
    if not d.rec:
        return []
    measures = _measure_kinds(list(d.variants))
    context = gen.context_before(d.name)
    # the symbol is visible abstractly, but its defining equations are not:
    # a bogus definition must not help prove its own termination
    context.append(
        D.FunDecl(d.name, d.tyvars, tuple(t for _, t in d.params), d.result)
    )
    vcs: list[VC] = []
    idx = 0
    for binders, conds, args in _logic_termination_calls(d.body, d.name):
        argmap = {p: a for (p, _), a in zip(d.params, args)}
        dummy = _Names(set())
        st = WpState({}, d.name, measures, dummy, gen.rewrite)
        goal = L.forall(
            list(binders), L.implies(L.conj(conds), _lex_decrease(st, argmap))
        )
        name = f"{d.name}.{KIND_TERMINATION}.{idx}"
        task = make_task(name, context, list(d.params), [], goal)
        vcs.append(VC(name, d.name, KIND_TERMINATION, span, task))
        idx += 1
    return vcs


def vcs_for_lemma(gen: Generator, d, span: Span) -> list[VC]:
    context = gen.context_before(d.name)
    name = f"{d.name}.{KIND_LEMMA}.0"
    task = make_task(name, context, [], [], d.formula, intro=False)
    return [VC(name, d.name, KIND_LEMMA, span, task)]


def generate(program: X.TypedProgram) -> list[VC]:
    """All VCs of a program, in declaration order; deterministic."""
    gen = Generator(program)
    vcs: list[VC] = []
    for d in program.decls:
        if isinstance(d, X.TLogic):
            decl = d.decl
            if isinstance(decl, D.FunDef):
                for name in gen.defunc.instances.get(decl.name, [decl.name]):
                    inst = next(
                        (x for x in gen.context if getattr(x, "name", None) == name),
                        None,
                    )
                    if isinstance(inst, D.FunDef):
                        vcs.extend(vcs_for_logic_def(gen, inst, d.span))
            elif isinstance(decl, D.LemmaDecl):
                for name in gen.defunc.instances.get(decl.name, [decl.name]):
                    inst = next(
                        (x for x in gen.context if getattr(x, "name", None) == name),
                        None,
                    )
                    if isinstance(inst, D.LemmaDecl):
                        vcs.extend(vcs_for_lemma(gen, inst, d.span))
        elif isinstance(d, X.TFun):
            vcs.extend(vcs_for_function(gen, d))
    return vcs
