"""Name resolution and type checking over the two-layer language.

The program layer and the logic layer have disjoint symbol namespaces:
formulas can never call program functions and program code can never
reference lemmas or logical functions.  Inference is unification-based and
monomorphic per definition; only the built-in prelude is polymorphic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from veriml import prelude
from veriml import typedast as X
from veriml.frontend import ast as A
from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import (
    BOOL,
    INT,
    UNIT,
    TAbstract,
    TAdt,
    TArray,
    TArrow,
    TRef,
    TTuple,
    TVar,
    Type,
    free_tvars,
    subst_type,
    type_str,
)


class TypeCheckError(Exception):
    def __init__(self, message: str, span: A.Span = A.NOSPAN):
        super().__init__(f"{message} (at offset {span[0]})")
        self.message = message
        self.span = span


class Infer:
    """Union-find style unifier over TVar names."""

    def __init__(self) -> None:
        self.subst: dict[str, Type] = {}
        self._counter = itertools.count()

    def fresh(self, hint: str = "t") -> TVar:
        return TVar(f"?{hint}{next(self._counter)}")

    def resolve(self, t: Type) -> Type:
        while isinstance(t, TVar) and t.name in self.subst:
            t = self.subst[t.name]
        return t

    def _occurs(self, name: str, t: Type) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.name == name
        if isinstance(t, TAdt):
            return any(self._occurs(name, a) for a in t.args)
        if isinstance(t, TTuple):
            return any(self._occurs(name, a) for a in t.items)
        if isinstance(t, (TArray, TRef)):
            return self._occurs(name, t.elem)
        if isinstance(t, TArrow):
            return any(self._occurs(name, a) for a in t.params) or self._occurs(name, t.result)
        return False

    def unify(self, a: Type, b: Type, span: A.Span) -> None:
        a = self.resolve(a)
        b = self.resolve(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self._occurs(a.name, b):
                raise TypeCheckError("cannot construct infinite type", span)
            self.subst[a.name] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a, span)
            return
        if isinstance(a, TAdt) and isinstance(b, TAdt) and a.name == b.name:
            for x, y in zip(a.args, b.args):
                self.unify(x, y, span)
            return
        if isinstance(a, TTuple) and isinstance(b, TTuple) and len(a.items) == len(b.items):
            for x, y in zip(a.items, b.items):
                self.unify(x, y, span)
            return
        if isinstance(a, TArray) and isinstance(b, TArray):
            self.unify(a.elem, b.elem, span)
            return
        if isinstance(a, TRef) and isinstance(b, TRef):
            self.unify(a.elem, b.elem, span)
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow) and len(a.params) == len(b.params):
            for x, y in zip(a.params, b.params):
                self.unify(x, y, span)
            self.unify(a.result, b.result, span)
            return
        raise TypeCheckError(
            f"type mismatch: {type_str(self.deep(a))} vs {type_str(self.deep(b))}", span
        )

    def deep(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, TAdt):
            return TAdt(t.name, tuple(self.deep(a) for a in t.args))
        if isinstance(t, TTuple):
            return TTuple(tuple(self.deep(a) for a in t.items))
        if isinstance(t, TArray):
            return TArray(self.deep(t.elem))
        if isinstance(t, TRef):
            return TRef(self.deep(t.elem))
        if isinstance(t, TArrow):
            return TArrow(tuple(self.deep(a) for a in t.params), self.deep(t.result))
        return t

    def zonk(self, t: Type, span: A.Span) -> Type:
        out = self.deep(t)
        if free_tvars(out):
            raise TypeCheckError(
                f"cannot infer a unique type (got {type_str(out)})", span
            )
        return out


@dataclass
class ProgFn:
    name: str
    tyvars: tuple[str, ...]
    params: list[tuple[str, Type]]
    result: Type
    contract: Optional[X.TContract]
    has_body: bool


class Checker:
    def __init__(self) -> None:
        self.inf = Infer()
        self.types: dict[str, tuple[str, object]] = {"list": ("adt", prelude.LIST_ADT)}
        self.constructors: dict[str, tuple[str, tuple[str, ...], tuple[Type, ...]]] = {
            "[]": ("list", ("a",), ()),
            "::": ("list", ("a",), (TVar("a"), TAdt("list", (TVar("a"),)))),
        }
        self.program_fns: dict[str, ProgFn] = {
            prelude.REV_APPEND_NAME: ProgFn(
                prelude.REV_APPEND_NAME,
                prelude.REV_APPEND_TYVARS,
                list(prelude.REV_APPEND_PARAMS),
                prelude.REV_APPEND_RESULT,
                X.TContract(
                    prelude.REV_APPEND_RESULT_NAME,
                    ensures=[(prelude.REV_APPEND_ENSURES, A.NOSPAN)],
                ),
                True,
            )
        }
        self.logic_syms: dict[str, D.Declaration] = {d.name: d for d in prelude.LOGIC_DEFS}
        self.axioms: dict[str, D.AxiomDecl] = {d.name: d for d in prelude.LIB_AXIOMS}
        self.lemmas: dict[str, D.LemmaDecl] = {}
        self.exceptions: dict[str, Optional[Type]] = dict(prelude.EXCEPTIONS)
        self.decls_out: list[X.TDecl] = []
        self.warnings: list[str] = []

    # -- names --------------------------------------------------------------

    def _check_new_name(self, name: str, span: A.Span) -> None:
        if name in prelude.RESERVED_NAMES:
            raise TypeCheckError(f"{name!r} is reserved by the standard prelude", span)
        if name in self.program_fns and name in self.logic_syms:
            raise AssertionError
        if name in self.program_fns or name in self.logic_syms:
            raise TypeCheckError(
                f"{name!r} conflicts with an existing declaration; "
                "logical and program symbols share one name space", span
            )
        if name in self.lemmas or name in self.axioms:
            raise TypeCheckError(f"duplicate lemma/axiom name {name!r}", span)

    # -- types ---------------------------------------------------------------

    def resolve_ty(self, t: Type, span: A.Span) -> Type:
        if isinstance(t, TAdt):
            if t.name == "list":
                return TAdt("list", tuple(self.resolve_ty(a, span) for a in t.args))
            entry = self.types.get(t.name)
            if entry is None:
                raise TypeCheckError(f"unbound type {t.name!r}", span)
            kind, payload = entry
            if t.args:
                raise TypeCheckError(f"type {t.name!r} takes no arguments", span)
            if kind == "abstract":
                return TAbstract(t.name)
            if kind == "alias":
                return payload  # type: ignore[return-value]
            return TAdt(t.name, ())
        if isinstance(t, TTuple):
            return TTuple(tuple(self.resolve_ty(a, span) for a in t.items))
        if isinstance(t, TArray):
            return TArray(self.resolve_ty(t.elem, span))
        if isinstance(t, TRef):
            return TRef(self.resolve_ty(t.elem, span))
        if isinstance(t, TArrow):
            return TArrow(
                tuple(self.resolve_ty(a, span) for a in t.params),
                self.resolve_ty(t.result, span),
            )
        return t

    def _instantiate_constructor(
        self, name: str, span: A.Span
    ) -> tuple[TAdt, tuple[Type, ...]]:
        adt_name, tyvars, arg_tys = self.constructors[name]
        mapping = {v: self.inf.fresh(v) for v in tyvars}
        adt_ty = TAdt(adt_name, tuple(mapping[v] for v in tyvars))
        return adt_ty, tuple(subst_type(a, mapping) for a in arg_tys)

    # -- patterns ------------------------------------------------------------

    def check_pattern(
        self, pat: A.Pattern, expected: Type, binds: dict[str, Type]
    ) -> L.Pat:
        if isinstance(pat, A.PWild):
            return L.PatWild(expected)
        if isinstance(pat, A.PVar):
            if pat.name in binds:
                raise TypeCheckError(f"duplicate variable {pat.name!r} in pattern", pat.span)
            binds[pat.name] = expected
            return L.PatVar(pat.name, expected)
        if isinstance(pat, A.PTuple):
            frescoes = [self.inf.fresh() for _ in pat.items]
            self.inf.unify(expected, TTuple(tuple(frescoes)), pat.span)
            items = tuple(
                self.check_pattern(p, t, binds) for p, t in zip(pat.items, frescoes)
            )
            return L.PatTuple(items, self.inf.resolve(expected))
        if isinstance(pat, A.PConstr):
            if pat.name == "()":
                self.inf.unify(expected, UNIT, pat.span)
                return L.PatWild(UNIT)
            if pat.name not in self.constructors:
                raise TypeCheckError(f"unbound constructor {pat.name!r}", pat.span)
            adt_ty, arg_tys = self._instantiate_constructor(pat.name, pat.span)
            self.inf.unify(expected, adt_ty, pat.span)
            args = list(pat.args)
            if len(args) == 1 and isinstance(args[0], A.PTuple) and len(arg_tys) > 1:
                args = list(args[0].items)
            if len(args) != len(arg_tys):
                raise TypeCheckError(
                    f"constructor {pat.name!r} expects {len(arg_tys)} argument(s), "
                    f"got {len(args)}", pat.span
                )
            sub = tuple(
                self.check_pattern(p, t, binds) for p, t in zip(args, arg_tys)
            )
            return L.PatConstr(pat.name, sub, adt_ty)
        if isinstance(pat, A.POr):
            raise TypeCheckError("nested or-patterns are not supported", pat.span)
        raise AssertionError(f"unknown pattern {pat!r}")

    def expand_branches(
        self, branches: list[tuple[A.Pattern, object]]
    ) -> list[tuple[A.Pattern, object]]:
        """Split or-patterns into one branch per alternative; alternatives
        must bind the same variable names (checked per-branch later)."""
        out: list[tuple[A.Pattern, object]] = []
        for pat, body in branches:
            if isinstance(pat, A.POr):
                names = None
                for alt in pat.alts:
                    alt_names = _surface_pat_names(alt)
                    if names is None:
                        names = alt_names
                    elif names != alt_names:
                        raise TypeCheckError(
                            "or-pattern alternatives must bind the same variables",
                            pat.span,
                        )
                    out.append((alt, body))
            else:
                out.append((pat, body))
        return out

    # -- logic expressions ----------------------------------------------------

    def _instantiate_logic(self, d: D.Declaration) -> tuple[tuple[Type, ...], tuple[Type, ...], Optional[Type]]:
        """Instantiate a FunDecl/FunDef scheme with fresh variables; returns
        (tyarg variables, param types, result type)."""
        if isinstance(d, D.FunDecl):
            tyvars, params, result = d.tyvars, d.params, d.result
        elif isinstance(d, D.FunDef):
            tyvars, params, result = d.tyvars, tuple(t for _, t in d.params), d.result
        else:
            raise AssertionError
        mapping = {v: self.inf.fresh(v) for v in tyvars}
        tyargs = tuple(mapping[v] for v in tyvars)
        params_i = tuple(subst_type(p, mapping) for p in params)
        result_i = subst_type(result, mapping) if result is not None else None
        return tyargs, params_i, result_i

    def check_prop(self, env: dict[str, Type], e: A.LExpr) -> L.Formula:
        if isinstance(e, A.LBool):
            return L.TRUE if e.value else L.FALSE
        if isinstance(e, A.LConn):
            return L.Conn(e.op, self.check_prop(env, e.left), self.check_prop(env, e.right))
        if isinstance(e, A.LNot):
            return L.Not(self.check_prop(env, e.arg))
        if isinstance(e, A.LQuant):
            binders = []
            inner = dict(env)
            for name, ty in e.binders:
                rty = self.resolve_ty(ty, e.span) if ty is not None else self.inf.fresh(name)
                binders.append((name, rty))
                inner[name] = rty
            return L.Quant(e.quant, tuple(binders), self.check_prop(inner, e.body))
        if isinstance(e, A.LBinop):
            if e.op in ("=", "<>"):
                lt, lty = self.infer_term(env, e.left)
                rt, rty = self.infer_term(env, e.right)
                self.inf.unify(lty, rty, e.span)
                eq = L.Eq(lt, rt, self.inf.resolve(lty))
                return eq if e.op == "=" else L.Not(eq)
            if e.op in ("<", "<=", ">", ">="):
                lt, lty = self.infer_term(env, e.left)
                rt, rty = self.infer_term(env, e.right)
                self.inf.unify(lty, INT, e.span)
                self.inf.unify(rty, INT, e.span)
                return L.Cmp(e.op, lt, rt)
            raise TypeCheckError(f"arithmetic {e.op!r} is not a formula", e.span)
        if isinstance(e, A.LIf):
            cond = self.check_prop(env, e.cond)
            return L.Conn(
                "and",
                L.implies(cond, self.check_prop(env, e.then)),
                L.implies(L.Not(cond), self.check_prop(env, e.els)),
            )
        if isinstance(e, A.LMatch):
            scrut, sty = self.infer_term(env, e.scrutinee)
            branches = []
            for pat, body in self.expand_branches(list(e.branches)):
                binds: dict[str, Type] = {}
                cpat = self.check_pattern(pat, sty, binds)
                inner = dict(env)
                inner.update(binds)
                branches.append((cpat, self.check_prop(inner, body)))
            return L.TermF(L.Match(scrut, tuple(branches), BOOL))
        if isinstance(e, A.LApp) and e.name in self.logic_syms:
            d = self.logic_syms[e.name]
            tyargs, params, result = self._instantiate_logic(d)
            if result is None:
                args = self._check_logic_args(env, e, params)
                return L.PredApp(e.name, args, tyargs)
        if isinstance(e, A.LLambda):
            raise TypeCheckError("lambda outside an argument position", e.span)
        # fall back: a boolean term used as a formula
        t, ty = self.infer_term(env, e)
        self.inf.unify(ty, BOOL, getattr(e, "span", A.NOSPAN))
        return L.TermF(t)

    def _check_logic_args(
        self, env: dict[str, Type], e: A.LApp, params: tuple[Type, ...]
    ) -> tuple[L.Term, ...]:
        if len(e.args) != len(params):
            raise TypeCheckError(
                f"{e.name!r} expects {len(params)} argument(s), got {len(e.args)}",
                e.span,
            )
        return tuple(
            self.check_term_against(env, a, p) for a, p in zip(e.args, params)
        )

    def check_term_against(self, env: dict[str, Type], e: A.LExpr, expected: Type) -> L.Term:
        expected_r = self.inf.resolve(expected)
        if isinstance(e, A.LLambda):
            if not isinstance(expected_r, TArrow):
                raise TypeCheckError("lambda outside an argument position", e.span)
            if len(e.params) != len(expected_r.params):
                raise TypeCheckError("lambda arity mismatch", e.span)
            binders = []
            inner = dict(env)
            for (name, ty), pty in zip(e.params, expected_r.params):
                rty = self.resolve_ty(ty, e.span) if ty is not None else pty
                self.inf.unify(rty, pty, e.span)
                binders.append((name, rty))
                inner[name] = rty
            res = self.inf.resolve(expected_r.result)
            if res == BOOL or isinstance(res, TVar):
                self.inf.unify(res, BOOL, e.span)
                body: L.Body = self.check_prop(inner, e.body)
            else:
                body = self.check_term_against(inner, e.body, res)
            return L.Lambda(tuple(binders), body, expected_r)
        if isinstance(expected_r, TArrow):
            # only a variable or lambda may sit at a function-sorted position
            if isinstance(e, A.LVar):
                ty = env.get(e.name)
                if ty is None:
                    raise TypeCheckError(f"unbound variable {e.name!r}", e.span)
                self.inf.unify(ty, expected_r, e.span)
                return L.Var(e.name, expected_r)
            raise TypeCheckError(
                "higher-order argument must be a variable or a lambda", getattr(e, "span", A.NOSPAN)
            )
        t, ty = self.infer_term(env, e)
        self.inf.unify(ty, expected, getattr(e, "span", A.NOSPAN))
        return t

    def infer_term(self, env: dict[str, Type], e: A.LExpr) -> tuple[L.Term, Type]:
        if isinstance(e, A.LInt):
            return L.IntConst(e.value), INT
        if isinstance(e, A.LBool):
            return L.BoolConst(e.value), BOOL
        if isinstance(e, A.LUnit):
            return L.UnitConst(), UNIT
        if isinstance(e, A.LVar):
            ty = env.get(e.name)
            if ty is not None:
                rty = self.inf.resolve(ty)
                if isinstance(rty, TRef):
                    raise TypeCheckError(
                        f"{e.name!r} is mutable; write !{e.name} in specifications",
                        e.span,
                    )
                return L.Var(e.name, rty), rty
            if e.name in self.logic_syms:
                d = self.logic_syms[e.name]
                tyargs, params, result = self._instantiate_logic(d)
                if params or result is None:
                    raise TypeCheckError(
                        f"{e.name!r} needs arguments" if params else
                        f"predicate {e.name!r} used as a term", e.span
                    )
                return L.App(e.name, (), result, tyargs), result
            if e.name in self.program_fns:
                raise TypeCheckError(
                    f"program function {e.name!r} cannot appear in specifications",
                    e.span,
                )
            raise TypeCheckError(f"unbound logical name {e.name!r}", e.span)
        if isinstance(e, A.LDeref):
            ty = env.get(e.name)
            if ty is None:
                raise TypeCheckError(f"unbound variable {e.name!r}", e.span)
            rty = self.inf.resolve(ty)
            if not isinstance(rty, TRef):
                raise TypeCheckError(f"{e.name!r} is not mutable", e.span)
            return L.Var(e.name, rty.elem), rty.elem
        if isinstance(e, A.LNeg):
            t, ty = self.infer_term(env, e.arg)
            self.inf.unify(ty, INT, e.span)
            return L.Arith("-", L.IntConst(0), t), INT
        if isinstance(e, A.LBinop):
            if e.op in ("+", "-", "*"):
                lt, lty = self.infer_term(env, e.left)
                rt, rty = self.infer_term(env, e.right)
                self.inf.unify(lty, INT, e.span)
                self.inf.unify(rty, INT, e.span)
                return L.Arith(e.op, lt, rt), INT
            raise TypeCheckError(f"formula {e.op!r} used in term position", e.span)
        if isinstance(e, A.LTuple):
            items = []
            tys = []
            for it in e.items:
                t, ty = self.infer_term(env, it)
                items.append(t)
                tys.append(ty)
            ty = TTuple(tuple(tys))
            return L.TupleT(tuple(items), ty), ty
        if isinstance(e, A.LArrayRead):
            arr, aty = self.infer_term(env, e.array)
            idx, ity = self.infer_term(env, e.index)
            elem = self.inf.fresh("elem")
            self.inf.unify(aty, TArray(elem), e.span)
            self.inf.unify(ity, INT, e.span)
            return L.ArrayRead(arr, idx, self.inf.resolve(elem)), self.inf.resolve(elem)
        if isinstance(e, A.LIf):
            cond = self.check_prop(env, e.cond)
            thent, thenty = self.infer_term(env, e.then)
            elst, elsty = self.infer_term(env, e.els)
            self.inf.unify(thenty, elsty, e.span)
            return L.Ite(cond, thent, elst, self.inf.resolve(thenty)), self.inf.resolve(thenty)
        if isinstance(e, A.LMatch):
            scrut, sty = self.infer_term(env, e.scrutinee)
            result = self.inf.fresh("m")
            branches = []
            for pat, body in self.expand_branches(list(e.branches)):
                binds: dict[str, Type] = {}
                cpat = self.check_pattern(pat, sty, binds)
                inner = dict(env)
                inner.update(binds)
                bt, bty = self.infer_term(inner, body)
                self.inf.unify(bty, result, e.span)
                branches.append((cpat, bt))
            rty = self.inf.resolve(result)
            return L.Match(scrut, tuple(branches), rty), rty
        if isinstance(e, A.LApp):
            return self._infer_app(env, e)
        if isinstance(e, A.LLambda):
            raise TypeCheckError("lambda outside an argument position", e.span)
        if isinstance(e, (A.LConn, A.LNot, A.LQuant)):
            raise TypeCheckError(
                "logical formula used in term position", getattr(e, "span", A.NOSPAN)
            )
        raise AssertionError(f"unknown logic node {e!r}")

    def _infer_app(self, env: dict[str, Type], e: A.LApp) -> tuple[L.Term, Type]:
        name = e.name
        if name == "[]":
            elem = self.inf.fresh("elem")
            ty = TAdt("list", (elem,))
            return L.Constr("[]", (), ty), ty
        if name == "::":
            h, hty = self.infer_term(env, e.args[0])
            t, tty = self.infer_term(env, e.args[1])
            self.inf.unify(tty, TAdt("list", (hty,)), e.span)
            ty = self.inf.resolve(tty)
            return L.Constr("::", (h, t), ty), ty
        if name == "++":
            lt, lty = self.infer_term(env, e.args[0])
            rt, rty = self.infer_term(env, e.args[1])
            elem = self.inf.fresh("elem")
            self.inf.unify(lty, TAdt("list", (elem,)), e.span)
            self.inf.unify(rty, lty, e.span)
            ty = self.inf.resolve(lty)
            return L.App("++", (lt, rt), ty, (self.inf.resolve(elem),)), ty
        if name == "Array.length":
            if len(e.args) != 1:
                raise TypeCheckError("Array.length takes one argument", e.span)
            arr, aty = self.infer_term(env, e.args[0])
            self.inf.unify(aty, TArray(self.inf.fresh("elem")), e.span)
            return L.ArrayLen(arr), INT
        if name in env:
            ty = self.inf.resolve(env[name])
            if not e.args:
                return self.infer_term(env, A.LVar(name, span=e.span))
            if not isinstance(ty, TArrow):
                raise TypeCheckError(f"{name!r} is not a function", e.span)
            if len(e.args) != len(ty.params):
                raise TypeCheckError(f"{name!r} arity mismatch", e.span)
            args = tuple(
                self.check_term_against(env, a, p) for a, p in zip(e.args, ty.params)
            )
            return L.App(name, args, ty.result, via_var=True), ty.result
        if name in self.constructors:
            adt_ty, arg_tys = self._instantiate_constructor(name, e.span)
            args = list(e.args)
            if len(args) == 1 and isinstance(args[0], A.LTuple) and len(arg_tys) > 1:
                args = list(args[0].items)
            if len(args) != len(arg_tys):
                raise TypeCheckError(
                    f"constructor {name!r} expects {len(arg_tys)} argument(s)", e.span
                )
            cargs = tuple(
                self.check_term_against(env, a, t) for a, t in zip(args, arg_tys)
            )
            return L.Constr(name, cargs, adt_ty), adt_ty
        if name in self.logic_syms:
            d = self.logic_syms[name]
            tyargs, params, result = self._instantiate_logic(d)
            if result is None:
                raise TypeCheckError(f"predicate {name!r} used as a term", e.span)
            args = self._check_logic_args(env, e, params)
            return L.App(name, args, result, tyargs), result
        if name in self.program_fns:
            raise TypeCheckError(
                f"program function {name!r} cannot appear in specifications", e.span
            )
        raise TypeCheckError(f"unbound logical name {name!r}", e.span)

    # -- program expressions ---------------------------------------------------

    def check_expr(
        self,
        env: dict[str, Type],
        excs: dict[str, Optional[Type]],
        fn_name: str,
        e: A.Expr,
    ) -> X.XExpr:
        chk = lambda ex: self.check_expr(env, excs, fn_name, ex)
        if isinstance(e, A.EInt):
            return X.XInt(e.value, span=e.span)
        if isinstance(e, A.EBool):
            return X.XBool(e.value, span=e.span)
        if isinstance(e, A.EUnit):
            return X.XUnit(span=e.span)
        if isinstance(e, A.EVar):
            ty = env.get(e.name)
            if ty is None:
                if e.name in self.logic_syms:
                    raise TypeCheckError(
                        f"logical symbol {e.name!r} cannot be used in program code",
                        e.span,
                    )
                raise TypeCheckError(f"unbound variable {e.name!r}", e.span)
            rty = self.inf.resolve(ty)
            if isinstance(rty, TRef):
                raise TypeCheckError(f"{e.name!r} is a ref; use !{e.name}", e.span)
            return X.XVar(e.name, rty, span=e.span)
        if isinstance(e, A.EDeref):
            ty = env.get(e.name)
            if ty is None or not isinstance(self.inf.resolve(ty), TRef):
                raise TypeCheckError(f"{e.name!r} is not a local ref", e.span)
            return X.XDeref(e.name, self.inf.resolve(ty).elem, span=e.span)  # type: ignore[union-attr]
        if isinstance(e, A.EAssign):
            ty = env.get(e.name)
            if ty is None or not isinstance(self.inf.resolve(ty), TRef):
                raise TypeCheckError(f"{e.name!r} is not a local ref", e.span)
            val = chk(e.value)
            self.inf.unify(X.expr_type(val), self.inf.resolve(ty).elem, e.span)  # type: ignore[union-attr]
            return X.XAssign(e.name, val, span=e.span)
        if isinstance(e, (A.EIncr, A.EDecr)):
            ty = env.get(e.name)
            if ty is None or not isinstance(self.inf.resolve(ty), TRef):
                raise TypeCheckError(f"{e.name!r} is not a local ref", e.span)
            self.inf.unify(self.inf.resolve(ty).elem, INT, e.span)  # type: ignore[union-attr]
            cls = X.XIncr if isinstance(e, A.EIncr) else X.XDecr
            return cls(e.name, span=e.span)
        if isinstance(e, A.ERef):
            init = chk(e.init)
            ity = X.expr_type(init)
            return X.XRef(init, TRef(ity), span=e.span)
        if isinstance(e, A.EBinop):
            left = chk(e.left)
            right = chk(e.right)
            lty = X.expr_type(left)
            rty = X.expr_type(right)
            if e.op in ("+", "-", "*"):
                self.inf.unify(lty, INT, e.span)
                self.inf.unify(rty, INT, e.span)
                return X.XBinop(e.op, left, right, INT, span=e.span)
            self.inf.unify(lty, rty, e.span)
            resolved = self.inf.resolve(lty)
            if e.op in ("<", "<=", ">", ">="):
                self.inf.unify(resolved, INT, e.span)
            else:
                # decidable program equality only at base types
                if not (resolved == INT or resolved == BOOL or isinstance(resolved, TVar)):
                    raise TypeCheckError(
                        f"program {e.op!r} is only decidable at int/bool, got "
                        f"{type_str(self.inf.deep(resolved))}", e.span
                    )
                if isinstance(resolved, TVar):
                    self.inf.unify(resolved, INT, e.span)
            return X.XBinop(e.op, left, right, BOOL, span=e.span)
        if isinstance(e, A.EAnd) or isinstance(e, A.EOr):
            left = chk(e.left)
            right = chk(e.right)
            self.inf.unify(X.expr_type(left), BOOL, e.span)
            self.inf.unify(X.expr_type(right), BOOL, e.span)
            cls = X.XAnd if isinstance(e, A.EAnd) else X.XOr
            return cls(left, right, span=e.span)
        if isinstance(e, A.ENot):
            arg = chk(e.arg)
            self.inf.unify(X.expr_type(arg), BOOL, e.span)
            return X.XNot(arg, span=e.span)
        if isinstance(e, A.ETuple):
            items = [chk(i) for i in e.items]
            ty = TTuple(tuple(X.expr_type(i) for i in items))
            return X.XTuple(items, ty, span=e.span)
        if isinstance(e, A.EConstr):
            if e.name not in self.constructors:
                raise TypeCheckError(f"unbound constructor {e.name!r}", e.span)
            adt_ty, arg_tys = self._instantiate_constructor(e.name, e.span)
            args = list(e.args)
            if len(args) == 1 and isinstance(args[0], A.ETuple) and len(arg_tys) > 1:
                args = list(args[0].items)
            if len(args) != len(arg_tys):
                raise TypeCheckError(
                    f"constructor {e.name!r} expects {len(arg_tys)} argument(s)", e.span
                )
            xargs = []
            for a, t in zip(args, arg_tys):
                xa = chk(a)
                self.inf.unify(X.expr_type(xa), t, e.span)
                xargs.append(xa)
            return X.XConstr(e.name, xargs, adt_ty, span=e.span)
        if isinstance(e, A.EApp):
            fn = self.program_fns.get(e.fn)
            if fn is None:
                if e.fn in self.logic_syms:
                    raise TypeCheckError(
                        f"logical symbol {e.fn!r} cannot be called in program code",
                        e.span,
                    )
                if e.fn in env:
                    raise TypeCheckError(
                        "higher-order program calls are not supported", e.span
                    )
                raise TypeCheckError(f"unbound function {e.fn!r}", e.span)
            mapping = {v: self.inf.fresh(v) for v in fn.tyvars}
            param_tys = [subst_type(t, mapping) for _, t in fn.params]
            result = subst_type(fn.result, mapping)
            if len(e.args) != len(param_tys):
                raise TypeCheckError(
                    f"{e.fn!r} expects {len(param_tys)} argument(s), got {len(e.args)}",
                    e.span,
                )
            xargs = []
            for a, t in zip(e.args, param_tys):
                xa = chk(a)
                self.inf.unify(X.expr_type(xa), t, getattr(a, "span", e.span))
                xargs.append(xa)
            tyargs = tuple(mapping[v] for v in fn.tyvars)
            return X.XApp(e.fn, xargs, result, tyargs, span=e.span)
        if isinstance(e, A.ELet):
            value = chk(e.value)
            vty = X.expr_type(value)
            if isinstance(self.inf.resolve(vty), TRef) and not isinstance(e.value, A.ERef):
                raise TypeCheckError("refs cannot be re-bound", e.span)
            inner = dict(env)
            inner[e.name] = vty
            body = self.check_expr(inner, excs, fn_name, e.body)
            return X.XLet(e.name, value, body, X.expr_type(body), span=e.span)
        if isinstance(e, A.EIf):
            cond = chk(e.cond)
            self.inf.unify(X.expr_type(cond), BOOL, e.span)
            then = chk(e.then)
            if e.els is None:
                self.inf.unify(X.expr_type(then), UNIT, e.span)
                return X.XIf(cond, then, None, UNIT, span=e.span)
            els = chk(e.els)
            self.inf.unify(X.expr_type(then), X.expr_type(els), e.span)
            return X.XIf(cond, then, els, X.expr_type(then), span=e.span)
        if isinstance(e, A.EMatch):
            scrut = chk(e.scrutinee)
            sty = X.expr_type(scrut)
            result = self.inf.fresh("m")
            branches = []
            for pat, body in self.expand_branches(list(e.branches)):
                binds: dict[str, Type] = {}
                cpat = self.check_pattern(pat, sty, binds)
                inner = dict(env)
                inner.update(binds)
                xbody = self.check_expr(inner, excs, fn_name, body)
                self.inf.unify(X.expr_type(xbody), result, getattr(body, "span", e.span))
                branches.append((cpat, xbody))
            return X.XMatch(scrut, branches, self.inf.resolve(result), span=e.span)
        if isinstance(e, A.EArrayRead):
            arr = chk(e.array)
            idx = chk(e.index)
            elem = self.inf.fresh("elem")
            self.inf.unify(X.expr_type(arr), TArray(elem), e.span)
            self.inf.unify(X.expr_type(idx), INT, e.span)
            return X.XArrayRead(arr, idx, self.inf.resolve(elem), span=e.span)
        if isinstance(e, A.EArrayLength):
            arr = chk(e.array)
            self.inf.unify(X.expr_type(arr), TArray(self.inf.fresh("elem")), e.span)
            return X.XArrayLen(arr, span=e.span)
        if isinstance(e, A.ESeq):
            first = chk(e.first)
            self.inf.unify(X.expr_type(first), UNIT, getattr(e.first, "span", e.span))
            second = chk(e.second)
            return X.XSeq(first, second, span=e.span)
        if isinstance(e, A.EFor):
            lo = chk(e.lo)
            hi = chk(e.hi)
            self.inf.unify(X.expr_type(lo), INT, e.span)
            self.inf.unify(X.expr_type(hi), INT, e.span)
            inner = dict(env)
            inner[e.var] = INT
            invariants = [
                (self.check_prop(inner, f), getattr(f, "span", e.span))
                for f in e.invariants
            ]
            body = self.check_expr(inner, excs, fn_name, e.body)
            self.inf.unify(X.expr_type(body), UNIT, e.span)
            modified = tuple(sorted(_assigned_refs(body)))
            return X.XFor(e.var, lo, hi, invariants, body, modified, span=e.span)
        if isinstance(e, A.ELetException):
            if e.name in excs:
                raise TypeCheckError(f"duplicate exception {e.name!r}", e.span)
            payload = self.resolve_ty(e.payload, e.span) if e.payload is not None else None
            inner_excs = dict(excs)
            inner_excs[e.name] = payload
            body = self.check_expr(env, inner_excs, fn_name, e.body)
            return X.XLetExc(e.name, payload, body, span=e.span)
        if isinstance(e, A.ERaise):
            if e.exc not in excs:
                raise TypeCheckError(f"unbound exception {e.exc!r}", e.span)
            payload_ty = excs[e.exc]
            if payload_ty is None and e.payload is not None:
                raise TypeCheckError(f"exception {e.exc!r} carries no payload", e.span)
            if payload_ty is not None and e.payload is None:
                raise TypeCheckError(f"exception {e.exc!r} needs a payload", e.span)
            payload = None
            if e.payload is not None:
                payload = chk(e.payload)
                self.inf.unify(X.expr_type(payload), payload_ty, e.span)
            return X.XRaise(e.exc, payload, self.inf.fresh("raise"), span=e.span)
        if isinstance(e, A.ETry):
            body = chk(e.body)
            result = X.expr_type(body)
            handlers = []
            for exc, pat, hexpr in e.handlers:
                if exc not in excs:
                    raise TypeCheckError(f"unbound exception {exc!r}", e.span)
                payload_ty = excs[exc]
                binds: dict[str, Type] = {}
                cpat = None
                if pat is not None:
                    if payload_ty is None:
                        raise TypeCheckError(f"exception {exc!r} carries no payload", e.span)
                    cpat = self.check_pattern(pat, payload_ty, binds)
                inner = dict(env)
                inner.update(binds)
                xh = self.check_expr(inner, excs, fn_name, hexpr)
                self.inf.unify(X.expr_type(xh), result, getattr(hexpr, "span", e.span))
                handlers.append((exc, cpat, xh))
            return X.XTry(body, handlers, span=e.span)
        raise AssertionError(f"unknown expr {e!r}")

    # -- zonking ----------------------------------------------------------------

    def zonk_type(self, t: Type, span: A.Span) -> Type:
        return self.inf.zonk(t, span)

    def zonk_logic(self, node, span: A.Span):
        from veriml.logic.subst import map_types

        return map_types(node, lambda t: self.inf.zonk(t, span))

    def zonk_expr(self, e: X.XExpr) -> None:
        span = getattr(e, "span", A.NOSPAN)
        if hasattr(e, "ty") and getattr(e, "ty") is not None:
            e.ty = self.zonk_type(e.ty, span)  # type: ignore[attr-defined]
        if hasattr(e, "tyargs"):
            e.tyargs = tuple(self.zonk_type(t, span) for t in e.tyargs)  # type: ignore[attr-defined]
        for name in ("left", "right", "arg", "cond", "then", "els", "value",
                     "body", "first", "second", "lo", "hi", "init", "scrutinee",
                     "array", "index", "payload"):
            child = getattr(e, name, None)
            if isinstance(child, X.XExpr):
                self.zonk_expr(child)
        for name in ("items", "args"):
            children = getattr(e, name, None)
            if isinstance(children, list):
                for c in children:
                    if isinstance(c, X.XExpr):
                        self.zonk_expr(c)
        if isinstance(e, X.XMatch):
            e.branches = [
                (self.zonk_logic(p, e.span), b) for p, b in e.branches
            ]
            for _, b in e.branches:
                self.zonk_expr(b)
        if isinstance(e, X.XFor):
            e.invariants = [(self.zonk_logic(f, sp), sp) for f, sp in e.invariants]
            self.zonk_expr(e.body)
        if isinstance(e, X.XTry):
            self.zonk_expr(e.body)
            e.handlers = [
                (exc, self.zonk_logic(p, e.span) if p is not None else None, h)
                for exc, p, h in e.handlers
            ]
            for _, _, h in e.handlers:
                self.zonk_expr(h)

    # -- declarations -------------------------------------------------------------

    def check_contract(
        self,
        c: Optional[A.Contract],
        fn_display: str,
        params: list[tuple[str, Type]],
        result_ty: Type,
        span: A.Span,
    ) -> Optional[X.TContract]:
        if c is None:
            return None
        if c.fn_name != fn_display:
            raise TypeCheckError(
                f"contract names {c.fn_name!r} but follows {fn_display!r}", c.span
            )
        if len(c.args) != len(params):
            raise TypeCheckError(
                f"contract header arity {len(c.args)} does not match "
                f"{len(params)} parameter(s)", c.span
            )
        for header_name, (pname, _) in zip(c.args, params):
            if header_name != pname:
                raise TypeCheckError(
                    f"contract header argument {header_name!r} does not match "
                    f"parameter {pname!r}", c.span
                )
        result_name = c.result or "result"
        env = {n: t for n, t in params}
        out = X.TContract(result_name)
        for f in c.requires:
            out.requires.append((self.check_prop(env, f), getattr(f, "span", c.span)))
        env_post = dict(env)
        if result_name in env_post:
            raise TypeCheckError(f"result name {result_name!r} shadows a parameter", c.span)
        env_post[result_name] = result_ty
        for f in c.ensures:
            out.ensures.append((self.check_prop(env_post, f), getattr(f, "span", c.span)))
        for r in c.raises:
            if r.exc not in self.exceptions:
                raise TypeCheckError(f"unbound exception {r.exc!r} in raises clause", r.span)
            payload_ty = self.exceptions[r.exc]
            env_exc = dict(env)
            if r.payload is not None:
                if payload_ty is None:
                    raise TypeCheckError(f"exception {r.exc!r} carries no payload", r.span)
                env_exc[r.payload] = payload_ty
            out.raises.append(
                (r.exc, r.payload, self.check_prop(env_exc, r.formula), r.span)
            )
        for v in c.variants:
            t, ty = self.infer_term(env, v)
            out.variants.append(t)
        return out

    def classify_variants(
        self, measures: list[L.Term], tys: list[Type], span: A.Span
    ) -> list[str]:
        kinds = []
        for ty in tys:
            rty = self.inf.deep(ty)
            if rty == INT:
                kinds.append("int")
            elif isinstance(rty, TAdt):
                kinds.append("structural")
            else:
                raise TypeCheckError(
                    f"variant measure of type {type_str(rty)} is not supported "
                    "(use an integer or an algebraic value)", span
                )
        return kinds


def _surface_pat_names(p: A.Pattern) -> frozenset[str]:
    if isinstance(p, A.PVar):
        return frozenset([p.name])
    if isinstance(p, A.PConstr):
        out: frozenset[str] = frozenset()
        for a in p.args:
            out |= _surface_pat_names(a)
        return out
    if isinstance(p, A.PTuple):
        out = frozenset()
        for a in p.items:
            out |= _surface_pat_names(a)
        return out
    if isinstance(p, A.POr):
        out = frozenset()
        for a in p.alts:
            out |= _surface_pat_names(a)
        return out
    return frozenset()


def _assigned_refs(e: X.XExpr) -> set[str]:
    out: set[str] = set()

    def walk(node) -> None:
        if isinstance(node, (X.XAssign, X.XIncr, X.XDecr)):
            out.add(node.name)
        for name in ("left", "right", "arg", "cond", "then", "els", "value",
                     "body", "first", "second", "lo", "hi", "init", "scrutinee",
                     "array", "index", "payload"):
            child = getattr(node, name, None)
            if isinstance(child, X.XExpr):
                walk(child)
        for name in ("items", "args"):
            children = getattr(node, name, None)
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

    walk(e)
    return out


def _flatten_arrow(t: Type) -> tuple[list[Type], Type]:
    params: list[Type] = []
    while isinstance(t, TArrow):
        params.extend(t.params)
        t = t.result
    return params, t


def check_program(program: A.SurfaceProgram, source: str = "") -> X.TypedProgram:
    ck = Checker()
    out = X.TypedProgram([], path=program.path, source=source)
    for decl in program.decls:
        if isinstance(decl, A.AbstractType):
            if decl.name in ck.types:
                raise TypeCheckError(f"duplicate type {decl.name!r}", decl.span)
            ck.types[decl.name] = ("abstract", None)
            out.decls.append(X.TTypeDecl(D.SortDecl(decl.name), span=decl.span))
        elif isinstance(decl, A.AdtDef):
            if decl.name in ck.types:
                raise TypeCheckError(f"duplicate type {decl.name!r}", decl.span)
            ck.types[decl.name] = ("adt", None)
            ctors = []
            for cname, args in decl.constructors:
                if cname in ck.constructors:
                    raise TypeCheckError(f"duplicate constructor {cname!r}", decl.span)
                rargs = tuple(ck.resolve_ty(a, decl.span) for a in args)
                ctors.append((cname, rargs))
                ck.constructors[cname] = (decl.name, (), rargs)
            adt = D.AdtDecl(decl.name, (), tuple(ctors))
            ck.types[decl.name] = ("adt", adt)
            out.decls.append(X.TTypeDecl(adt, span=decl.span))
        elif isinstance(decl, A.TypeAlias):
            if decl.name in ck.types:
                raise TypeCheckError(f"duplicate type {decl.name!r}", decl.span)
            body = ck.resolve_ty(decl.body, decl.span)
            ck.types[decl.name] = ("alias", body)
        elif isinstance(decl, A.AbstractVal):
            ck._check_new_name(decl.name, decl.span)
            ty = ck.resolve_ty(decl.type, decl.span)
            param_tys, result_ty = _flatten_arrow(ty)
            for pt in param_tys:
                if isinstance(pt, TRef):
                    raise TypeCheckError("ref type in parameter", decl.span)
            if isinstance(result_ty, TRef):
                raise TypeCheckError("ref type in result", decl.span)
            if decl.contract is not None and len(decl.contract.args) != len(param_tys):
                raise TypeCheckError(
                    "contract header arity does not match the declared type",
                    decl.contract.span,
                )
            names = (
                decl.contract.args
                if decl.contract is not None
                else [f"x{i}" for i in range(1, len(param_tys) + 1)]
            )
            params = list(zip(names, param_tys))
            contract = ck.check_contract(decl.contract, decl.name, params, result_ty, decl.span)
            if contract is not None and contract.variants:
                raise TypeCheckError("a val declaration cannot carry a variant", decl.span)
            ck.program_fns[decl.name] = ProgFn(decl.name, (), params, result_ty, contract, False)
            out.decls.append(X.TVal(decl.name, params, result_ty, contract, span=decl.span))
        elif isinstance(decl, A.LetFun):
            ck._check_new_name(decl.name, decl.span)
            if not decl.params:
                raise TypeCheckError("top-level definitions must be functions", decl.span)
            params: list[tuple[str, Type]] = []
            seen: set[str] = set()
            for pname, pty in decl.params:
                if pname in seen:
                    raise TypeCheckError(f"duplicate parameter {pname!r}", decl.span)
                seen.add(pname)
                rty = ck.resolve_ty(pty, decl.span) if pty is not None else ck.inf.fresh(pname)
                if isinstance(rty, TRef):
                    raise TypeCheckError("ref type in parameter", decl.span)
                params.append((pname, rty))
            result_tv: Type = ck.inf.fresh("res")
            if decl.rec:
                ck.program_fns[decl.name] = ProgFn(
                    decl.name, (), params, result_tv, None, True
                )
            env = {n: t for n, t in params}
            body = ck.check_expr(env, dict(ck.exceptions), decl.name, decl.body)
            ck.inf.unify(X.expr_type(body), result_tv, decl.span)
            contract = ck.check_contract(
                decl.contract, decl.name, params, result_tv, decl.span
            )
            # zonk everything now that the definition is complete
            params = [(n, ck.zonk_type(t, decl.span)) for n, t in params]
            result_ty = ck.zonk_type(result_tv, decl.span)
            if isinstance(result_ty, TRef):
                raise TypeCheckError("ref type in result", decl.span)
            ck.zonk_expr(body)
            if contract is not None:
                contract.requires = [
                    (ck.zonk_logic(f, sp), sp) for f, sp in contract.requires
                ]
                contract.ensures = [
                    (ck.zonk_logic(f, sp), sp) for f, sp in contract.ensures
                ]
                contract.raises = [
                    (exc, pv, ck.zonk_logic(f, sp), sp) for exc, pv, f, sp in contract.raises
                ]
                contract.variants = [
                    ck.zonk_logic(t, decl.span) for t in contract.variants
                ]
                if contract.variants:
                    tys = [_term_type_of(t) for t in contract.variants]
                    ck.classify_variants(contract.variants, tys, decl.span)
            if decl.rec and (contract is None or not contract.variants):
                ck.warnings.append(
                    f"recursive function {decl.name!r} has no variant; "
                    "termination is not checked (partial-correctness mode)"
                )
            fn = ProgFn(decl.name, (), params, result_ty, contract, True)
            ck.program_fns[decl.name] = fn
            out.decls.append(
                X.TFun(decl.name, decl.rec, params, result_ty, body, contract, span=decl.span)
            )
        elif isinstance(decl, (A.LogicFun, A.LogicPred)):
            ck._check_new_name(decl.name, decl.span)
            params = []
            seen = set()
            for pname, pty in decl.params:
                if pname in seen:
                    raise TypeCheckError(f"duplicate parameter {pname!r}", decl.span)
                seen.add(pname)
                params.append((pname, ck.resolve_ty(pty, decl.span)))
            result = (
                ck.resolve_ty(decl.result, decl.span)
                if isinstance(decl, A.LogicFun)
                else None
            )
            if decl.body is None:
                if decl.rec:
                    raise TypeCheckError("abstract declarations cannot be recursive", decl.span)
                if decl.variants:
                    raise TypeCheckError("abstract declarations need no variant", decl.span)
                d = D.FunDecl(decl.name, (), tuple(t for _, t in params), result)
                ck.logic_syms[decl.name] = d
                out.decls.append(X.TLogic(d, span=decl.span))
                continue
            if decl.rec and not decl.variants:
                raise TypeCheckError(
                    f"missing variant: recursive definition {decl.name!r} must "
                    "prove termination", decl.span
                )
            stub: D.Declaration = D.FunDecl(decl.name, (), tuple(t for _, t in params), result)
            if decl.rec:
                ck.logic_syms[decl.name] = stub
            env = {n: t for n, t in params}
            if result is None:
                body: L.Body = ck.check_prop(env, decl.body)
            else:
                body = ck.check_term_against(env, decl.body, result)
            variants = []
            for v in decl.variants:
                t, ty = ck.infer_term(env, v)
                variants.append(t)
            body = ck.zonk_logic(body, decl.span)
            variants = [ck.zonk_logic(t, decl.span) for t in variants]
            if variants:
                tys = [_term_type_of(t) for t in variants]
                ck.classify_variants(variants, tys, decl.span)
            d = D.FunDef(
                decl.name, (), tuple(params), result, body,
                rec=decl.rec, variants=tuple(variants),
            )
            ck.logic_syms[decl.name] = d
            out.decls.append(X.TLogic(d, span=decl.span))
        elif isinstance(decl, (A.Lemma, A.Axiom)):
            ck._check_new_name(decl.name, decl.span)
            formula = ck.zonk_logic(ck.check_prop({}, decl.formula), decl.span)
            if isinstance(decl, A.Lemma):
                d = D.LemmaDecl(decl.name, formula)
                ck.lemmas[decl.name] = d
            else:
                d = D.AxiomDecl(decl.name, formula)
                ck.axioms[decl.name] = d
            out.decls.append(X.TLogic(d, span=decl.span))
        else:
            raise AssertionError(f"unknown declaration {decl!r}")
    _check_no_arrow_equality(out)
    out.symbols = _build_symbols(ck)
    out.warnings = ck.warnings
    return out


def _term_type_of(t: L.Term) -> Type:
    from veriml.logic.subst import _term_type

    ty = _term_type(t)
    if ty is None:
        if isinstance(t, L.Arith):
            return INT
        if isinstance(t, L.ArrayLen):
            return INT
        raise AssertionError(f"cannot type measure {t!r}")
    return ty


def _check_no_arrow_equality(p: X.TypedProgram) -> None:
    def walk(node) -> None:
        if isinstance(node, L.Eq) and isinstance(node.ty, TArrow):
            raise TypeCheckError("equality at an arrow type is not allowed")
        for attr in ("left", "right", "arg", "cond", "then", "els", "body",
                     "term", "formula", "scrutinee", "array", "index"):
            child = getattr(node, attr, None)
            if isinstance(child, (L.Term, L.Formula)):
                walk(child)
        for attr in ("args", "items"):
            children = getattr(node, attr, None)
            if isinstance(children, tuple):
                for c in children:
                    if isinstance(c, (L.Term, L.Formula)):
                        walk(c)
        if isinstance(node, L.Match):
            for _, b in node.branches:
                walk(b)

    for d in p.decls:
        if isinstance(d, X.TLogic):
            if isinstance(d.decl, D.FunDef):
                walk(d.decl.body)
            elif isinstance(d.decl, (D.AxiomDecl, D.LemmaDecl)):
                walk(d.decl.formula)


def _build_symbols(ck: Checker) -> X.SymbolTable:
    table = X.SymbolTable()
    for name, (kind, payload) in ck.types.items():
        table.types[name] = kind
    for name, (adt, tyvars, args) in ck.constructors.items():
        table.constructors[name] = (adt, args)
    for name, fn in ck.program_fns.items():
        table.program_fns[name] = ([t for _, t in fn.params], fn.result)
    table.logic_fns = dict(ck.logic_syms)
    table.lemmas = dict(ck.lemmas)
    table.axioms = dict(ck.axioms)
    table.exceptions = dict(ck.exceptions)
    return table
