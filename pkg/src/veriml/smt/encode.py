"""SMT-LIB2 encoding of monomorphic, defunctionalized tasks.

ADTs become datatype declarations, abstract sorts become uninterpreted
sorts, recursive logical definitions become universally quantified guarded
equations (one per branch), array reads go through an uninterpreted read
symbol per element sort with a nonnegative length symbol, hypotheses are
asserted positively and the goal is asserted negated.  The rendered text is
bit-exact deterministic for a given task.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import BOOL, INT, UNIT, TAbstract, TAdt, TArray, TArrow, TTuple, TVar, Type


class EncodeError(Exception):
    pass


@dataclass(frozen=True)
class SmtScript:
    logic: str
    commands: tuple[str, ...]

    @property
    def text(self) -> str:
        return "\n".join((f"(set-logic {self.logic})",) + self.commands) + "\n"


_SMT_RESERVED = {
    "assert", "check-sat", "declare-fun", "declare-sort", "define-fun", "exists",
    "forall", "let", "match", "par", "sat", "unsat", "true", "false", "and",
    "or", "not", "xor", "ite", "as", "is", "select", "store", "div", "mod",
    "abs", "Int", "Bool", "Array", "distinct", "set-logic", "exit",
}


class _SymbolMap:
    def __init__(self) -> None:
        self.map: dict[str, str] = {}
        self.used: set[str] = set(_SMT_RESERVED)

    def get(self, name: str) -> str:
        out = self.map.get(name)
        if out is not None:
            return out
        cand = "".join(
            ch if ch.isalnum() or ch in "_-" else "_" for ch in name
        )
        if not cand or cand[0].isdigit():
            cand = "v_" + cand
        if name == "++":
            cand = "append"
        base = cand
        i = 2
        while cand in self.used:
            cand = f"{base}{i}"
            i += 1
        self.used.add(cand)
        self.map[name] = cand
        return cand


class Encoder:
    def __init__(self, task: D.Task):
        self.task = task
        self.sym = _SymbolMap()
        self.commands: list[str] = []
        self.adts: dict[str, D.AdtDecl] = {
            d.name: d for d in task.decls if isinstance(d, D.AdtDecl)
        }
        self.tuple_sorts: dict[tuple[Type, ...], str] = {}
        self.array_sorts: dict[Type, str] = {}
        self.unit_used = False
        self._sort_cache: dict[Type, str] = {}

    # -- sorts ---------------------------------------------------------------

    def _collect_types(self) -> list[Type]:
        seen: list[Type] = []

        def add(t: Type) -> None:
            if t not in seen:
                seen.append(t)
            if isinstance(t, TAdt) and t.name in self.adts:
                for _, args in self.adts[t.name].constructors:
                    for a in args:
                        note(a)
            if isinstance(t, TTuple):
                for i in t.items:
                    note(i)
            if isinstance(t, TArray):
                note(t.elem)

        def note(t: Type) -> None:
            if isinstance(t, TVar):
                raise EncodeError("type variable reached the encoder")
            if isinstance(t, TArrow):
                raise EncodeError("arrow type reached the encoder")
            if t not in seen:
                add(t)

        def scan_node(node) -> None:
            from veriml.logic.subst import map_types

            map_types(node, lambda t: (note(t), t)[1])

        for d in self.task.decls:
            if isinstance(d, D.SortDecl):
                note(TAbstract(d.name))
            elif isinstance(d, D.AdtDecl):
                note(TAdt(d.name, ()))
            elif isinstance(d, D.ConstDecl):
                note(d.ty)
            elif isinstance(d, D.FunDecl):
                for p in d.params:
                    note(p)
                if d.result is not None:
                    note(d.result)
            elif isinstance(d, D.FunDef):
                for _, p in d.params:
                    note(p)
                if d.result is not None:
                    note(d.result)
                scan_node(d.body)
            elif isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
                scan_node(d.formula)
        for _, h in self.task.hyps:
            scan_node(h)
        scan_node(self.task.goal)
        return seen

    def _declare_sorts(self) -> None:
        types = self._collect_types()
        emitted: set[str] = set()
        order: list[Type] = []
        visiting: set[str] = set()

        def key(t: Type) -> str:
            return repr(t)

        def visit(t: Type) -> None:
            k = key(t)
            if k in emitted:
                return
            if k in visiting:
                raise EncodeError(f"cyclic sort dependency through {t!r}")
            visiting.add(k)
            if isinstance(t, TAdt) and t.name in self.adts:
                for _, args in self.adts[t.name].constructors:
                    for a in args:
                        if a != t:
                            visit(a)
            elif isinstance(t, TTuple):
                for i in t.items:
                    visit(i)
            elif isinstance(t, TArray):
                visit(t.elem)
            visiting.discard(k)
            emitted.add(k)
            order.append(t)

        for t in types:
            visit(t)

        for t in order:
            if isinstance(t, TAbstract):
                self.commands.append(f"(declare-sort {self.sym.get(t.name)} 0)")
            elif t == UNIT:
                self.unit_used = True
                self.commands.append("(declare-datatypes ((Unit 0)) (((unitv))))")
            elif isinstance(t, TAdt):
                adt = self.adts.get(t.name)
                if adt is None:
                    raise EncodeError(f"undeclared sort {t.name!r}")
                if adt.tyvars:
                    raise EncodeError(f"polymorphic ADT {t.name!r} reached the encoder")
                sname = self.sym.get(t.name)
                ctors = []
                for cname, args in adt.constructors:
                    cs = self.sym.get(cname)
                    fields = " ".join(
                        f"({cs}_{i} {self.sort(a)})" for i, a in enumerate(args)
                    )
                    ctors.append(f"({cs}{' ' + fields if fields else ''})")
                self.commands.append(
                    f"(declare-datatypes (({sname} 0)) ((" + " ".join(ctors) + ")))"
                )
            elif isinstance(t, TTuple):
                name = self._tuple_sort_name(t)
                fields = " ".join(
                    f"({name}_{i} {self.sort(it)})" for i, it in enumerate(t.items)
                )
                self.commands.append(
                    f"(declare-datatypes (({name} 0)) (((mk_{name} {fields}))))"
                )
            elif isinstance(t, TArray):
                name = self._array_sort_name(t)
                self.commands.append(f"(declare-sort {name} 0)")
                self.commands.append(
                    f"(declare-fun read_{name} ({name} Int) {self.sort(t.elem)})"
                )
                self.commands.append(f"(declare-fun length_{name} ({name}) Int)")
                self.commands.append(
                    f"(assert (forall ((a {name})) (<= 0 (length_{name} a))))"
                )

    def _tuple_sort_name(self, t: TTuple) -> str:
        k = t.items
        if k not in self.tuple_sorts:
            from veriml.logic.mono import type_key

            self.tuple_sorts[k] = self.sym.get(type_key(t))
        return self.tuple_sorts[k]

    def _array_sort_name(self, t: TArray) -> str:
        if t.elem not in self.array_sorts:
            from veriml.logic.mono import type_key

            self.array_sorts[t.elem] = self.sym.get(type_key(t))
        return self.array_sorts[t.elem]

    def sort(self, t: Type) -> str:
        if t == INT:
            return "Int"
        if t == BOOL:
            return "Bool"
        if t == UNIT:
            self.unit_used = True
            return "Unit"
        if isinstance(t, TAbstract):
            return self.sym.get(t.name)
        if isinstance(t, TAdt):
            return self.sym.get(t.name)
        if isinstance(t, TTuple):
            return self._tuple_sort_name(t)
        if isinstance(t, TArray):
            return self._array_sort_name(t)
        raise EncodeError(f"cannot encode sort {t!r}")

    # -- terms and formulas ----------------------------------------------------

    def term(self, t: L.Term, env: dict[str, str]) -> str:
        if isinstance(t, L.Var):
            name = env.get(t.name)
            if name is None:
                raise EncodeError(f"unbound variable {t.name!r} in encoder")
            return name
        if isinstance(t, L.IntConst):
            return str(t.value) if t.value >= 0 else f"(- {-t.value})"
        if isinstance(t, L.BoolConst):
            return "true" if t.value else "false"
        if isinstance(t, L.UnitConst):
            self.unit_used = True
            return "unitv"
        if isinstance(t, L.Arith):
            return f"({t.op} {self.term(t.left, env)} {self.term(t.right, env)})"
        if isinstance(t, L.App):
            if t.via_var:
                raise EncodeError(f"higher-order application of {t.name!r} survived")
            fn = self.sym.get(t.name)
            if not t.args:
                return fn
            return f"({fn} " + " ".join(self.term(a, env) for a in t.args) + ")"
        if isinstance(t, L.Constr):
            c = self.sym.get(t.name)
            if not t.args:
                return c
            return f"({c} " + " ".join(self.term(a, env) for a in t.args) + ")"
        if isinstance(t, L.TupleT):
            assert isinstance(t.ty, TTuple)
            name = self._tuple_sort_name(t.ty)
            return f"(mk_{name} " + " ".join(self.term(i, env) for i in t.items) + ")"
        if isinstance(t, L.Ite):
            return (
                f"(ite {self.formula(t.cond, env)} "
                f"{self.term(t.then, env)} {self.term(t.els, env)})"
            )
        if isinstance(t, L.ArrayRead):
            aty = self._term_sort(t.array)
            assert isinstance(aty, TArray)
            name = self._array_sort_name(aty)
            return f"(read_{name} {self.term(t.array, env)} {self.term(t.index, env)})"
        if isinstance(t, L.ArrayLen):
            aty = self._term_sort(t.array)
            assert isinstance(aty, TArray)
            name = self._array_sort_name(aty)
            return f"(length_{name} {self.term(t.array, env)})"
        if isinstance(t, L.Match):
            return self._match(t, env, as_formula=False)
        if isinstance(t, L.Lambda):
            raise EncodeError("lambda survived into the encoder")
        raise AssertionError(f"encode: unknown term {t!r}")

    def _term_sort(self, t: L.Term) -> Type:
        from veriml.logic.subst import _term_type

        ty = _term_type(t)
        if ty is None:
            if isinstance(t, L.Arith):
                return INT
            if isinstance(t, L.ArrayLen):
                return INT
            raise EncodeError(f"cannot sort {t!r}")
        return ty

    def _match(self, m: L.Match, env: dict[str, str], as_formula: bool) -> str:
        """Compile a match to testers/selectors; the last branch is the
        unguarded default."""
        scrut = self.term(m.scrutinee, env)

        def branch(i: int) -> str:
            pat, body = m.branches[i]
            binds, cond = self._pattern(pat, scrut)
            env2 = dict(env)
            env2.update(binds)
            body_s = (
                self.formula(body, env2)  # type: ignore[arg-type]
                if as_formula or isinstance(body, L.Formula)
                else self.term(body, env2)  # type: ignore[arg-type]
            )
            if i == len(m.branches) - 1 or cond is None:
                return body_s
            return f"(ite {cond} {body_s} {branch(i + 1)})"

        return branch(0)

    def _pattern(
        self, pat: L.Pat, scrut: str
    ) -> tuple[dict[str, str], Optional[str]]:
        """Bindings (variable -> selector chain) and the tester condition;
        ``None`` condition means the pattern is irrefutable."""
        binds: dict[str, str] = {}
        conds: list[str] = []

        def walk(p: L.Pat, path: str) -> None:
            if isinstance(p, L.PatWild):
                return
            if isinstance(p, L.PatVar):
                binds[p.name] = path
                return
            if isinstance(p, L.PatTuple):
                assert isinstance(p.ty, TTuple)
                name = self._tuple_sort_name(p.ty)
                for i, sub in enumerate(p.items):
                    walk(sub, f"({name}_{i} {path})")
                return
            if isinstance(p, L.PatConstr):
                c = self.sym.get(p.name)
                adt = self.adts[p.ty.name]
                if len(adt.constructors) > 1:
                    conds.append(f"((_ is {c}) {path})")
                for i, sub in enumerate(p.args):
                    walk(sub, f"({c}_{i} {path})")
                return
            raise AssertionError

        walk(pat, scrut)
        if not conds:
            return binds, None
        cond = conds[0] if len(conds) == 1 else "(and " + " ".join(conds) + ")"
        return binds, cond

    def formula(self, f: L.Formula, env: dict[str, str]) -> str:
        if isinstance(f, L.FTrue):
            return "true"
        if isinstance(f, L.FFalse):
            return "false"
        if isinstance(f, L.PredApp):
            p = self.sym.get(f.name)
            if not f.args:
                return p
            return f"({p} " + " ".join(self.term(a, env) for a in f.args) + ")"
        if isinstance(f, L.Eq):
            return f"(= {self.term(f.left, env)} {self.term(f.right, env)})"
        if isinstance(f, L.Cmp):
            return f"({f.op} {self.term(f.left, env)} {self.term(f.right, env)})"
        if isinstance(f, L.Conn):
            op = {"and": "and", "or": "or", "implies": "=>", "iff": "="}[f.op]
            return f"({op} {self.formula(f.left, env)} {self.formula(f.right, env)})"
        if isinstance(f, L.Not):
            return f"(not {self.formula(f.arg, env)})"
        if isinstance(f, L.Quant):
            q = "forall" if f.quant == "forall" else "exists"
            env2 = dict(env)
            parts = []
            for n, t in f.binders:
                s = self._binder_name(n, env2)
                env2[n] = s
                parts.append(f"({s} {self.sort(t)})")
            return f"({q} ({' '.join(parts)}) {self.formula(f.body, env2)})"
        if isinstance(f, L.TermF):
            if isinstance(f.term, L.Match):
                return self._match(f.term, env, as_formula=True)
            return self.term(f.term, env)
        if isinstance(f, L.Tagged):
            raise EncodeError("obligation marker reached the encoder")
        raise AssertionError(f"encode: unknown formula {f!r}")

    def _binder_name(self, name: str, env: dict[str, str]) -> str:
        cand = "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in name) or "x"
        if cand[0].isdigit():
            cand = "x" + cand
        used = set(env.values()) | self.sym.used
        base = cand
        i = 2
        while cand in used:
            cand = f"{base}{i}"
            i += 1
        return cand

    # -- declarations ------------------------------------------------------------

    def _equations(self, d: D.FunDef) -> list[str]:
        """Guarded defining equations, one per branch of the definition."""
        env = {}
        binder_parts = []
        for n, t in d.params:
            s = self._binder_name(n, env)
            env[n] = s
            binder_parts.append(f"({s} {self.sort(t)})")
        fname = self.sym.get(d.name)
        args = " ".join(env[n] for n, _ in d.params)
        lhs = f"({fname} {args})" if args else fname

        out: list[str] = []

        def emit(binders: list[str], guard: Optional[str], lhs_s: str, rhs_s: str) -> None:
            eq = f"(= {lhs_s} {rhs_s})"
            if guard is not None:
                eq = f"(=> {guard} {eq})"
            if binders:
                eq = f"(forall ({' '.join(binders)}) {eq})"
            out.append(f"(assert {eq})")

        body = d.body
        # match on a parameter: constructor shapes move into the left-hand
        # side; requires pairwise disjoint patterns (first-match order would
        # otherwise make the equations lie)
        if isinstance(body, L.Match) and isinstance(body.scrutinee, L.Var) and \
                body.scrutinee.name in {n for n, _ in d.params} and \
                _disjoint_patterns([p for p, _ in body.branches]):
            pname = body.scrutinee.name
            from veriml.vcgen import _Names, _name_wildcards

            for pat, rhs in body.branches:
                named = _name_wildcards(pat, _Names({n for n, _ in d.params}))
                pvars = L.pat_vars(named)
                env2 = {}
                bparts = []
                for n, t in d.params:
                    if n == pname:
                        continue
                    s = self._binder_name(n, env2)
                    env2[n] = s
                    bparts.append(f"({s} {self.sort(t)})")
                for n, t in pvars:
                    s = self._binder_name(n, env2)
                    env2[n] = s
                    bparts.append(f"({s} {self.sort(t)})")
                pat_term = L.pat_to_term(named)
                lhs_args = " ".join(
                    self.term(pat_term, env2) if n == pname else env2[n]
                    for n, _ in d.params
                )
                lhs_s = f"({fname} {lhs_args})" if lhs_args else fname
                rhs_s = (
                    self.formula(rhs, env2)
                    if isinstance(rhs, L.Formula)
                    else self.term(rhs, env2)
                )
                emit(bparts, None, lhs_s, rhs_s)
            return out
        # if-then-else chains: one guarded equation per arm
        if isinstance(body, L.Ite):
            arms: list[tuple[list[str], L.Body]] = []
            guards: list[str] = []
            node: L.Body = body
            while isinstance(node, L.Ite):
                c = self.formula(node.cond, env)
                arms.append((guards + [c], node.then))
                guards = guards + [f"(not {c})"]
                node = node.els
            arms.append((guards, node))
            for gs, rhs in arms:
                guard = gs[0] if len(gs) == 1 else "(and " + " ".join(gs) + ")"
                rhs_s = (
                    self.formula(rhs, env)  # type: ignore[arg-type]
                    if isinstance(rhs, L.Formula)
                    else self.term(rhs, env)  # type: ignore[arg-type]
                )
                emit(binder_parts, guard, lhs, rhs_s)
            return out
        rhs_s = (
            self.formula(body, env)
            if isinstance(body, L.Formula)
            else self.term(body, env)
        )
        emit(binder_parts, None, lhs, rhs_s)
        return out

    def encode(self) -> SmtScript:
        self._declare_sorts()
        consts: dict[str, str] = {}
        for d in self.task.decls:
            if isinstance(d, (D.SortDecl, D.AdtDecl)):
                continue  # already declared
            if isinstance(d, D.ConstDecl):
                s = self.sym.get(d.name)
                consts[d.name] = s
                self.commands.append(f"(declare-const {s} {self.sort(d.ty)})")
            elif isinstance(d, D.FunDecl):
                s = self.sym.get(d.name)
                res = "Bool" if d.result is None else self.sort(d.result)
                ps = " ".join(self.sort(p) for p in d.params)
                self.commands.append(f"(declare-fun {s} ({ps}) {res})")
            elif isinstance(d, D.FunDef):
                s = self.sym.get(d.name)
                res = "Bool" if d.result is None else self.sort(d.result)
                ps = " ".join(self.sort(t) for _, t in d.params)
                self.commands.append(f"(declare-fun {s} ({ps}) {res})")
                self.commands.extend(self._equations(d))
            elif isinstance(d, (D.AxiomDecl, D.LemmaDecl)):
                self.commands.append(f"(assert {self.formula(d.formula, dict(consts))})")
        for name, hyp in self.task.hyps:
            self.commands.append(f"(assert {self.formula(hyp, dict(consts))})")
        self.commands.append(f"(assert (not {self.formula(self.task.goal, dict(consts))}))")
        self.commands.append("(check-sat)")
        return SmtScript("ALL", tuple(self.commands))


def _patterns_overlap(a: L.Pat, b: L.Pat) -> bool:
    if isinstance(a, (L.PatWild, L.PatVar)) or isinstance(b, (L.PatWild, L.PatVar)):
        return True
    if isinstance(a, L.PatConstr) and isinstance(b, L.PatConstr):
        if a.name != b.name:
            return False
        return all(_patterns_overlap(x, y) for x, y in zip(a.args, b.args))
    if isinstance(a, L.PatTuple) and isinstance(b, L.PatTuple):
        return all(_patterns_overlap(x, y) for x, y in zip(a.items, b.items))
    return False


def _disjoint_patterns(pats: list[L.Pat]) -> bool:
    for i, a in enumerate(pats):
        for b in pats[i + 1:]:
            if _patterns_overlap(a, b):
                return False
    return True


def encode_task(task: D.Task) -> SmtScript:
    """Encode a monomorphic, defunctionalized task; deterministic."""
    return Encoder(task).encode()
