"""Human-readable task rendering: constants, hypotheses, a dashed line,
then the goal.  Line-oriented, deterministic and newline-stable."""
from __future__ import annotations

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import type_str

DASHES = "-" * 40

# precedence levels, higher binds tighter (mirrors the surface grammar)
_PREFIX = 0
_IFF, _IMPL, _OR, _AND, _NOT, _CMP, _CONS, _ADD, _MUL, _UNARY, _APP, _ATOM = range(1, 13)


def _wrap(s: str, have: int, need: int) -> str:
    return f"({s})" if have < need else s


def term_str(t: L.Term, need: int = _PREFIX) -> str:
    s, have = _term(t)
    return _wrap(s, have, need)


def _args_str(args) -> str:
    return " ".join(term_str(a, _ATOM) for a in args)


def _term(t: L.Term) -> tuple[str, int]:
    if isinstance(t, L.Var):
        return (t.name, _ATOM)
    if isinstance(t, L.IntConst):
        return (str(t.value), _ATOM if t.value >= 0 else _UNARY)
    if isinstance(t, L.BoolConst):
        return ("true" if t.value else "false", _ATOM)
    if isinstance(t, L.UnitConst):
        return ("()", _ATOM)
    if isinstance(t, L.Arith):
        lev = _MUL if t.op == "*" else _ADD
        return (f"{term_str(t.left, lev)} {t.op} {term_str(t.right, lev + 1)}", lev)
    if isinstance(t, L.App):
        if t.name == "++":
            return (
                f"{term_str(t.args[0], _CONS + 1)} ++ {term_str(t.args[1], _CONS)}",
                _CONS,
            )
        if not t.args:
            return (t.name, _ATOM)
        return (f"{t.name} {_args_str(t.args)}", _APP)
    if isinstance(t, L.Constr):
        if t.name == "[]":
            return ("[]", _ATOM)
        if t.name == "::":
            return (
                f"{term_str(t.args[0], _CONS + 1)} :: {term_str(t.args[1], _CONS)}",
                _CONS,
            )
        if not t.args:
            return (t.name, _ATOM)
        if len(t.args) == 1:
            return (f"{t.name} {term_str(t.args[0], _ATOM)}", _APP)
        inner = ", ".join(term_str(a) for a in t.args)
        return (f"{t.name} ({inner})", _APP)
    if isinstance(t, L.TupleT):
        return ("(" + ", ".join(term_str(i) for i in t.items) + ")", _ATOM)
    if isinstance(t, L.Ite):
        return (
            f"if {formula_str(t.cond)} then {term_str(t.then)} else {term_str(t.els)}",
            _PREFIX,
        )
    if isinstance(t, L.ArrayRead):
        return (f"{term_str(t.array, _ATOM)}.({term_str(t.index)})", _ATOM)
    if isinstance(t, L.ArrayLen):
        return (f"Array.length {term_str(t.array, _ATOM)}", _APP)
    if isinstance(t, L.Lambda):
        ps = " ".join(n for n, _ in t.params)
        return (f"fun {ps} -> {_body_str(t.body)}", _PREFIX)
    if isinstance(t, L.Match):
        arms = " | ".join(
            f"{pat_str(p)} -> {_body_str(b)}" for p, b in t.branches
        )
        return (f"match {term_str(t.scrutinee, _IFF)} with {arms}", _PREFIX)
    raise AssertionError(f"render: unknown term {t!r}")


def _body_str(b: L.Body) -> str:
    return formula_str(b) if isinstance(b, L.Formula) else term_str(b)


def pat_str(p: L.Pat, nested: bool = False) -> str:
    if isinstance(p, L.PatWild):
        return "_"
    if isinstance(p, L.PatVar):
        return p.name
    if isinstance(p, L.PatConstr):
        if p.name == "[]":
            return "[]"
        if p.name == "::":
            s = f"{pat_str(p.args[0], True)} :: {pat_str(p.args[1])}"
            return f"({s})" if nested else s
        if not p.args:
            return p.name
        inner = ", ".join(pat_str(a) for a in p.args)
        return f"{p.name} ({inner})"
    if isinstance(p, L.PatTuple):
        s = ", ".join(pat_str(i, True) for i in p.items)
        return f"({s})" if nested else s
    raise AssertionError(f"render: unknown pattern {p!r}")


def formula_str(f: L.Formula, need: int = _PREFIX) -> str:
    s, have = _formula(f)
    return _wrap(s, have, need)


def _formula(f: L.Formula) -> tuple[str, int]:
    if isinstance(f, L.FTrue):
        return ("true", _ATOM)
    if isinstance(f, L.FFalse):
        return ("false", _ATOM)
    if isinstance(f, L.PredApp):
        if not f.args:
            return (f.name, _ATOM)
        return (f"{f.name} {_args_str(f.args)}", _APP)
    if isinstance(f, L.Eq):
        return (f"{term_str(f.left, _CONS)} = {term_str(f.right, _CONS)}", _CMP)
    if isinstance(f, L.Cmp):
        return (f"{term_str(f.left, _CONS)} {f.op} {term_str(f.right, _CONS)}", _CMP)
    if isinstance(f, L.Not):
        if isinstance(f.arg, L.Eq):
            eq = f.arg
            return (
                f"{term_str(eq.left, _CONS)} <> {term_str(eq.right, _CONS)}",
                _CMP,
            )
        return (f"not {formula_str(f.arg, _NOT)}", _NOT)
    if isinstance(f, L.Conn):
        if f.op == "and":
            return (f"{formula_str(f.left, _AND)} /\\ {formula_str(f.right, _AND + 1)}", _AND)
        if f.op == "or":
            return (f"{formula_str(f.left, _OR)} \\/ {formula_str(f.right, _OR + 1)}", _OR)
        if f.op == "implies":
            return (f"{formula_str(f.left, _IMPL + 1)} -> {formula_str(f.right, _IMPL)}", _IMPL)
        return (f"{formula_str(f.left, _IFF + 1)} <-> {formula_str(f.right, _IFF)}", _IFF)
    if isinstance(f, L.Quant):
        groups = ", ".join(f"{n} : {type_str(t)}" for n, t in f.binders)
        return (f"{f.quant} {groups}. {formula_str(f.body)}", _PREFIX)
    if isinstance(f, L.TermF):
        return _term(f.term)
    if isinstance(f, L.Tagged):
        return _formula(f.formula)
    raise AssertionError(f"render: unknown formula {f!r}")


def render_task(task: D.Task) -> str:
    """Constants and hypotheses above a dashed line, the goal below it."""
    lines: list[str] = []
    for d in task.decls:
        if isinstance(d, D.ConstDecl):
            lines.append(f"constant {d.name} : {type_str(d.ty)}")
    for name, hyp in task.hyps:
        lines.append(f"{name}: {formula_str(hyp)}")
    lines.append(DASHES)
    lines.append(f"goal: {formula_str(task.goal)}")
    return "\n".join(lines) + "\n"
