"""Pretty printer; ``parse(pretty_print(p))`` equals ``p`` up to spans."""
from __future__ import annotations

from veriml.frontend import ast as A
from veriml.types import type_str

# precedence levels mirror the parser; higher binds tighter
_PREFIX = 0  # quantifier / fun / if / match / let / try / raise bodies
_IFF, _IMPL, _OR, _AND, _NOT, _CMP, _CONS, _ADD, _MUL, _UNARY, _APP, _ATOM = range(1, 13)


def _wrap(s: str, have: int, need: int) -> str:
    return f"({s})" if have < need else s


# ---------------------------------------------------------------------------
# Logic expressions
# ---------------------------------------------------------------------------


def lexpr_str(e: A.LExpr, need: int = _PREFIX) -> str:
    s, have = _lexpr(e)
    return _wrap(s, have, need)


def _lexpr(e: A.LExpr) -> tuple[str, int]:
    if isinstance(e, A.LInt):
        return (str(e.value), _ATOM if e.value >= 0 else _UNARY)
    if isinstance(e, A.LBool):
        return ("true" if e.value else "false", _ATOM)
    if isinstance(e, A.LUnit):
        return ("()", _ATOM)
    if isinstance(e, A.LVar):
        return (e.name, _ATOM)
    if isinstance(e, A.LDeref):
        return (f"!{e.name}", _ATOM)
    if isinstance(e, A.LArrayRead):
        return (f"{lexpr_str(e.array, _ATOM)}.({lexpr_str(e.index)})", _ATOM)
    if isinstance(e, A.LTuple):
        return ("(" + ", ".join(lexpr_str(i) for i in e.items) + ")", _ATOM)
    if isinstance(e, A.LApp):
        if e.name == "[]":
            return ("[]", _ATOM)
        if e.name == "::" and len(e.args) == 2:
            l = lexpr_str(e.args[0], _CONS + 1)
            r = lexpr_str(e.args[1], _CONS)
            return (f"{l} :: {r}", _CONS)
        if e.name == "++" and len(e.args) == 2:
            l = lexpr_str(e.args[0], _CONS + 1)
            r = lexpr_str(e.args[1], _CONS)
            return (f"{l} ++ {r}", _CONS)
        if not e.args:
            return (e.name, _ATOM)
        args = " ".join(lexpr_str(a, _ATOM) for a in e.args)
        return (f"{e.name} {args}", _APP)
    if isinstance(e, A.LBinop):
        lev = {"+": _ADD, "-": _ADD, "*": _MUL}.get(e.op, _CMP)
        l = lexpr_str(e.left, lev)
        r = lexpr_str(e.right, lev + 1)
        return (f"{l} {e.op} {r}", lev)
    if isinstance(e, A.LNeg):
        return (f"- {lexpr_str(e.arg, _UNARY)}", _UNARY)
    if isinstance(e, A.LNot):
        return (f"not {lexpr_str(e.arg, _NOT)}", _NOT)
    if isinstance(e, A.LConn):
        if e.op == "and":
            return (f"{lexpr_str(e.left, _AND)} /\\ {lexpr_str(e.right, _AND + 1)}", _AND)
        if e.op == "or":
            return (f"{lexpr_str(e.left, _OR)} \\/ {lexpr_str(e.right, _OR + 1)}", _OR)
        if e.op == "implies":
            return (f"{lexpr_str(e.left, _IMPL + 1)} -> {lexpr_str(e.right, _IMPL)}", _IMPL)
        return (f"{lexpr_str(e.left, _IFF + 1)} <-> {lexpr_str(e.right, _IFF)}", _IFF)
    if isinstance(e, A.LQuant):
        groups = []
        for name, ty in e.binders:
            if ty is None:
                groups.append(name)
            else:
                groups.append(f"{name} : {_btype(ty)}")
        return (f"{e.quant} {', '.join(groups)}. {lexpr_str(e.body)}", _PREFIX)
    if isinstance(e, A.LLambda):
        ps = " ".join(
            n if ty is None else f"({n} : {type_str(ty)})" for n, ty in e.params
        )
        return (f"fun {ps} -> {lexpr_str(e.body)}", _PREFIX)
    if isinstance(e, A.LIf):
        return (
            f"if {lexpr_str(e.cond)} then {lexpr_str(e.then)} else {lexpr_str(e.els)}",
            _PREFIX,
        )
    if isinstance(e, A.LMatch):
        arms = " | ".join(
            f"{pattern_str(p)} -> {lexpr_str(b)}" for p, b in e.branches
        )
        return (f"match {lexpr_str(e.scrutinee, _IFF)} with {arms}", _PREFIX)
    raise AssertionError(f"unknown logic node {e!r}")


def _btype(ty) -> str:
    from veriml.types import TArrow

    s = type_str(ty)
    return f"({s})" if isinstance(ty, TArrow) else s


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------


def pattern_str(p: A.Pattern, nested: bool = False) -> str:
    if isinstance(p, A.PWild):
        return "_"
    if isinstance(p, A.PVar):
        return p.name
    if isinstance(p, A.PConstr):
        if p.name == "[]":
            return "[]"
        if p.name == "::":
            s = f"{pattern_str(p.args[0], True)} :: {pattern_str(p.args[1], False)}"
            return f"({s})" if nested else s
        if not p.args:
            return p.name
        if len(p.args) == 1 and not isinstance(p.args[0], A.PTuple):
            inner = pattern_str(p.args[0], True)
            return f"{p.name} {inner}"
        inner = ", ".join(pattern_str(a) for a in p.args)
        return f"{p.name} ({inner})"
    if isinstance(p, A.PTuple):
        s = ", ".join(pattern_str(i, True) for i in p.items)
        return f"({s})" if nested else s
    if isinstance(p, A.POr):
        s = " | ".join(pattern_str(a) for a in p.alts)
        return f"({s})" if nested else s
    raise AssertionError(f"unknown pattern {p!r}")


# ---------------------------------------------------------------------------
# Program expressions
# ---------------------------------------------------------------------------

_SEQ = 0
_STMT = 1


def expr_str(e: A.Expr, need: int = _SEQ) -> str:
    s, have = _expr(e)
    return _wrap(s, have, need)


def _expr(e: A.Expr) -> tuple[str, int]:
    if isinstance(e, A.EInt):
        return (str(e.value), _ATOM if e.value >= 0 else _UNARY)
    if isinstance(e, A.EBool):
        return ("true" if e.value else "false", _ATOM)
    if isinstance(e, A.EUnit):
        return ("()", _ATOM)
    if isinstance(e, A.EVar):
        return (e.name, _ATOM)
    if isinstance(e, A.EDeref):
        return (f"!{e.name}", _ATOM)
    if isinstance(e, A.ETuple):
        return ("(" + ", ".join(expr_str(i, _STMT) for i in e.items) + ")", _ATOM)
    if isinstance(e, A.EArrayRead):
        return (f"{expr_str(e.array, _ATOM)}.({expr_str(e.index, _STMT)})", _ATOM)
    if isinstance(e, A.EArrayLength):
        return (f"Array.length {expr_str(e.array, _ATOM)}", _APP)
    if isinstance(e, A.EConstr):
        if e.name == "[]":
            return ("[]", _ATOM)
        if e.name == "::":
            l = expr_str(e.args[0], _CONS + 1)
            r = expr_str(e.args[1], _CONS)
            return (f"{l} :: {r}", _CONS)
        if not e.args:
            return (e.name, _ATOM)
        if len(e.args) == 1 and not isinstance(e.args[0], A.ETuple):
            return (f"{e.name} {expr_str(e.args[0], _ATOM)}", _APP)
        inner = ", ".join(expr_str(a, _STMT) for a in e.args)
        return (f"{e.name} ({inner})", _APP)
    if isinstance(e, A.EApp):
        args = " ".join(expr_str(a, _ATOM) for a in e.args)
        return (f"{e.fn} {args}", _APP)
    if isinstance(e, A.ERef):
        return (f"ref {expr_str(e.init, _ATOM)}", _APP)
    if isinstance(e, A.EIncr):
        return (f"incr {e.name}", _APP)
    if isinstance(e, A.EDecr):
        return (f"decr {e.name}", _APP)
    if isinstance(e, A.EBinop):
        lev = {"+": _ADD, "-": _ADD, "*": _MUL}.get(e.op, _CMP)
        extra = 1 if e.op in ("+", "-", "*") else 1
        return (f"{expr_str(e.left, lev)} {e.op} {expr_str(e.right, lev + extra)}", lev)
    if isinstance(e, A.EAnd):
        return (f"{expr_str(e.left, _AND)} && {expr_str(e.right, _AND + 1)}", _AND)
    if isinstance(e, A.EOr):
        return (f"{expr_str(e.left, _OR)} || {expr_str(e.right, _OR + 1)}", _OR)
    if isinstance(e, A.ENot):
        return (f"not {expr_str(e.arg, _APP)}", _APP)
    if isinstance(e, A.EAssign):
        return (f"{e.name} := {expr_str(e.value, _STMT)}", _STMT)
    if isinstance(e, A.ESeq):
        return (f"{expr_str(e.first, _STMT)};\n{expr_str(e.second, _SEQ)}", _SEQ)
    if isinstance(e, A.ELet):
        return (
            f"let {e.name} = {expr_str(e.value, _STMT)} in\n{expr_str(e.body, _SEQ)}",
            _STMT,
        )
    if isinstance(e, A.ELetException):
        of = f" of {type_str(e.payload)}" if e.payload is not None else ""
        return (f"let exception {e.name}{of} in\n{expr_str(e.body, _SEQ)}", _STMT)
    if isinstance(e, A.EIf):
        s = f"if {expr_str(e.cond, _OR)} then {expr_str(e.then, _STMT)}"
        if e.els is not None:
            s += f" else {expr_str(e.els, _STMT)}"
        return (s, _STMT)
    if isinstance(e, A.EMatch):
        arms = "\n".join(
            f"  | {pattern_str(p)} -> {expr_str(b, _STMT)}" for p, b in e.branches
        )
        return (f"match {expr_str(e.scrutinee, _OR)} with\n{arms}", _STMT)
    if isinstance(e, A.EFor):
        inv = ""
        if e.invariants:
            clauses = "\n      ".join(
                f"invariant {lexpr_str(f)}" for f in e.invariants
            )
            inv = f"  (*@ {clauses} *)\n"
        body = expr_str(e.body, _SEQ)
        return (
            f"for {e.var} = {expr_str(e.lo, _OR)} to {expr_str(e.hi, _OR)} do\n"
            f"{inv}{body}\ndone",
            _STMT,
        )
    if isinstance(e, A.ERaise):
        if e.payload is None:
            return (f"raise {e.exc}", _STMT)
        return (f"raise ({e.exc} {expr_str(e.payload, _ATOM)})", _STMT)
    if isinstance(e, A.ETry):
        handlers = " | ".join(
            f"{exc}{' ' + pattern_str(p, True) if p is not None else ''} -> "
            f"{expr_str(h, _STMT)}"
            for exc, p, h in e.handlers
        )
        return (f"try {expr_str(e.body, _SEQ)}\nwith {handlers}", _STMT)
    raise AssertionError(f"unknown expr node {e!r}")


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


def contract_str(c: A.Contract) -> str:
    header = f"{c.result} = " if c.result else ""
    header += c.fn_name
    if c.args:
        header += " " + " ".join(c.args)
    lines = [header]
    for f in c.requires:
        lines.append(f"requires {lexpr_str(f)}")
    for f in c.ensures:
        lines.append(f"ensures {lexpr_str(f)}")
    for r in c.raises:
        payload = f" {r.payload}" if r.payload else ""
        lines.append(f"raises {r.exc}{payload} -> {lexpr_str(r.formula)}")
    if c.variants:
        lines.append("variant " + ", ".join(lexpr_str(v) for v in c.variants))
    body = "\n      ".join(lines)
    return f"(*@ {body} *)"


def _logic_params_str(params) -> str:
    return " ".join(f"({n} : {type_str(t)})" for n, t in params)


def decl_str(d: A.Decl) -> str:
    if isinstance(d, A.AbstractType):
        return f"type {d.name}"
    if isinstance(d, A.AdtDef):
        parts = []
        for cname, args in d.constructors:
            if args:
                parts.append(f"{cname} of " + " * ".join(type_str(t) for t in args))
            else:
                parts.append(cname)
        return f"type {d.name} = " + " | ".join(parts)
    if isinstance(d, A.TypeAlias):
        return f"type {d.name} = {type_str(d.body)}"
    if isinstance(d, A.AbstractVal):
        s = f"val {d.name} : {type_str(d.type)}"
        if d.contract is not None:
            s += "\n" + contract_str(d.contract)
        return s
    if isinstance(d, A.LetFun):
        rec = "rec " if d.rec else ""
        params = " ".join(
            n if t is None else f"({n} : {type_str(t)})" for n, t in d.params
        )
        s = f"let {rec}{d.name} {params} =\n  {expr_str(d.body)}"
        if d.contract is not None:
            s += "\n" + contract_str(d.contract)
        return s
    if isinstance(d, (A.LogicFun, A.LogicPred)):
        kw = "function" if isinstance(d, A.LogicFun) else "predicate"
        rec = "rec " if d.rec else ""
        params = _logic_params_str(d.params)
        s = f"(*@ {kw} {rec}{d.name}"
        if params:
            s += f" {params}"
        if isinstance(d, A.LogicFun):
            s += f" : {type_str(d.result)}"
        if d.body is not None:
            s += f" =\n      {lexpr_str(d.body)}"
        if d.variants:
            s += "\n      variant " + ", ".join(lexpr_str(v) for v in d.variants)
        return s + " *)"
    if isinstance(d, A.Lemma):
        return f"(*@ lemma {d.name} :\n      {lexpr_str(d.formula)} *)"
    if isinstance(d, A.Axiom):
        return f"(*@ axiom {d.name} : {lexpr_str(d.formula)} *)"
    raise AssertionError(f"unknown decl {d!r}")


def pretty_print(program: A.SurfaceProgram) -> str:
    if not program.decls:
        return ""
    return "\n\n".join(decl_str(d) for d in program.decls) + "\n"
