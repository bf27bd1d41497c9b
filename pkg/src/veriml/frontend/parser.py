"""Recursive-descent parser for the surface language and its annotations.

Programs are a small ML subset; specifications live inside ``(*@ ... *)``
comments.  An annotation immediately following a ``let``/``val`` definition
is parsed as its contract; a bare annotation at top level declares a logical
function, predicate, lemma or axiom; an annotation at the head of a for-loop
body carries the loop invariants.
"""
from __future__ import annotations

from typing import Optional

from veriml.frontend import ast as A
from veriml.frontend.lexer import LexError, Token, tokenize
from veriml.types import (
    INT,
    BOOL,
    UNIT,
    TAdt,
    TArray,
    TArrow,
    TRef,
    TTuple,
    Type,
)


class ParseError(Exception):
    def __init__(self, message: str, span: A.Span, expected: Optional[set[str]] = None):
        detail = f"{message} at offset {span[0]}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.message = message
        self.span = span
        self.expected = expected or set()


PROGRAM_KEYWORDS = {
    "let", "rec", "in", "if", "then", "else", "match", "with", "for", "to",
    "do", "done", "try", "raise", "exception", "begin", "end", "type", "val",
    "of", "true", "false", "not", "incr", "decr", "ref", "and", "fun",
    "module", "sig", "struct", "functor", "mutable", "while", "function",
}

CLAUSE_KEYWORDS = {"requires", "ensures", "raises", "variant", "invariant"}

ANNOT_KEYWORDS = CLAUSE_KEYWORDS | {
    "function", "predicate", "lemma", "axiom", "forall", "exists", "fun",
    "if", "then", "else", "match", "with", "not", "true", "false", "rec",
    "let", "in", "old",
}


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.value in ops

    def at_word(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.value in words

    def eat_op(self, op: str) -> Token:
        t = self.peek()
        if t.kind == "op" and t.value == op:
            return self.next()
        raise ParseError(f"expected {op!r}, found {t.value!r}", t.span, {op})

    def eat_word(self, word: str) -> Token:
        t = self.peek()
        if t.kind == "ident" and t.value == word:
            return self.next()
        raise ParseError(f"expected {word!r}, found {t.value!r}", t.span, {word})

    def eat_ident(self) -> Token:
        t = self.peek()
        if t.kind == "ident" and t.value not in PROGRAM_KEYWORDS:
            return self.next()
        raise ParseError(f"expected identifier, found {t.value!r}", t.span)

    def eat_uident(self) -> Token:
        t = self.peek()
        if t.kind == "uident":
            return self.next()
        raise ParseError(f"expected capitalized name, found {t.value!r}", t.span)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

_BASE_TYPES = {"int": INT, "integer": INT, "bool": BOOL, "unit": UNIT}


class TypeParser:
    """Type syntax; ``aliases`` maps known alias/abstract/ADT names so the
    parser can build the right node.  Unknown names become ``TAdt`` heads and
    are validated during type checking."""

    def __init__(self, ts: TokenStream):
        self.ts = ts

    def parse(self) -> Type:
        return self._arrow()

    def _arrow(self) -> Type:
        left = self._tuple()
        if self.ts.at_op("->"):
            self.ts.next()
            right = self._arrow()
            return TArrow((left,), right)
        return left

    def _tuple(self) -> Type:
        items = [self._postfix()]
        while self.ts.at_op("*"):
            self.ts.next()
            items.append(self._postfix())
        return items[0] if len(items) == 1 else TTuple(tuple(items))

    def _postfix(self) -> Type:
        t = self._atom()
        while True:
            tok = self.ts.peek()
            if tok.kind == "ident" and tok.value in ("list", "array", "ref"):
                self.ts.next()
                if tok.value == "list":
                    t = TAdt("list", (t,))
                elif tok.value == "array":
                    t = TArray(t)
                else:
                    t = TRef(t)
            elif tok.kind == "ident" and tok.value not in PROGRAM_KEYWORDS \
                    and tok.value not in ANNOT_KEYWORDS and isinstance(t, TTuple):
                # parameterized user types are out of the subset
                raise ParseError(f"unsupported parameterized type {tok.value!r}", tok.span)
            else:
                return t

    def _atom(self) -> Type:
        tok = self.ts.peek()
        if tok.kind == "ident" and tok.value in _BASE_TYPES:
            self.ts.next()
            return _BASE_TYPES[tok.value]
        if tok.kind == "ident" and tok.value not in PROGRAM_KEYWORDS:
            self.ts.next()
            return TAdt(tok.value, ())
        if tok.kind == "tyvar":
            raise ParseError("type variables are not supported here", tok.span)
        if self.ts.at_op("("):
            self.ts.next()
            t = self.parse()
            self.ts.eat_op(")")
            return t
        raise ParseError(f"expected a type, found {tok.value!r}", tok.span)


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------


class PatternParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    def parse(self) -> A.Pattern:
        alts = [self._tuple()]
        while self.ts.at_op("|"):
            self.ts.next()
            alts.append(self._tuple())
        if len(alts) == 1:
            return alts[0]
        return A.POr(alts, span=(alts[0].span[0], alts[-1].span[1]))

    def _tuple(self) -> A.Pattern:
        start = self.ts.peek().span
        items = [self._cons()]
        while self.ts.at_op(","):
            self.ts.next()
            items.append(self._cons())
        if len(items) == 1:
            return items[0]
        return A.PTuple(items, span=(start[0], items[-1].span[1]))

    def _cons(self) -> A.Pattern:
        head = self._atom()
        if self.ts.at_op("::"):
            self.ts.next()
            tail = self._cons()
            return A.PConstr("::", [head, tail], span=(head.span[0], tail.span[1]))
        return head

    def _atom(self) -> A.Pattern:
        tok = self.ts.peek()
        if tok.kind == "ident" and tok.value == "_":
            self.ts.next()
            return A.PWild(span=tok.span)
        if tok.kind == "ident" and tok.value not in PROGRAM_KEYWORDS:
            self.ts.next()
            return A.PVar(tok.value, span=tok.span)
        if tok.kind == "uident":
            self.ts.next()
            args: list[A.Pattern] = []
            nxt = self.ts.peek()
            if nxt.kind == "op" and nxt.value == "(":
                self.ts.next()
                inner = self.parse()
                self.ts.eat_op(")")
                if isinstance(inner, A.PTuple):
                    args = inner.items
                else:
                    args = [inner]
            elif nxt.kind == "ident" and nxt.value not in PROGRAM_KEYWORDS and nxt.value != "_":
                self.ts.next()
                args = [A.PVar(nxt.value, span=nxt.span)]
            elif nxt.kind == "ident" and nxt.value == "_":
                self.ts.next()
                args = [A.PWild(span=nxt.span)]
            end = args[-1].span[1] if args else tok.span[1]
            return A.PConstr(tok.value, args, span=(tok.span[0], end))
        if self.ts.at_op("["):
            self.ts.next()
            close = self.ts.eat_op("]")
            return A.PConstr("[]", [], span=(tok.span[0], close.span[1]))
        if self.ts.at_op("("):
            self.ts.next()
            if self.ts.at_op(")"):
                close = self.ts.next()
                return A.PConstr("()", [], span=(tok.span[0], close.span[1]))
            inner = self.parse()
            self.ts.eat_op(")")
            return inner
        raise ParseError(f"expected a pattern, found {tok.value!r}", tok.span)


# ---------------------------------------------------------------------------
# Annotation formulas
# ---------------------------------------------------------------------------

_CMP_OPS = ("=", "<>", "<", "<=", ">", ">=")


class FormulaParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    def parse(self) -> A.LExpr:
        tok = self.ts.peek()
        if tok.kind == "ident" and tok.value in ("forall", "exists"):
            return self._quant()
        if tok.kind == "ident" and tok.value == "fun":
            return self._lambda()
        if tok.kind == "ident" and tok.value == "if":
            return self._if()
        if tok.kind == "ident" and tok.value == "match":
            return self._match()
        return self._iff()

    def _quant(self) -> A.LExpr:
        tok = self.ts.next()
        binders: list[tuple[str, Optional[Type]]] = []
        while True:
            group: list[str] = []
            while self.ts.peek().kind == "ident" and self.ts.peek().value not in ANNOT_KEYWORDS:
                group.append(self.ts.next().value)
            if not group:
                raise ParseError("expected quantified variable", self.ts.peek().span)
            ty: Optional[Type] = None
            if self.ts.at_op(":"):
                self.ts.next()
                ty = TypeParser(self.ts).parse()
            binders.extend((name, ty) for name in group)
            if self.ts.at_op(","):
                self.ts.next()
                continue
            break
        self.ts.eat_op(".")
        body = self.parse()
        return A.LQuant(tok.value, binders, body, span=(tok.span[0], _lspan(body)[1]))

    def _lambda(self) -> A.LExpr:
        tok = self.ts.next()
        params: list[tuple[str, Optional[Type]]] = []
        while True:
            p = self.ts.peek()
            if p.kind == "ident" and p.value not in ANNOT_KEYWORDS:
                self.ts.next()
                params.append((p.value, None))
            elif p.kind == "op" and p.value == "(":
                self.ts.next()
                names = [self.ts.eat_ident().value]
                while self.ts.peek().kind == "ident" and self.ts.peek().value not in ANNOT_KEYWORDS:
                    names.append(self.ts.next().value)
                self.ts.eat_op(":")
                ty = TypeParser(self.ts).parse()
                self.ts.eat_op(")")
                params.extend((n, ty) for n in names)
            else:
                break
        if not params:
            raise ParseError("lambda needs at least one parameter", tok.span)
        self.ts.eat_op("->")
        body = self.parse()
        return A.LLambda(params, body, span=(tok.span[0], _lspan(body)[1]))

    def _if(self) -> A.LExpr:
        tok = self.ts.next()
        cond = self.parse()
        self.ts.eat_word("then")
        then = self.parse()
        self.ts.eat_word("else")
        els = self.parse()
        return A.LIf(cond, then, els, span=(tok.span[0], _lspan(els)[1]))

    def _match(self) -> A.LExpr:
        tok = self.ts.next()
        scrut = self._iff()
        self.ts.eat_word("with")
        if self.ts.at_op("|"):
            self.ts.next()
        branches: list[tuple[A.Pattern, A.LExpr]] = []
        while True:
            pat = PatternParser(self.ts).parse()
            self.ts.eat_op("->")
            body = self.parse()
            branches.append((pat, body))
            if self.ts.at_op("|"):
                self.ts.next()
                continue
            break
        return A.LMatch(scrut, branches, span=(tok.span[0], _lspan(branches[-1][1])[1]))

    def _iff(self) -> A.LExpr:
        left = self._impl()
        if self.ts.at_op("<->"):
            self.ts.next()
            right = self.parse()
            return A.LConn("iff", left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _impl(self) -> A.LExpr:
        left = self._or()
        if self.ts.at_op("->"):
            self.ts.next()
            right = self.parse()
            if isinstance(right, A.LConn) and right.op == "iff":
                raise ParseError("parenthesize '<->' under '->'", right.span)
            return A.LConn("implies", left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _or(self) -> A.LExpr:
        left = self._and()
        while self.ts.at_op("\\/", "||"):
            self.ts.next()
            right = self._and()
            left = A.LConn("or", left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _and(self) -> A.LExpr:
        left = self._not()
        while self.ts.at_op("/\\", "&&"):
            self.ts.next()
            right = self._not()
            left = A.LConn("and", left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _not(self) -> A.LExpr:
        tok = self.ts.peek()
        if tok.kind == "ident" and tok.value == "not":
            self.ts.next()
            arg = self._not()
            return A.LNot(arg, span=(tok.span[0], _lspan(arg)[1]))
        return self._cmp()

    def _cmp(self) -> A.LExpr:
        first = self._cons()
        links: list[tuple[str, A.LExpr]] = []
        while self.ts.at_op(*_CMP_OPS):
            op = self.ts.next().value
            rhs = self._cons()
            links.append((op, rhs))
        if not links:
            return first
        # chained comparisons become a conjunction: a <= b < c
        conj: Optional[A.LExpr] = None
        lhs = first
        for op, rhs in links:
            leg = A.LBinop(op, lhs, rhs, span=(_lspan(lhs)[0], _lspan(rhs)[1]))
            conj = leg if conj is None else A.LConn(
                "and", conj, leg, span=(_lspan(conj)[0], _lspan(leg)[1])
            )
            lhs = rhs
        return conj  # type: ignore[return-value]

    def _cons(self) -> A.LExpr:
        left = self._add()
        if self.ts.at_op("::"):
            self.ts.next()
            right = self._cons()
            return A.LApp("::", [left, right], span=(_lspan(left)[0], _lspan(right)[1]))
        if self.ts.at_op("@", "++"):
            self.ts.next()
            right = self._cons()
            return A.LApp("++", [left, right], span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _add(self) -> A.LExpr:
        left = self._mul()
        while self.ts.at_op("+", "-"):
            op = self.ts.next().value
            right = self._mul()
            left = A.LBinop(op, left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _mul(self) -> A.LExpr:
        left = self._unary()
        while self.ts.at_op("*"):
            self.ts.next()
            right = self._unary()
            left = A.LBinop("*", left, right, span=(_lspan(left)[0], _lspan(right)[1]))
        return left

    def _unary(self) -> A.LExpr:
        tok = self.ts.peek()
        if tok.kind == "op" and tok.value == "-":
            self.ts.next()
            arg = self._unary()
            return A.LNeg(arg, span=(tok.span[0], _lspan(arg)[1]))
        return self._app()

    def _app(self) -> A.LExpr:
        head = self._postfix()
        args: list[A.LExpr] = []
        while self._at_atom_start():
            args.append(self._postfix())
        if not args:
            return head
        if isinstance(head, A.LVar):
            return A.LApp(head.name, args, span=(head.span[0], _lspan(args[-1])[1]))
        if isinstance(head, A.LApp) and not head.args:
            return A.LApp(head.name, args, span=(head.span[0], _lspan(args[-1])[1]))
        raise ParseError("only named symbols can be applied", _lspan(head))

    def _at_atom_start(self) -> bool:
        tok = self.ts.peek()
        if tok.kind == "int":
            return True
        if tok.kind == "ident":
            return tok.value not in ANNOT_KEYWORDS
        if tok.kind == "uident":
            return True
        if tok.kind == "op":
            if tok.value == "(":
                return True
            if tok.value == "[":
                return self.ts.peek(1).kind == "op" and self.ts.peek(1).value == "]"
            if tok.value == "!":
                return self.ts.peek(1).kind == "ident"
        return False

    def _postfix(self) -> A.LExpr:
        e = self._atom()
        while self.ts.at_op(".") and self.ts.peek(1).kind == "op" and self.ts.peek(1).value == "(":
            self.ts.next()
            self.ts.next()
            idx = self.parse()
            close = self.ts.eat_op(")")
            e = A.LArrayRead(e, idx, span=(_lspan(e)[0], close.span[1]))
        return e

    def _atom(self) -> A.LExpr:
        tok = self.ts.peek()
        if tok.kind == "int":
            self.ts.next()
            return A.LInt(int(tok.value), span=tok.span)
        if tok.kind == "ident" and tok.value == "true":
            self.ts.next()
            return A.LBool(True, span=tok.span)
        if tok.kind == "ident" and tok.value == "false":
            self.ts.next()
            return A.LBool(False, span=tok.span)
        if tok.kind == "ident" and tok.value not in ANNOT_KEYWORDS:
            self.ts.next()
            return A.LVar(tok.value, span=tok.span)
        if tok.kind == "uident":
            self.ts.next()
            return A.LApp(tok.value, [], span=tok.span)
        if self.ts.at_op("!"):
            self.ts.next()
            name = self.ts.eat_ident()
            return A.LDeref(name.value, span=(tok.span[0], name.span[1]))
        if self.ts.at_op("["):
            self.ts.next()
            close = self.ts.eat_op("]")
            return A.LApp("[]", [], span=(tok.span[0], close.span[1]))
        if self.ts.at_op("("):
            self.ts.next()
            if self.ts.at_op(")"):
                close = self.ts.next()
                return A.LUnit(span=(tok.span[0], close.span[1]))
            first = self.parse()
            if self.ts.at_op(","):
                items = [first]
                while self.ts.at_op(","):
                    self.ts.next()
                    items.append(self.parse())
                close = self.ts.eat_op(")")
                return A.LTuple(items, span=(tok.span[0], close.span[1]))
            self.ts.eat_op(")")
            return first
        raise ParseError(f"expected a term, found {tok.value!r}", tok.span)


def _lspan(node) -> A.Span:
    return getattr(node, "span", A.NOSPAN)


# ---------------------------------------------------------------------------
# Annotations
# ---------------------------------------------------------------------------


class VariantAttachment:
    """``(*@ variant e *)`` following a logical definition."""

    def __init__(self, measures: list[A.LExpr]):
        self.measures = measures


def parse_annotation(text: str, kind: str, base: int = 0):
    """Parse one annotation interior.

    ``kind`` is the placement context: 'contract' (after let/val),
    'toplevel' (bare annotation) or 'loop' (head of a for-loop body).
    """
    ts = TokenStream(tokenize(text, base))
    if kind == "loop":
        invs: list[A.LExpr] = []
        while ts.at_word("invariant"):
            ts.next()
            invs.append(FormulaParser(ts).parse())
        if not invs or ts.peek().kind != "eof":
            raise ParseError(
                f"expected loop invariants, found {ts.peek().value!r}", ts.peek().span
            )
        return invs
    if kind == "contract":
        return _parse_contract(ts)
    return _parse_toplevel_annotation(ts)


def _parse_variants(ts: TokenStream) -> list[A.LExpr]:
    measures = [FormulaParser(ts).parse()]
    while ts.at_op(","):
        ts.next()
        measures.append(FormulaParser(ts).parse())
    return measures


def _parse_contract(ts: TokenStream) -> A.Contract:
    start = ts.peek().span
    result: Optional[str] = None
    first = ts.eat_ident()
    if ts.at_op("="):
        ts.next()
        result = first.value
        fn_name = ts.eat_ident().value
    else:
        fn_name = first.value
    args: list[str] = []
    while ts.peek().kind == "ident" and ts.peek().value not in CLAUSE_KEYWORDS:
        args.append(ts.next().value)
    contract = A.Contract(result, fn_name, args, span=start)
    while ts.peek().kind != "eof":
        tok = ts.peek()
        if ts.at_word("requires"):
            ts.next()
            contract.requires.append(FormulaParser(ts).parse())
        elif ts.at_word("ensures"):
            ts.next()
            contract.ensures.append(FormulaParser(ts).parse())
        elif ts.at_word("raises"):
            ts.next()
            exc = ts.eat_uident()
            payload: Optional[str] = None
            if ts.peek().kind == "ident" and ts.peek().value not in ANNOT_KEYWORDS:
                payload = ts.next().value
            ts.eat_op("->")
            formula = FormulaParser(ts).parse()
            contract.raises.append(
                A.RaiseClause(exc.value, payload, formula, span=exc.span)
            )
        elif ts.at_word("variant"):
            ts.next()
            if contract.variants:
                raise ParseError("at most one variant clause", tok.span)
            contract.variants = _parse_variants(ts)
        else:
            raise ParseError(f"unknown clause keyword {tok.value!r}", tok.span)
    return contract


def _parse_logic_params(ts: TokenStream) -> list[tuple[str, Type]]:
    params: list[tuple[str, Type]] = []
    while ts.at_op("("):
        ts.next()
        names = [ts.eat_ident().value]
        while ts.peek().kind == "ident" and ts.peek().value not in ANNOT_KEYWORDS:
            names.append(ts.next().value)
        ts.eat_op(":")
        ty = TypeParser(ts).parse()
        ts.eat_op(")")
        params.extend((n, ty) for n in names)
    return params


def _parse_toplevel_annotation(ts: TokenStream):
    tok = ts.peek()
    if ts.at_word("variant"):
        ts.next()
        measures = _parse_variants(ts)
        if ts.peek().kind != "eof":
            raise ParseError("trailing tokens after variant", ts.peek().span)
        return VariantAttachment(measures)
    if ts.at_word("function") or ts.at_word("predicate"):
        is_pred = tok.value == "predicate"
        ts.next()
        rec = False
        if ts.at_word("rec"):
            ts.next()
            rec = True
        name = ts.eat_ident().value
        params = _parse_logic_params(ts)
        result: Optional[Type] = None
        if not is_pred:
            ts.eat_op(":")
            result = TypeParser(ts).parse()
        body: Optional[A.LExpr] = None
        if ts.at_op("="):
            ts.next()
            body = FormulaParser(ts).parse()
        variants: list[A.LExpr] = []
        if ts.at_word("variant"):
            ts.next()
            variants = _parse_variants(ts)
        if ts.peek().kind != "eof":
            raise ParseError(
                f"trailing tokens in declaration: {ts.peek().value!r}", ts.peek().span
            )
        if is_pred:
            return A.LogicPred(name, rec, params, body, variants, span=tok.span)
        assert result is not None
        return A.LogicFun(name, rec, params, result, body, variants, span=tok.span)
    if ts.at_word("lemma") or ts.at_word("axiom"):
        is_lemma = tok.value == "lemma"
        ts.next()
        name = ts.eat_ident().value
        ts.eat_op(":")
        formula = FormulaParser(ts).parse()
        if ts.peek().kind != "eof":
            raise ParseError("trailing tokens after formula", ts.peek().span)
        if is_lemma:
            return A.Lemma(name, formula, span=tok.span)
        return A.Axiom(name, formula, span=tok.span)
    raise ParseError(
        f"unknown annotation keyword {tok.value!r}", tok.span,
        {"function", "predicate", "lemma", "axiom", "variant"},
    )


# ---------------------------------------------------------------------------
# Program expressions
# ---------------------------------------------------------------------------


class ExprParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    # sequence level: e1 ; e2
    def parse_seq(self) -> A.Expr:
        first = self.parse_stmt()
        if self.ts.at_op(";"):
            self.ts.next()
            second = self.parse_seq()
            return A.ESeq(first, second, span=(_espan(first)[0], _espan(second)[1]))
        return first

    def parse_stmt(self) -> A.Expr:
        tok = self.ts.peek()
        if tok.kind == "ident":
            if tok.value == "let":
                return self._let()
            if tok.value == "if":
                return self._if()
            if tok.value == "for":
                return self._for()
            if tok.value == "try":
                return self._try()
            if tok.value == "match":
                return self._match()
            if tok.value == "raise":
                return self._raise()
        expr = self._or()
        if self.ts.at_op(":="):
            if not isinstance(expr, A.EVar):
                raise ParseError("assignment target must be a variable", _espan(expr))
            self.ts.next()
            value = self.parse_stmt()
            return A.EAssign(expr.name, value, span=(_espan(expr)[0], _espan(value)[1]))
        return expr

    def _let(self) -> A.Expr:
        tok = self.ts.eat_word("let")
        if self.ts.at_word("exception"):
            self.ts.next()
            name = self.ts.eat_uident().value
            payload: Optional[Type] = None
            if self.ts.at_word("of"):
                self.ts.next()
                payload = TypeParser(self.ts).parse()
            self.ts.eat_word("in")
            body = self.parse_seq()
            return A.ELetException(name, payload, body, span=(tok.span[0], _espan(body)[1]))
        if self.ts.at_word("rec"):
            raise ParseError("local recursive definitions are not supported", tok.span)
        name = self.ts.eat_ident().value
        self.ts.eat_op("=")
        value = self.parse_stmt()
        self.ts.eat_word("in")
        body = self.parse_seq()
        return A.ELet(name, value, body, span=(tok.span[0], _espan(body)[1]))

    def _if(self) -> A.Expr:
        tok = self.ts.eat_word("if")
        cond = self._or()
        self.ts.eat_word("then")
        then = self.parse_stmt()
        els: Optional[A.Expr] = None
        if self.ts.at_word("else"):
            self.ts.next()
            els = self.parse_stmt()
        end = _espan(els)[1] if els is not None else _espan(then)[1]
        return A.EIf(cond, then, els, span=(tok.span[0], end))

    def _for(self) -> A.Expr:
        tok = self.ts.eat_word("for")
        var = self.ts.eat_ident().value
        self.ts.eat_op("=")
        lo = self._or()
        self.ts.eat_word("to")
        hi = self._or()
        self.ts.eat_word("do")
        invariants: list[A.LExpr] = []
        while self.ts.peek().kind == "annot":
            ann = self.ts.next()
            invariants.extend(parse_annotation(ann.value, "loop", ann.span[0] + 3))
        body = self.parse_seq()
        done = self.ts.eat_word("done")
        return A.EFor(var, lo, hi, invariants, body, span=(tok.span[0], done.span[1]))

    def _try(self) -> A.Expr:
        tok = self.ts.eat_word("try")
        body = self.parse_seq()
        self.ts.eat_word("with")
        if self.ts.at_op("|"):
            self.ts.next()
        handlers: list[tuple[str, Optional[A.Pattern], A.Expr]] = []
        while True:
            exc = self.ts.eat_uident().value
            pat: Optional[A.Pattern] = None
            if not self.ts.at_op("->"):
                pat = PatternParser(self.ts).parse()
            self.ts.eat_op("->")
            handler = self.parse_stmt()
            handlers.append((exc, pat, handler))
            if self.ts.at_op("|"):
                self.ts.next()
                continue
            break
        return A.ETry(body, handlers, span=(tok.span[0], _espan(handlers[-1][2])[1]))

    def _match(self) -> A.Expr:
        tok = self.ts.eat_word("match")
        scrut = self._or()
        self.ts.eat_word("with")
        if self.ts.at_op("|"):
            self.ts.next()
        branches: list[tuple[A.Pattern, A.Expr]] = []
        while True:
            pat = PatternParser(self.ts).parse()
            self.ts.eat_op("->")
            body = self.parse_stmt()
            branches.append((pat, body))
            if self.ts.at_op("|"):
                self.ts.next()
                continue
            break
        return A.EMatch(scrut, branches, span=(tok.span[0], _espan(branches[-1][1])[1]))

    def _raise(self) -> A.Expr:
        tok = self.ts.eat_word("raise")
        if self.ts.at_op("("):
            self.ts.next()
            exc = self.ts.eat_uident().value
            payload: Optional[A.Expr] = None
            if not self.ts.at_op(")"):
                payload = self._or()
            close = self.ts.eat_op(")")
            return A.ERaise(exc, payload, span=(tok.span[0], close.span[1]))
        exc_tok = self.ts.eat_uident()
        return A.ERaise(exc_tok.value, None, span=(tok.span[0], exc_tok.span[1]))

    def _or(self) -> A.Expr:
        left = self._and()
        while self.ts.at_op("||"):
            self.ts.next()
            right = self._and()
            left = A.EOr(left, right, span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _and(self) -> A.Expr:
        left = self._cmp()
        while self.ts.at_op("&&"):
            self.ts.next()
            right = self._cmp()
            left = A.EAnd(left, right, span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _cmp(self) -> A.Expr:
        left = self._cons()
        if self.ts.at_op(*_CMP_OPS):
            op = self.ts.next().value
            right = self._cons()
            return A.EBinop(op, left, right, span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _cons(self) -> A.Expr:
        left = self._add()
        if self.ts.at_op("::"):
            self.ts.next()
            right = self._cons()
            return A.EConstr("::", [left, right], span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _add(self) -> A.Expr:
        left = self._mul()
        while self.ts.at_op("+", "-"):
            op = self.ts.next().value
            right = self._mul()
            left = A.EBinop(op, left, right, span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _mul(self) -> A.Expr:
        left = self._unary()
        while self.ts.at_op("*"):
            self.ts.next()
            right = self._unary()
            left = A.EBinop("*", left, right, span=(_espan(left)[0], _espan(right)[1]))
        return left

    def _unary(self) -> A.Expr:
        tok = self.ts.peek()
        if tok.kind == "op" and tok.value == "-":
            self.ts.next()
            arg = self._unary()
            span = (tok.span[0], _espan(arg)[1])
            if isinstance(arg, A.EInt):
                return A.EInt(-arg.value, span=span)
            return A.EBinop("-", A.EInt(0, span=tok.span), arg, span=span)
        return self._app()

    def _app(self) -> A.Expr:
        tok = self.ts.peek()
        if tok.kind == "ident" and tok.value == "not":
            self.ts.next()
            arg = self._app_no_not()
            return A.ENot(arg, span=(tok.span[0], _espan(arg)[1]))
        return self._app_no_not()

    def _app_no_not(self) -> A.Expr:
        head_tok = self.ts.peek()
        head = self._postfix()
        args: list[A.Expr] = []
        while self._at_atom_start():
            args.append(self._postfix())
        if not args:
            return head
        span = (head_tok.span[0], _espan(args[-1])[1])
        if isinstance(head, A.EConstr) and not head.args:
            if len(args) == 1 and isinstance(args[0], A.ETuple):
                return A.EConstr(head.name, args[0].items, span=span)
            return A.EConstr(head.name, args, span=span)
        if isinstance(head, A.EVar):
            name = head.name
            if name == "ref":
                if len(args) != 1:
                    raise ParseError("ref takes one argument", span)
                return A.ERef(args[0], span=span)
            if name in ("incr", "decr"):
                if len(args) != 1 or not isinstance(args[0], A.EVar):
                    raise ParseError(f"{name} takes a mutable variable", span)
                cls = A.EIncr if name == "incr" else A.EDecr
                return cls(args[0].name, span=span)
            if name == "Array.length":
                if len(args) != 1:
                    raise ParseError("Array.length takes one argument", span)
                return A.EArrayLength(args[0], span=span)
            return A.EApp(name, args, span=span)
        raise ParseError("only named functions can be applied", span)

    def _at_atom_start(self) -> bool:
        tok = self.ts.peek()
        if tok.kind in ("int", "uident"):
            return True
        if tok.kind == "ident":
            return tok.value not in PROGRAM_KEYWORDS
        if tok.kind == "op":
            if tok.value == "(":
                return True
            if tok.value == "[":
                return self.ts.peek(1).kind == "op" and self.ts.peek(1).value == "]"
            if tok.value == "!":
                return self.ts.peek(1).kind == "ident"
        return False

    def _postfix(self) -> A.Expr:
        e = self._atom()
        while self.ts.at_op(".") and self.ts.peek(1).kind == "op" and self.ts.peek(1).value == "(":
            self.ts.next()
            self.ts.next()
            idx = self.parse_stmt()
            close = self.ts.eat_op(")")
            e = A.EArrayRead(e, idx, span=(_espan(e)[0], close.span[1]))
        return e

    def _atom(self) -> A.Expr:
        tok = self.ts.peek()
        if tok.kind == "int":
            self.ts.next()
            return A.EInt(int(tok.value), span=tok.span)
        if tok.kind == "ident":
            if tok.value == "true":
                self.ts.next()
                return A.EBool(True, span=tok.span)
            if tok.value == "false":
                self.ts.next()
                return A.EBool(False, span=tok.span)
            if tok.value == "begin":
                self.ts.next()
                inner = self.parse_seq()
                end = self.ts.eat_word("end")
                inner.span = (tok.span[0], end.span[1])  # type: ignore[attr-defined]
                return inner
            if tok.value in ("ref", "incr", "decr", "Array.length"):
                # bare occurrence; becomes special form at application
                self.ts.next()
                return A.EVar(tok.value, span=tok.span)
            if tok.value not in PROGRAM_KEYWORDS:
                self.ts.next()
                return A.EVar(tok.value, span=tok.span)
        if tok.kind == "uident":
            self.ts.next()
            return A.EConstr(tok.value, [], span=tok.span)
        if tok.kind == "op":
            if tok.value == "!":
                self.ts.next()
                name = self.ts.eat_ident()
                return A.EDeref(name.value, span=(tok.span[0], name.span[1]))
            if tok.value == "[":
                self.ts.next()
                close = self.ts.eat_op("]")
                return A.EConstr("[]", [], span=(tok.span[0], close.span[1]))
            if tok.value == "(":
                self.ts.next()
                if self.ts.at_op(")"):
                    close = self.ts.next()
                    return A.EUnit(span=(tok.span[0], close.span[1]))
                first = self.parse_seq()
                if self.ts.at_op(","):
                    items = [first]
                    while self.ts.at_op(","):
                        self.ts.next()
                        items.append(self.parse_stmt())
                    close = self.ts.eat_op(")")
                    return A.ETuple(items, span=(tok.span[0], close.span[1]))
                close = self.ts.eat_op(")")
                first.span = (tok.span[0], close.span[1])  # type: ignore[attr-defined]
                return first
        raise ParseError(f"expected an expression, found {tok.value!r}", tok.span)


def _espan(node) -> A.Span:
    return getattr(node, "span", A.NOSPAN)


# ---------------------------------------------------------------------------
# Top-level program
# ---------------------------------------------------------------------------


def parse_tokens(tokens: list[Token], path: str = "<memory>") -> A.SurfaceProgram:
    ts = TokenStream(tokens)
    decls: list[A.Decl] = []
    while ts.peek().kind != "eof":
        tok = ts.peek()
        if tok.kind == "annot":
            ts.next()
            parsed = parse_annotation(tok.value, "toplevel", tok.span[0] + 3)
            if isinstance(parsed, VariantAttachment):
                target = decls[-1] if decls else None
                if not isinstance(target, (A.LogicFun, A.LogicPred)):
                    raise ParseError(
                        "variant annotation attaches to no logical definition", tok.span
                    )
                if target.variants:
                    raise ParseError("duplicate variant annotation", tok.span)
                target.variants = parsed.measures
            else:
                parsed.span = tok.span
                decls.append(parsed)
            continue
        if tok.kind == "ident" and tok.value == "type":
            decls.append(_parse_type_decl(ts))
            continue
        if tok.kind == "ident" and tok.value == "val":
            decls.append(_parse_val_decl(ts))
            continue
        if tok.kind == "ident" and tok.value == "let":
            decls.append(_parse_let_decl(ts))
            continue
        raise ParseError(
            f"expected a declaration, found {tok.value!r}", tok.span,
            {"type", "val", "let", "(*@"},
        )
    return A.SurfaceProgram(decls, path=path)


def _parse_type_decl(ts: TokenStream) -> A.Decl:
    tok = ts.eat_word("type")
    name_tok = ts.eat_ident()
    name = name_tok.value
    if not ts.at_op("="):
        return A.AbstractType(name, span=(tok.span[0], name_tok.span[1]))
    ts.next()
    if ts.at_op("|") or ts.peek().kind == "uident":
        if ts.at_op("|"):
            ts.next()
        constructors: list[tuple[str, list[Type]]] = []
        while True:
            cname = ts.eat_uident().value
            arg_types: list[Type] = []
            if ts.at_word("of"):
                ts.next()
                t = TypeParser(ts).parse()
                arg_types = list(t.items) if isinstance(t, TTuple) else [t]
            constructors.append((cname, arg_types))
            if ts.at_op("|"):
                ts.next()
                continue
            break
        return A.AdtDef(name, constructors, span=tok.span)
    body = TypeParser(ts).parse()
    return A.TypeAlias(name, body, span=tok.span)


def _maybe_contract(ts: TokenStream) -> Optional[A.Contract]:
    tok = ts.peek()
    if tok.kind != "annot":
        return None
    probe = tokenize(tok.value, tok.span[0] + 3)
    if probe and probe[0].kind == "ident" and probe[0].value in (
        "function", "predicate", "lemma", "axiom", "variant",
    ):
        return None
    ts.next()
    contract = parse_annotation(tok.value, "contract", tok.span[0] + 3)
    assert isinstance(contract, A.Contract)
    contract.span = tok.span
    return contract


def _parse_val_decl(ts: TokenStream) -> A.Decl:
    tok = ts.eat_word("val")
    name = ts.eat_ident().value
    ts.eat_op(":")
    ty = TypeParser(ts).parse()
    contract = _maybe_contract(ts)
    return A.AbstractVal(name, ty, contract, span=tok.span)


def _parse_let_decl(ts: TokenStream) -> A.Decl:
    tok = ts.eat_word("let")
    rec = False
    if ts.at_word("rec"):
        ts.next()
        rec = True
    name = ts.eat_ident().value
    params: list[tuple[str, Optional[Type]]] = []
    while True:
        p = ts.peek()
        if p.kind == "ident" and p.value not in PROGRAM_KEYWORDS:
            ts.next()
            params.append((p.value, None))
        elif p.kind == "op" and p.value == "(" and ts.peek(1).kind == "ident" \
                and ts.peek(2).kind == "op" and ts.peek(2).value == ":":
            ts.next()
            pname = ts.eat_ident().value
            ts.eat_op(":")
            ty = TypeParser(ts).parse()
            ts.eat_op(")")
            params.append((pname, ty))
        else:
            break
    ts.eat_op("=")
    body = ExprParser(ts).parse_seq()
    contract = _maybe_contract(ts)
    return A.LetFun(name, rec, params, body, contract, span=tok.span)


def parse_source(text: str, path: str = "<memory>") -> A.SurfaceProgram:
    return parse_tokens(tokenize(text), path=path)
