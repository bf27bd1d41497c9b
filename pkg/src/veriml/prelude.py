"""Built-in specified library: the polymorphic list type, its logical
functions, library lemmas about them, and the ``List.rev_append`` program
function.

The library lemmas are shipped as axioms of the prelude; the test suite
validates every one of them by exhaustive evaluation over small lists, which
is the justification for assuming them in proof contexts.
"""
from __future__ import annotations

from veriml.logic import decls as D
from veriml.logic import terms as L
from veriml.types import BOOL, INT, TAdt, TVar, Type, list_of

A = TVar("a")
LIST_A = list_of(A)

LIST_ADT = D.AdtDecl(
    "list",
    ("a",),
    (
        ("[]", ()),
        ("::", (A, LIST_A)),
    ),
)


def _v(name: str, ty: Type) -> L.Var:
    return L.Var(name, ty)


def _cons(h: L.Term, t: L.Term) -> L.Term:
    return L.Constr("::", (h, t), LIST_A)


def _nil() -> L.Term:
    return L.Constr("[]", (), LIST_A)


def _app2(name: str, x: L.Term, y: L.Term, ty: Type) -> L.Term:
    return L.App(name, (x, y), ty, tyargs=(A,))


# List.mem : 'a -> 'a list -> prop
MEM = D.FunDef(
    "List.mem",
    ("a",),
    (("x", A), ("l", LIST_A)),
    None,
    L.Match(
        _v("l", LIST_A),
        (
            (L.PatConstr("[]", (), LIST_A), L.FALSE),
            (
                L.PatConstr("::", (L.PatVar("y", A), L.PatVar("r", LIST_A)), LIST_A),
                L.Conn(
                    "or",
                    L.Eq(_v("x", A), _v("y", A), A),
                    L.PredApp("List.mem", (_v("x", A), _v("r", LIST_A)), (A,)),
                ),
            ),
        ),
        BOOL,
    ),
    rec=True,
    variants=(_v("l", LIST_A),),
)

# List.length : 'a list -> int
LENGTH = D.FunDef(
    "List.length",
    ("a",),
    (("l", LIST_A),),
    INT,
    L.Match(
        _v("l", LIST_A),
        (
            (L.PatConstr("[]", (), LIST_A), L.IntConst(0)),
            (
                L.PatConstr("::", (L.PatWild(A), L.PatVar("r", LIST_A)), LIST_A),
                L.Arith(
                    "+",
                    L.IntConst(1),
                    L.App("List.length", (_v("r", LIST_A),), INT, (A,)),
                ),
            ),
        ),
        INT,
    ),
    rec=True,
    variants=(_v("l", LIST_A),),
)

# (++) : 'a list -> 'a list -> 'a list
APPEND = D.FunDef(
    "++",
    ("a",),
    (("l1", LIST_A), ("l2", LIST_A)),
    LIST_A,
    L.Match(
        _v("l1", LIST_A),
        (
            (L.PatConstr("[]", (), LIST_A), _v("l2", LIST_A)),
            (
                L.PatConstr("::", (L.PatVar("x", A), L.PatVar("r", LIST_A)), LIST_A),
                _cons(
                    _v("x", A),
                    _app2("++", _v("r", LIST_A), _v("l2", LIST_A), LIST_A),
                ),
            ),
        ),
        LIST_A,
    ),
    rec=True,
    variants=(_v("l1", LIST_A),),
)

# List.rev : 'a list -> 'a list
REV = D.FunDef(
    "List.rev",
    ("a",),
    (("l", LIST_A),),
    LIST_A,
    L.Match(
        _v("l", LIST_A),
        (
            (L.PatConstr("[]", (), LIST_A), _nil()),
            (
                L.PatConstr("::", (L.PatVar("x", A), L.PatVar("r", LIST_A)), LIST_A),
                _app2(
                    "++",
                    L.App("List.rev", (_v("r", LIST_A),), LIST_A, (A,)),
                    _cons(_v("x", A), _nil()),
                    LIST_A,
                ),
            ),
        ),
        LIST_A,
    ),
    rec=True,
    variants=(_v("l", LIST_A),),
)


def _forall(binders, body):
    return L.Quant("forall", tuple(binders), body)


_l = _v("l", LIST_A)
_l1 = _v("l1", LIST_A)
_l2 = _v("l2", LIST_A)
_l3 = _v("l3", LIST_A)
_x = _v("x", A)

LIB_AXIOMS = [
    D.AxiomDecl(
        "append_nil",
        _forall(
            [("l", LIST_A)],
            L.Eq(_app2("++", _l, _nil(), LIST_A), _l, LIST_A),
        ),
        ("a",),
    ),
    D.AxiomDecl(
        "append_assoc",
        _forall(
            [("l1", LIST_A), ("l2", LIST_A), ("l3", LIST_A)],
            L.Eq(
                _app2("++", _app2("++", _l1, _l2, LIST_A), _l3, LIST_A),
                _app2("++", _l1, _app2("++", _l2, _l3, LIST_A), LIST_A),
                LIST_A,
            ),
        ),
        ("a",),
    ),
    D.AxiomDecl(
        "length_nonneg",
        _forall(
            [("l", LIST_A)],
            L.Cmp("<=", L.IntConst(0), L.App("List.length", (_l,), INT, (A,))),
        ),
        ("a",),
    ),
    D.AxiomDecl(
        "length_append",
        _forall(
            [("l1", LIST_A), ("l2", LIST_A)],
            L.Eq(
                L.App("List.length", (_app2("++", _l1, _l2, LIST_A),), INT, (A,)),
                L.Arith(
                    "+",
                    L.App("List.length", (_l1,), INT, (A,)),
                    L.App("List.length", (_l2,), INT, (A,)),
                ),
                INT,
            ),
        ),
        ("a",),
    ),
    D.AxiomDecl(
        "mem_append",
        _forall(
            [("x", A), ("l1", LIST_A), ("l2", LIST_A)],
            L.Conn(
                "iff",
                L.PredApp("List.mem", (_x, _app2("++", _l1, _l2, LIST_A)), (A,)),
                L.Conn(
                    "or",
                    L.PredApp("List.mem", (_x, _l1), (A,)),
                    L.PredApp("List.mem", (_x, _l2), (A,)),
                ),
            ),
        ),
        ("a",),
    ),
    D.AxiomDecl(
        "rev_mem",
        _forall(
            [("x", A), ("l", LIST_A)],
            L.Conn(
                "iff",
                L.PredApp("List.mem", (_x, L.App("List.rev", (_l,), LIST_A, (A,))), (A,)),
                L.PredApp("List.mem", (_x, _l), (A,)),
            ),
        ),
        ("a",),
    ),
]

LOGIC_DEFS = [MEM, LENGTH, APPEND, REV]

# program-level prelude: List.rev_append l1 l2 = List.rev l1 ++ l2
REV_APPEND_NAME = "List.rev_append"
REV_APPEND_TYVARS = ("a",)
REV_APPEND_PARAMS: list[tuple[str, Type]] = [("l1", LIST_A), ("l2", LIST_A)]
REV_APPEND_RESULT: Type = LIST_A
REV_APPEND_ENSURES = L.Eq(
    _v("r", LIST_A),
    _app2("++", L.App("List.rev", (_l1,), LIST_A, (A,)), _l2, LIST_A),
    LIST_A,
)
REV_APPEND_RESULT_NAME = "r"

EXCEPTIONS: dict[str, Type | None] = {"Not_found": None}

RESERVED_NAMES = (
    {d.name for d in LOGIC_DEFS}
    | {d.name for d in LIB_AXIOMS}
    | {REV_APPEND_NAME, "Array.length", "list", "size_list"}
)


def prelude_declarations() -> list[D.Declaration]:
    """Context block shared by every task, in dependency order."""
    return [LIST_ADT, *LOGIC_DEFS, *LIB_AXIOMS]
