"""Logical declarations and proof tasks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from veriml.logic.terms import Body, Formula, Term
from veriml.types import Type


@dataclass(frozen=True)
class Declaration:
    pass


@dataclass(frozen=True)
class SortDecl(Declaration):
    name: str


@dataclass(frozen=True)
class AdtDecl(Declaration):
    name: str
    tyvars: tuple[str, ...]
    constructors: tuple[tuple[str, tuple[Type, ...]], ...]


@dataclass(frozen=True)
class ConstDecl(Declaration):
    """A fixed individual introduced into a task context."""

    name: str
    ty: Type


@dataclass(frozen=True)
class FunDecl(Declaration):
    """Abstract function symbol; ``result None`` declares a predicate."""

    name: str
    tyvars: tuple[str, ...]
    params: tuple[Type, ...]
    result: Optional[Type]


@dataclass(frozen=True)
class FunDef(Declaration):
    """Defined logical function or predicate (``result None``)."""

    name: str
    tyvars: tuple[str, ...]
    params: tuple[tuple[str, Type], ...]
    result: Optional[Type]
    body: Body
    rec: bool = False
    variants: tuple[Term, ...] = ()


@dataclass(frozen=True)
class AxiomDecl(Declaration):
    name: str
    formula: Formula
    tyvars: tuple[str, ...] = ()


@dataclass(frozen=True)
class LemmaDecl(Declaration):
    """Usable like an axiom by later goals, but proved by its own task."""

    name: str
    formula: Formula
    tyvars: tuple[str, ...] = ()


@dataclass(frozen=True)
class Task:
    """A named goal under an ordered declaration context and named
    hypotheses; the unit of proof."""

    name: str
    decls: tuple[Declaration, ...]
    hyps: tuple[tuple[str, Formula], ...]
    goal: Formula

    def hyp_names(self) -> list[str]:
        return [n for n, _ in self.hyps]


def decl_name(d: Declaration) -> str:
    return d.name  # type: ignore[attr-defined]
