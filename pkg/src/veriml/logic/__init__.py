"""Typed first-order logic core: terms, declarations, tasks and the passes
that prepare tasks for a first-order back end."""
from veriml.logic import decls, terms
from veriml.logic.decls import Task
from veriml.logic.defunc import DefuncError, defunctionalize
from veriml.logic.mono import MonoError, monomorphize
from veriml.logic.render import formula_str, render_task, term_str
from veriml.logic.size import adt_size, size_fn_name
from veriml.logic.subst import SubstError, free_vars, substitute

__all__ = [
    "decls",
    "terms",
    "Task",
    "DefuncError",
    "defunctionalize",
    "MonoError",
    "monomorphize",
    "formula_str",
    "render_task",
    "term_str",
    "adt_size",
    "size_fn_name",
    "SubstError",
    "free_vars",
    "substitute",
]
