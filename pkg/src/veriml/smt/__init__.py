"""SMT back end: task encoding and solver orchestration."""
from veriml.logic.mono import monomorphize
from veriml.smt.encode import EncodeError, Encoder, SmtScript, encode_task
from veriml.smt.solvers import (
    ERROR,
    GRACE_SECONDS,
    NOT_VALIDATED,
    TIMEOUT,
    UNKNOWN,
    VALID,
    ProveResult,
    SolverConfig,
    Verdict,
    discover_solvers,
    parse_config_file,
    prove_script,
    run_solver,
)


def prove_task(task, configs, strategy: str = "sequential") -> ProveResult:
    """Monomorphize, encode and run the solver portfolio on a task."""
    script = encode_task(monomorphize(task))
    return prove_script(script.text, configs, strategy)


__all__ = [
    "EncodeError",
    "Encoder",
    "SmtScript",
    "encode_task",
    "ERROR",
    "GRACE_SECONDS",
    "NOT_VALIDATED",
    "TIMEOUT",
    "UNKNOWN",
    "VALID",
    "ProveResult",
    "SolverConfig",
    "Verdict",
    "discover_solvers",
    "parse_config_file",
    "prove_script",
    "run_solver",
    "prove_task",
]
