"""Drive external SMT solvers as subprocesses under a timeout.

Solvers are described by command templates with ``{script}``,
``{timeout_s}`` and ``{timeout_ms}`` placeholders.  A template without
``{script}`` receives the script on stdin.  The first result token decides
the verdict: ``unsat`` validates the task, ``sat`` refutes the negated goal,
anything else is inconclusive.  Processes exceeding the deadline are killed.
"""
from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

VALID = "Valid"
NOT_VALIDATED = "NotValidated"
UNKNOWN = "Unknown"
TIMEOUT = "Timeout"
ERROR = "SolverError"

#: extra wall-clock slack beyond the solver's own budget (process startup,
#: teardown, WASM compilation)
GRACE_SECONDS = 4.0


@dataclass(frozen=True)
class SolverConfig:
    name: str
    command: str  # template; {script} {timeout_s} {timeout_ms}
    timeout: float = 2.0

    def with_timeout(self, timeout: Optional[float]) -> "SolverConfig":
        if timeout is None:
            return self
        return SolverConfig(self.name, self.command, timeout)


@dataclass(frozen=True)
class Verdict:
    status: str
    duration: float
    solver: str
    output: str = ""

    @property
    def is_valid(self) -> bool:
        return self.status == VALID


def _classify(stdout: str, stderr: str, returncode: int) -> tuple[str, str]:
    for line in stdout.splitlines():
        tok = line.strip()
        if not tok:
            continue
        if tok == "unsat":
            return VALID, tok
        if tok == "sat":
            return NOT_VALIDATED, tok
        if tok == "unknown":
            return UNKNOWN, tok
        if tok == "timeout":
            return TIMEOUT, tok
        break
    detail = (stdout + "\n" + stderr).strip()
    return ERROR, detail[:2000]


def run_solver(script_text: str, config: SolverConfig) -> Verdict:
    """Run one solver on one script; kill it past ``timeout + grace``."""
    start = time.monotonic()
    use_file = "{script}" in config.command
    script_path: Optional[str] = None
    try:
        if use_file:
            fd, script_path = tempfile.mkstemp(suffix=".smt2", prefix="veriml_")
            with os.fdopen(fd, "w") as fh:
                fh.write(script_text)
        cmd_text = config.command.format(
            script=script_path or "",
            timeout_s=max(1, int(round(config.timeout))),
            timeout_ms=int(config.timeout * 1000),
        )
        argv = shlex.split(cmd_text)
        if not argv or shutil.which(argv[0]) is None:
            return Verdict(ERROR, 0.0, config.name, f"not found: {argv[0] if argv else ''}")
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE if not use_file else subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as ex:
            return Verdict(ERROR, time.monotonic() - start, config.name, str(ex))
        try:
            stdout, stderr = proc.communicate(
                input=None if use_file else script_text,
                timeout=config.timeout + GRACE_SECONDS,
            )
        except subprocess.TimeoutExpired:
            proc.kill()
            try:
                proc.communicate(timeout=5)
            except Exception:
                pass
            return Verdict(TIMEOUT, time.monotonic() - start, config.name, "killed at deadline")
        duration = time.monotonic() - start
        status, output = _classify(stdout, stderr, proc.returncode)
        return Verdict(status, duration, config.name, output)
    finally:
        if script_path is not None:
            try:
                os.unlink(script_path)
            except OSError:
                pass


@dataclass
class ProveResult:
    verdict: Verdict
    attempts: list[Verdict] = field(default_factory=list)


def prove_script(
    script_text: str, configs: list[SolverConfig], strategy: str = "sequential"
) -> ProveResult:
    """Try solvers until one validates; record every attempt."""
    if not configs:
        raise ValueError("at least one solver configuration is required")
    attempts: list[Verdict] = []
    if strategy == "race":
        with ThreadPoolExecutor(max_workers=len(configs)) as pool:
            futs = {pool.submit(run_solver, script_text, c): c for c in configs}
            pending = set(futs)
            best: Optional[Verdict] = None
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for f in done:
                    v = f.result()
                    attempts.append(v)
                    if v.is_valid and best is None:
                        best = v
            ordered = sorted(attempts, key=lambda v: [c.name for c in configs].index(v.solver))
            return ProveResult(best or _best_of(ordered), ordered)
    for config in configs:
        v = run_solver(script_text, config)
        attempts.append(v)
        if v.is_valid:
            return ProveResult(v, attempts)
    return ProveResult(_best_of(attempts), attempts)


def _best_of(attempts: list[Verdict]) -> Verdict:
    rank = {VALID: 0, NOT_VALIDATED: 1, UNKNOWN: 2, TIMEOUT: 3, ERROR: 4}
    return sorted(attempts, key=lambda v: rank.get(v.status, 5))[0]


# ---------------------------------------------------------------------------
# Configuration discovery
# ---------------------------------------------------------------------------

_PAPER_SOLVERS = ("alt-ergo", "cvc5", "z3")

_NATIVE_TEMPLATES = {
    "alt-ergo": "alt-ergo --timelimit {timeout_s} {script}",
    "cvc5": "cvc5 --lang smt2 --tlimit {timeout_ms} {script}",
    "z3": "z3 -smt2 -T:{timeout_s} {script}",
}


def _find_wasm_shim() -> Optional[Path]:
    env = os.environ.get("VERIML_Z3WASM")
    candidates: list[Path] = []
    if env:
        candidates.append(Path(env))
    here = Path.cwd()
    for base in [here, *here.parents]:
        candidates.append(base / "solvers" / "z3wasm.js")
    pkg_root = Path(__file__).resolve().parents[3].parent
    candidates.append(pkg_root / "solvers" / "z3wasm.js")
    for c in candidates:
        if c.is_file() and (c.parent / "node_modules" / "z3-solver").is_dir():
            return c
    return None


def parse_config_file(path: Path) -> list[SolverConfig]:
    """``name.command = ...`` / ``name.timeout = ...`` lines; an optional
    ``solvers = a, b`` line fixes the order."""
    entries: dict[str, dict[str, str]] = {}
    order: Optional[list[str]] = None
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad solver config line: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "solvers":
            order = [p.strip() for p in value.split(",") if p.strip()]
            continue
        if "." not in key:
            raise ValueError(f"bad solver config key: {key!r}")
        name, _, attr = key.partition(".")
        entries.setdefault(name, {})[attr] = value
    names = order if order is not None else sorted(entries)
    out = []
    for name in names:
        attrs = entries.get(name)
        if attrs is None or "command" not in attrs:
            raise ValueError(f"solver {name!r} has no command template")
        out.append(
            SolverConfig(name, attrs["command"], float(attrs.get("timeout", 2.0)))
        )
    return out


def discover_solvers(
    requested: Optional[list[str]] = None,
    timeout: Optional[float] = None,
    config_file: Optional[Path] = None,
) -> list[SolverConfig]:
    """Resolve solver configurations: explicit config file, then environment
    overrides, then the three well-known solvers on PATH, then the bundled
    WASM build of Z3."""
    configs: list[SolverConfig] = []
    if config_file is None:
        env_cfg = os.environ.get("VERIML_SOLVERS")
        if env_cfg:
            config_file = Path(env_cfg)
    if config_file is not None:
        configs = parse_config_file(config_file)
    else:
        for name in _PAPER_SOLVERS:
            env_bin = os.environ.get(f"VERIML_{name.replace('-', '').upper()}")
            binary = env_bin or (name if shutil.which(name) else None)
            if binary and shutil.which(binary):
                template = _NATIVE_TEMPLATES[name].replace(name, binary, 1)
                configs.append(SolverConfig(name, template))
        if not configs:
            shim = _find_wasm_shim()
            if shim is not None and shutil.which("node"):
                configs.append(
                    SolverConfig("z3", f"node {shim} {{script}} {{timeout_ms}}")
                )
    if requested:
        by_name = {c.name: c for c in configs}
        missing = [r for r in requested if r not in by_name]
        if missing:
            raise ValueError(f"unknown solver(s): {', '.join(missing)}")
        configs = [by_name[r] for r in requested]
    if timeout is not None:
        configs = [c.with_timeout(timeout) for c in configs]
    return configs
