"""Uniform SAT-solving interface: bundled in-process CDCL or an external
DIMACS solver process.

The external backend is configured through ``SYNCOUNT_SOLVER`` (or the
``solver_cmd`` argument): a command whose last argument will be the DIMACS
file, e.g. ``minisat -verb=0``.  Exit code 10 means SAT, 20 means UNSAT;
the model is read from ``v`` lines.  When no command is configured the
bundled CDCL solver is used, so the package works without any external
tooling.

Assumption-based incremental solving is native in the bundled solver.  Over
an external one-shot solver it is emulated: every ``solve_under`` call emits
the full clause set plus one unit clause per assumption, which makes the
assumptions retractable simply by omitting them from the next call (the
degenerate form of the activation-literal trick for stateless backends).
"""

from __future__ import annotations

import os
import resource
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .cdcl import MiniCdcl, SolverError

DEFAULT_TIME_LIMIT = 300.0
DEFAULT_MEM_LIMIT_MB = 4096
ENV_SOLVER = "SYNCOUNT_SOLVER"


@dataclass
class SolveResult:
    status: str  # sat | unsat | unknown
    model: list[int] | None = None
    stats: dict = field(default_factory=dict)

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"


def write_dimacs(num_vars: int, clauses, comments=()) -> str:
    """Standard DIMACS CNF text; one 0-terminated clause per line."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {num_vars} {len(clauses)}")
    lines.extend(" ".join(str(l) for l in cl) + " 0" for cl in clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    """Parse DIMACS CNF; returns (num_vars, clauses)."""
    num_vars = 0
    clauses: list[list[int]] = []
    pending: list[int] = []
    seen_header = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header {line!r}")
            num_vars = int(parts[2])
            seen_header = True
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(pending)
                pending = []
            else:
                pending.append(lit)
    if not seen_header:
        raise ValueError("missing DIMACS header")
    if pending:
        raise ValueError("unterminated final clause")
    return num_vars, clauses


def parse_model_text(text: str) -> list[int]:
    """A model as a whitespace-separated literal list, in raw form or as
    solver output (``v`` lines after an ``s SATISFIABLE`` banner)."""
    lits: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "s")):
            continue
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            if tok in ("SAT", "SATISFIABLE"):
                continue
            lit = int(tok)
            if lit != 0:
                lits.append(lit)
    return lits


def check_model(model, clauses) -> bool:
    """True iff the assignment satisfies every clause."""
    truth = {}
    for l in model:
        truth[abs(l)] = l > 0
    return all(any(truth.get(abs(l), False) == (l > 0) for l in cl)
               for cl in clauses)


def _limit_resources(mem_limit_mb: int):
    def apply():
        limit = mem_limit_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    return apply


def solve_oneshot(cnf, time_limit: float = DEFAULT_TIME_LIMIT,
                  mem_limit_mb: int = DEFAULT_MEM_LIMIT_MB,
                  solver_cmd: str | None = None,
                  drat_path: str | None = None) -> SolveResult:
    """Solve one instance.  ``cnf`` needs ``num_vars`` and ``clauses``
    attributes (or be such a pair).  DRAT logging, when requested, is passed
    through to external solvers that accept a proof-file argument."""
    if hasattr(cnf, "num_vars"):
        num_vars, clauses = cnf.num_vars, cnf.clauses
    else:
        num_vars, clauses = cnf
    cmd = solver_cmd if solver_cmd is not None else os.environ.get(ENV_SOLVER)
    if not cmd:
        solver = MiniCdcl(num_vars)
        solver.add_clauses(clauses)
        status, model, stats = solver.solve(time_budget=time_limit)
        return SolveResult(status, model, stats)
    return _solve_external(num_vars, clauses, cmd, time_limit, mem_limit_mb,
                           drat_path)


def _solve_external(num_vars, clauses, cmd, time_limit, mem_limit_mb,
                    drat_path) -> SolveResult:
    start = time.monotonic()
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(write_dimacs(num_vars, clauses))
        path = fh.name
    argv = cmd.split() + [path]
    if drat_path:
        argv.append(drat_path)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=time_limit,
                              preexec_fn=_limit_resources(mem_limit_mb))
    except FileNotFoundError as exc:
        return SolveResult("unknown", stats={"error": f"solver not found: {exc}"})
    except subprocess.TimeoutExpired:
        return SolveResult("unknown", stats={"error": "time limit exceeded",
                                             "time": time.monotonic() - start})
    finally:
        os.unlink(path)
    elapsed = time.monotonic() - start
    stats = {"time": elapsed, "returncode": proc.returncode}
    if proc.returncode == 20 or "s UNSATISFIABLE" in proc.stdout:
        return SolveResult("unsat", stats=stats)
    if proc.returncode == 10 or "s SATISFIABLE" in proc.stdout:
        model = parse_model_text(proc.stdout)
        if not check_model(model, clauses):
            raise SolverError("external solver returned a bogus model")
        return SolveResult("sat", model, stats)
    stats["error"] = f"unrecognised solver output (rc={proc.returncode})"
    return SolveResult("unknown", stats=stats)


class SessionClosed(Exception):
    pass


class IncrementalSession:
    """Incremental solving session over the bundled CDCL solver.

    Clauses persist across calls; assumptions are per-call and UNSAT under
    assumptions does not poison later calls.
    """

    def __init__(self, num_vars: int = 0,
                 time_limit: float = DEFAULT_TIME_LIMIT):
        self._solver = MiniCdcl(num_vars)
        self._time_limit = time_limit
        self._closed = False

    def _check_open(self) -> None:
        if self._closed:
            raise SessionClosed("session is closed")

    @property
    def num_vars(self) -> int:
        return self._solver.nvars

    def ensure_vars(self, n: int) -> None:
        self._check_open()
        self._solver.ensure_vars(n)

    def add_clause(self, clause) -> None:
        self._check_open()
        self._solver.add_clause(clause)

    def add_clauses(self, clauses) -> None:
        self._check_open()
        self._solver.add_clauses(clauses)

    def solve_under(self, assumptions=(), time_limit: float | None = None) -> SolveResult:
        self._check_open()
        limit = self._time_limit if time_limit is None else time_limit
        status, model, stats = self._solver.solve(assumptions=assumptions,
                                                  time_budget=limit)
        return SolveResult(status, model, stats)

    def close(self) -> None:
        self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class ExternalSession:
    """Assumption emulation over a one-shot external DIMACS solver: each
    call re-emits the stored clauses plus per-call assumption units."""

    def __init__(self, solver_cmd: str, num_vars: int = 0,
                 time_limit: float = DEFAULT_TIME_LIMIT,
                 mem_limit_mb: int = DEFAULT_MEM_LIMIT_MB):
        self._cmd = solver_cmd
        self._num_vars = num_vars
        self._clauses: list[list[int]] = []
        self._time_limit = time_limit
        self._mem_limit_mb = mem_limit_mb
        self._closed = False

    def _check_open(self) -> None:
        if self._closed:
            raise SessionClosed("session is closed")

    @property
    def num_vars(self) -> int:
        return self._num_vars

    def ensure_vars(self, n: int) -> None:
        self._check_open()
        self._num_vars = max(self._num_vars, n)

    def add_clause(self, clause) -> None:
        self._check_open()
        clause = [int(l) for l in clause]
        for l in clause:
            self.ensure_vars(abs(l))
        self._clauses.append(clause)

    def add_clauses(self, clauses) -> None:
        for c in clauses:
            self.add_clause(c)

    def solve_under(self, assumptions=(), time_limit: float | None = None) -> SolveResult:
        self._check_open()
        limit = self._time_limit if time_limit is None else time_limit
        clauses = self._clauses + [[int(l)] for l in assumptions]
        for l in assumptions:
            self.ensure_vars(abs(l))
        return _solve_external(self._num_vars, clauses, self._cmd, limit,
                               self._mem_limit_mb, None)

    def close(self) -> None:
        self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def incremental_session(num_vars: int = 0, solver_cmd: str | None = None,
                        time_limit: float = DEFAULT_TIME_LIMIT):
    """Open an incremental session: bundled solver unless a command is
    configured explicitly (sessions never pick up the environment variable,
    since per-call process spawning is rarely what CEGAR wants)."""
    if solver_cmd:
        return ExternalSession(solver_cmd, num_vars, time_limit)
    return IncrementalSession(num_vars, time_limit)
