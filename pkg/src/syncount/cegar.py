"""Counterexample-guided synthesis over a bounded symbolic unrolling.

One SAT encoding serves both candidate guessing and verification: a model
simultaneously describes an algorithm (``a`` bits), a fault set (``p``
selectors) and a bounded execution under it (per-recipient observation bits
``u`` and derived indicators).  The search loop alternates between
extracting a candidate algorithm, asking the solver for a non-stabilising
execution of that candidate (pinned through assumptions), and adding a
refinement clause that flips at least one transition bit used along the
counterexample.

States are bit-encoded with ``B = ceil(log2 s)`` bits per node (extra
clauses forbid unused patterns when s is not a power of two).  Cyclic
algorithms alias every transition variable to the rotation where the acting
node comes first, exactly like the direct encoding.

Loop counterexamples are searched from a configuration outside the two good
ones: candidates surviving the initial two-step sanity sweep always admit
the good 2-cycle itself as a loop, which is not a counterexample, while any
loop through a bad starting point can never touch the good cycle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .model import (
    Algorithm,
    Config,
    CYCLIC,
    GENERAL,
    Execution,
    Params,
    all_observed,
    config_index,
    rotate,
)
from .solvers import IncrementalSession, SolveResult, incremental_session
from .verify import check_stabilization

FOUND = "found"
UNREALIZABLE = "unrealizable"
TIMEOUT = "timeout"


def bits_for(s: int) -> int:
    return max(1, (s - 1).bit_length())


class RefinementContradiction(Exception):
    """An empty forbid clause: the whole candidate space is gone."""


@dataclass
class CegarVars:
    """Lazy variable registry for the symbolic encoding."""

    params: Params
    klass: str
    _ids: dict = field(default_factory=dict)
    _next: int = 1

    @property
    def num_vars(self) -> int:
        return self._next - 1

    def _vid(self, key) -> int:
        vid = self._ids.get(key)
        if vid is None:
            vid = self._next
            self._ids[key] = vid
            self._next += 1
        return vid

    def p(self, i: int) -> int:
        return self._vid(("p", i))

    def p_eq(self, k: int, i: int) -> int:
        return self._vid(("p=", k, i))

    def p_le(self, k: int, i: int) -> int:
        return self._vid(("p<=", k, i))

    def a(self, w: Config, i: int, b: int) -> int:
        if self.klass == CYCLIC:
            w, i = rotate(w, i), 0
        return self._vid(("a", config_index(w, self.params.s), i, b))

    def u(self, i: int, j: int, b: int, k: int) -> int:
        return self._vid(("u", i, j, b, k))

    def g(self, i: int, b: int, k: int) -> int:
        return self.u(i, i, b, k)

    def d(self, w: Config, j: int, k: int) -> int:
        return self._vid(("d", config_index(w, self.params.s), j, k))

    def z(self, k: int) -> int:
        return self._vid(("z", k))

    def o(self, k: int) -> int:
        return self._vid(("o", k))

    def zi(self, i: int, k: int) -> int:
        return self._vid(("zi", i, k))

    def oi(self, i: int, k: int) -> int:
        return self._vid(("oi", i, k))

    def loop(self, k: int) -> int:
        return self._vid(("loop", k))


class CegarEncoding:
    """Incrementally grown formula: base + one block per unrolled timepoint."""

    def __init__(self, params: Params, klass: str = GENERAL,
                 session: IncrementalSession | None = None,
                 strengthen_observations: bool = False):
        self.params = params
        self.klass = klass
        self.B = bits_for(params.s)
        self.vars = CegarVars(params, klass)
        self.session = session if session is not None else incremental_session()
        self.strengthen_observations = strengthen_observations
        self.depth = -1  # highest encoded timepoint
        self.clauses_added = 0

    def _add(self, clause) -> None:
        self.session.add_clause(clause)
        self.clauses_added += 1

    # -- base ---------------------------------------------------------------

    def build_base(self) -> None:
        self._faulty_selection()
        self._trivial_transitions()
        self._table_validity()

    def _faulty_selection(self) -> None:
        """Exactly f of the p(i) hold, selected in strictly increasing order."""
        n, f = self.params.n, self.params.f
        v = self.vars
        for i in range(n):
            if f == 0:
                self._add([-v.p(i)])
            else:
                self._add([-v.p(i)] + [v.p_eq(k, i) for k in range(f)])
        for k in range(f):
            self._add([v.p_le(k, n - 1)])
            for i in range(n):
                self._add([-v.p_eq(k, i), v.p_le(k, i)])
                self._add([-v.p_eq(k, i), v.p(i)])
            self._add([v.p_eq(k, 0), -v.p_le(k, 0)])
            for j in range(1, n):
                self._add([-v.p_le(k, j), v.p_eq(k, j), v.p_le(k, j - 1)])
                self._add([-v.p_le(k, j - 1), v.p_le(k, j)])
                self._add([-v.p_le(k, j - 1), -v.p_eq(k, j)])
        for h in range(1, f):
            for i in range(n):
                self._add([-v.p_eq(h - 1, i), -v.p_le(h, i)])

    def _trivial_transitions(self) -> None:
        """From all-zeros go to state 1; from all-ones go to state 0."""
        n, s = self.params.n, self.params.s
        v = self.vars
        w0 = (0,) * n
        w1 = (1,) * n
        for i in range(n):
            self._add([v.a(w0, i, 0)])
            for b in range(1, self.B):
                self._add([-v.a(w0, i, b)])
            for b in range(self.B):
                self._add([-v.a(w1, i, b)])

    def _table_validity(self) -> None:
        """Successor states must be < s (matters when s is not a power of 2)."""
        n, s = self.params.n, self.params.s
        if s == 1 << self.B:
            return
        v = self.vars
        nodes = (0,) if self.klass == CYCLIC else range(n)
        for w in all_observed(n, s):
            for i in nodes:
                for bad in range(s, 1 << self.B):
                    self._add([-v.a(w, i, b) if (bad >> b) & 1 else v.a(w, i, b)
                               for b in range(self.B)])

    # -- unrolling ----------------------------------------------------------

    def add_tau(self, k: int) -> None:
        """Encode timepoint k (state propagation and indicators)."""
        assert k == self.depth + 1, "timepoints must be added in order"
        self.depth = k
        n, s = self.params.n, self.params.s
        v, B = self.vars, self.B

        # observations carry valid states only; honest nodes are seen as-is
        for j in range(n):
            for i in range(n):
                if s != 1 << B:
                    for bad in range(s, 1 << B):
                        self._add([-v.u(i, j, b, k) if (bad >> b) & 1
                                   else v.u(i, j, b, k) for b in range(B)])
                if i == j:
                    continue
                for b in range(B):
                    self._add([v.p(i), -v.u(i, j, b, k), v.g(i, b, k)])
                    self._add([v.p(i), v.u(i, j, b, k), -v.g(i, b, k)])

        # observed-configuration decoding
        for w in all_observed(n, s):
            for j in range(n):
                clause = [v.d(w, j, k)]
                for i in range(n):
                    for b in range(B):
                        if (w[i] >> b) & 1:
                            clause.append(-v.u(i, j, b, k))
                        else:
                            clause.append(v.u(i, j, b, k))
                self._add(clause)
                if self.strengthen_observations:
                    for i in range(n):
                        for b in range(B):
                            lit = v.u(i, j, b, k)
                            self._add([-v.d(w, j, k),
                                       lit if (w[i] >> b) & 1 else -lit])

        # transition: the state at k follows the table on what was seen at k-1
        if k > 0:
            for w in all_observed(n, s):
                for i in range(n):
                    for b in range(B):
                        self._add([-v.d(w, i, k - 1), -v.g(i, b, k), v.a(w, i, b)])
                        self._add([-v.d(w, i, k - 1), v.g(i, b, k), -v.a(w, i, b)])

        # stabilisation indicators
        for i in range(n):
            self._add([-v.z(k), v.zi(i, k)])
            self._add([-v.o(k), v.oi(i, k)])
        self._add([v.z(k)] + [-v.zi(i, k) for i in range(n)])
        self._add([v.o(k)] + [-v.oi(i, k) for i in range(n)])
        for i in range(n):
            self._add([-v.p(i), v.zi(i, k)])
            self._add([-v.p(i), v.oi(i, k)])
            for b in range(B):
                self._add([-v.zi(i, k), v.p(i), -v.g(i, b, k)])
            self._add([v.zi(i, k)] + [v.g(i, b, k) for b in range(B)])
            self._add([-v.oi(i, k), v.p(i), v.g(i, 0, k)])
            for b in range(1, B):
                self._add([-v.oi(i, k), v.p(i), -v.g(i, b, k)])
            self._add([v.oi(i, k), -v.g(i, 0, k)] +
                      [v.g(i, b, k) for b in range(1, B)])

        # loop flag: the run returned to its starting configuration
        if k > 0:
            for i in range(n):
                for b in range(B):
                    self._add([-v.loop(k), v.p(i), -v.g(i, b, 0), v.g(i, b, k)])
                    self._add([-v.loop(k), v.p(i), v.g(i, b, 0), -v.g(i, b, k)])

    # -- model decoding -----------------------------------------------------

    def _truth(self, model, var: int) -> bool:
        return model[var - 1] > 0

    def decode_fault_set(self, model) -> tuple[int, ...]:
        return tuple(i for i in range(self.params.n)
                     if self._truth(model, self.vars.p(i)))

    def _state_bits(self, model, bit_var) -> int:
        return sum(int(self._truth(model, bit_var(b))) << b
                   for b in range(self.B))

    def decode_algorithm(self, model) -> Algorithm:
        n, s = self.params.n, self.params.s
        nodes = (0,) if self.klass == CYCLIC else tuple(range(n))
        tables = []
        for i in nodes:
            tables.append(tuple(
                self._state_bits(model, lambda b, w=w, i=i: self.vars.a(w, i, b))
                for w in all_observed(n, s)))
        return Algorithm(self.params, self.klass, tuple(tables))

    def decode_execution(self, model, horizon: int) -> Execution:
        n, s = self.params.n, self.params.s
        fs = self.decode_fault_set(model)
        configs = []
        for k in range(horizon + 1):
            x = tuple(
                s if i in fs else
                self._state_bits(model, lambda b, i=i, k=k: self.vars.g(i, b, k))
                for i in range(n))
            configs.append(x)
        return Execution(fs, tuple(configs))

    def decode_observed(self, model, j: int, k: int) -> Config:
        """Configuration node j saw at timepoint k."""
        return tuple(
            self._state_bits(model, lambda b, i=i: self.vars.u(i, j, b, k))
            for i in range(self.params.n))

    def algorithm_assumptions(self, model) -> list[int]:
        """Gamma: the a-literals pinning the candidate of this model."""
        n, s = self.params.n, self.params.s
        nodes = (0,) if self.klass == CYCLIC else tuple(range(n))
        out = []
        for i in nodes:
            for w in all_observed(n, s):
                for b in range(self.B):
                    var = self.vars.a(w, i, b)
                    out.append(var if self._truth(model, var) else -var)
        return out

    # -- refinement ---------------------------------------------------------

    def forbid(self, model, horizon: int) -> list[int]:
        """Clause flipping at least one transition bit used along the run.

        If the run loops back to its start before the horizon, only the
        loop's own steps are used (a strictly stronger clause).
        """
        execo = self.decode_execution(model, horizon)
        for h in range(1, horizon + 1):
            if execo.configs[h] == execo.configs[0]:
                horizon = h
                break
        fs = set(execo.fault_set)
        lits: dict[int, int] = {}
        for i in range(self.params.n):
            if i in fs:
                continue
            for j in range(horizon):
                w = self.decode_observed(model, i, j)
                for b in range(self.B):
                    var = self.vars.a(w, i, b)
                    lits[var] = -var if self._truth(model, var) else var
        clause = sorted(lits.values(), key=abs)
        if not clause:
            raise RefinementContradiction(
                "empty refinement clause: no candidates remain")
        self._add(clause)
        return clause


@dataclass
class SynthesisOutcome:
    """Result of a counterexample-guided search run."""

    status: str  # found | unrealizable | timeout
    algorithm: Algorithm | None = None
    achieved_t: int | None = None
    unrealizable_t: int | None = None
    iterations: int = 0
    refinements: int = 0
    solves: int = 0
    elapsed: float = 0.0
    intermediates: list = field(default_factory=list)
    log: list = field(default_factory=list)

    @property
    def realizable(self) -> bool:
        return self.status == FOUND


class _Budget:
    def __init__(self, time_budget: float | None, max_iterations: int | None):
        self.deadline = None if time_budget is None else \
            time.monotonic() + time_budget
        self.max_iterations = max_iterations

    def exhausted(self, iterations: int) -> bool:
        if self.deadline is not None and time.monotonic() > self.deadline:
            return True
        return (self.max_iterations is not None
                and iterations >= self.max_iterations)


class CegarSearch:
    """Shared plumbing of the three search variants."""

    def __init__(self, params: Params, klass: str = GENERAL,
                 session: IncrementalSession | None = None,
                 strengthen_observations: bool = False,
                 verify_candidates: bool = True,
                 progress=None):
        self.enc = CegarEncoding(params, klass, session,
                                 strengthen_observations)
        self.params = params
        self.klass = klass
        self.verify_candidates = verify_candidates
        self.solves = 0
        self.refinements = 0
        self._progress = progress

    def _log(self, event: str, **info) -> None:
        if self._progress is not None:
            self._progress(dict(event=event, **info))

    def _solve(self, assumptions=()) -> SolveResult:
        self.solves += 1
        return self.enc.session.solve_under(assumptions)

    def _prepare(self) -> None:
        """Base formula, two timepoints, and the two-step sanity sweep that
        removes candidates not oscillating out of the good configurations."""
        self.enc.build_base()
        self.enc.add_tau(0)
        self.enc.add_tau(1)
        v = self.enc.vars
        for pattern in ([v.z(0), -v.o(1)], [v.o(0), -v.z(1)]):
            while True:
                res = self._solve(pattern)
                if not res.is_sat:
                    break
                self.enc.forbid(res.model, 1)
                self.refinements += 1
        self._log("base-ready", clauses=self.enc.clauses_added)

    def _loop_counterexample(self, gamma, k_max: int):
        """Smallest k <= k_max admitting a bad loop for the pinned candidate."""
        v = self.enc.vars
        for j in range(1, k_max + 1):
            res = self._solve(gamma + [v.loop(j), -v.z(0), -v.o(0)])
            if res.is_sat:
                return j, res.model
        return None, None

    def _checked(self, alg: Algorithm, t: int) -> Algorithm:
        if self.verify_candidates:
            report = check_stabilization(alg, t=t)
            if not report.stabilizes:
                raise RuntimeError(
                    f"CEGAR returned a candidate failing verification at t={t}")
        return alg


def run_basic(params: Params, klass: str = GENERAL,
              time_budget: float | None = None,
              max_iterations: int | None = None,
              session: IncrementalSession | None = None,
              progress=None) -> SynthesisOutcome:
    """Plain guess-and-refute search at the fixed horizon t."""
    start = time.monotonic()
    search = CegarSearch(params, klass, session, progress=progress)
    budget = _Budget(time_budget, max_iterations)
    enc, v = search.enc, search.enc.vars
    search._prepare()
    for k in range(2, params.t + 1):
        enc.add_tau(k)
    iterations = 0
    outcome = SynthesisOutcome(status=TIMEOUT)
    while not budget.exhausted(iterations):
        iterations += 1
        res = search._solve()
        if not res.is_sat:
            outcome = SynthesisOutcome(UNREALIZABLE, unrealizable_t=params.t)
            break
        gamma = enc.algorithm_assumptions(res.model)
        cex = search._solve(gamma + [-v.z(params.t), -v.o(params.t)])
        if cex.is_sat:
            try:
                enc.forbid(cex.model, params.t)
            except RefinementContradiction:
                outcome = SynthesisOutcome(UNREALIZABLE, unrealizable_t=params.t)
                break
            search.refinements += 1
            search._log("refined", iteration=iterations,
                        refinements=search.refinements)
            continue
        alg = search._checked(enc.decode_algorithm(res.model), params.t)
        outcome = SynthesisOutcome(FOUND, algorithm=alg, achieved_t=params.t)
        break
    outcome.iterations = iterations
    outcome.refinements = search.refinements
    outcome.solves = search.solves
    outcome.elapsed = time.monotonic() - start
    return outcome


def run_shortloop(params: Params, klass: str = GENERAL,
                  time_budget: float | None = None,
                  max_iterations: int | None = None,
                  session: IncrementalSession | None = None,
                  progress=None) -> SynthesisOutcome:
    """Fixed-horizon search preferring the smallest loop counterexample."""
    start = time.monotonic()
    search = CegarSearch(params, klass, session, progress=progress)
    budget = _Budget(time_budget, max_iterations)
    enc, v = search.enc, search.enc.vars
    search._prepare()
    for k in range(2, params.t + 1):
        enc.add_tau(k)
    iterations = 0
    outcome = SynthesisOutcome(status=TIMEOUT)
    while not budget.exhausted(iterations):
        iterations += 1
        res = search._solve()
        if not res.is_sat:
            outcome = SynthesisOutcome(UNREALIZABLE, unrealizable_t=params.t)
            break
        gamma = enc.algorithm_assumptions(res.model)
        k_star, sigma = search._loop_counterexample(gamma, params.t)
        if k_star is None:
            cex = search._solve(gamma + [-v.z(params.t), -v.o(params.t)])
            if not cex.is_sat:
                alg = search._checked(enc.decode_algorithm(res.model), params.t)
                outcome = SynthesisOutcome(FOUND, algorithm=alg,
                                           achieved_t=params.t)
                break
            k_star, sigma = params.t, cex.model
        try:
            enc.forbid(sigma, k_star)
        except RefinementContradiction:
            outcome = SynthesisOutcome(UNREALIZABLE, unrealizable_t=params.t)
            break
        search.refinements += 1
        search._log("refined", iteration=iterations, loop_k=k_star,
                    refinements=search.refinements)
    outcome.iterations = iterations
    outcome.refinements = search.refinements
    outcome.solves = search.solves
    outcome.elapsed = time.monotonic() - start
    return outcome


def max_stabilization_time(params: Params) -> int:
    """Every stabilising algorithm does so within s^(n-f) - 2 rounds."""
    return params.s ** (params.n - params.f) - 2


def run_overshoot(params: Params, klass: str = GENERAL,
                  t_target: int | None = None,
                  time_budget: float | None = None,
                  max_iterations: int | None = None,
                  session: IncrementalSession | None = None,
                  progress=None) -> SynthesisOutcome:
    """Unroll-on-demand search: find some stabilising algorithm first, then
    keep tightening the bound; ``t_target=None`` means unbounded (capped by
    the finite state space)."""
    start = time.monotonic()
    t_max = max_stabilization_time(params)
    t = t_max if t_target is None else min(t_target, t_max)
    search = CegarSearch(params, klass, session, progress=progress)
    budget = _Budget(time_budget, max_iterations)
    enc, v = search.enc, search.enc.vars
    search._prepare()
    k = 1
    iterations = 0
    best: tuple[Algorithm, int] | None = None
    outcome = None
    intermediates: list[tuple[Algorithm, int]] = []

    def finish(status, unrealizable_t=None):
        out = SynthesisOutcome(status)
        if best is not None:
            out.status = FOUND
            out.algorithm, out.achieved_t = best
        if status == UNREALIZABLE:
            out.unrealizable_t = unrealizable_t
        return out

    while outcome is None:
        if budget.exhausted(iterations):
            outcome = finish(TIMEOUT)
            break
        iterations += 1
        res = search._solve([v.z(0)])
        if not res.is_sat:
            outcome = finish(UNREALIZABLE, unrealizable_t=t)
            break
        gamma = enc.algorithm_assumptions(res.model)
        skip_loop_search = False
        while True:
            if not skip_loop_search:
                j, sigma = search._loop_counterexample(gamma, k)
                if j is not None:
                    try:
                        enc.forbid(sigma, j)
                    except RefinementContradiction:
                        outcome = finish(UNREALIZABLE, unrealizable_t=t)
                        break
                    search.refinements += 1
                    search._log("refined-loop", iteration=iterations, k=j)
                    break
            skip_loop_search = False
            cex = search._solve(gamma + [-v.z(k), -v.o(k)])
            if cex.is_sat:
                if k < t:
                    k += 1
                    enc.add_tau(k)
                    search._log("unrolled", k=k)
                    continue
                try:
                    enc.forbid(cex.model, k)
                except RefinementContradiction:
                    outcome = finish(UNREALIZABLE, unrealizable_t=t)
                    break
                search.refinements += 1
                search._log("refined", iteration=iterations, k=k)
                break
            # no counterexample of length k: the candidate stabilises in k
            alg = enc.decode_algorithm(res.model)
            alg = Algorithm(replace(params, t=k), alg.klass, alg.tables)
            search._checked(alg, k)
            best = (alg, k)
            intermediates.append(best)
            search._log("verified", achieved_t=k)
            if k == 0:
                outcome = finish(FOUND)
                break
            k -= 1
            t = k
            skip_loop_search = True

    outcome.iterations = iterations
    outcome.refinements = search.refinements
    outcome.solves = search.solves
    outcome.intermediates = intermediates
    outcome.elapsed = time.monotonic() - start
    return outcome
