"""Direct propositional encoding of the synthesis problem.

For fixed (n, f, s, t) and an algorithm class, builds a CNF that is
satisfiable iff a counting algorithm with those parameters exists.  The
variables describe the transition tables (``a``), the per-fault-set
adversary closure (``h``), the projection-graph edges (``e``) and the
bad-set unrolling (``b``); the clause families force the good 2-cycle to be
exclusive, forbid self-loops, and require the bad sets to die out by the
time bound.  Decoding a model yields the algorithm; unsatisfiability is a
mechanical nonexistence proof.

Cyclic algorithms are encoded by aliasing every ``a(u, i, c)`` to the
canonical ``a(rot_i(u), 0, c)``, and only the fault sets {} and {0} are
instantiated (projection graphs of rotated singleton fault sets are
isomorphic).  The optional fault-free bound ``t0`` shortens the bad-set
unrolling of the empty fault set only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import (
    Algorithm,
    Config,
    CYCLIC,
    GENERAL,
    Params,
    all_observed,
    config_index,
    enumerate_actuals,
    good_configs,
    rotate,
)
from .solvers import write_dimacs
from .verify import fault_sets_for

DEFAULT_VAR_CAP = 5_000_000


class EncodingSizeError(Exception):
    pass


class DecodeError(Exception):
    pass


@dataclass
class VarAtlas:
    """Bijective, reproducible mapping from encoding variables to DIMACS ids.

    Layout: the ``a`` block first, then per fault set (lexicographic order)
    the ``h``, ``e`` and ``b`` blocks.  Ids start at 1 and are contiguous.
    """

    params: Params
    klass: str
    fault_sets: tuple[tuple[int, ...], ...]
    num_vars: int = 0
    _offsets: dict = field(default_factory=dict)
    _actual_index: dict = field(default_factory=dict)
    _free: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        p = self.params
        n, s = p.n, p.s
        nodes = 1 if self.klass == CYCLIC else n
        self._offsets["a"] = 1
        nid = 1 + s**n * nodes * s
        for fs in self.fault_sets:
            actuals = enumerate_actuals(n, s, fs)
            self._actual_index[fs] = {x: i for i, x in enumerate(actuals)}
            free = tuple(i for i in range(n) if i not in fs)
            self._free[fs] = free
            size = len(actuals)
            bound = self.bound_for(fs)
            self._offsets[("h", fs)] = nid
            nid += size * len(free) * s
            self._offsets[("e", fs)] = nid
            nid += size * size
            self._offsets[("b", fs)] = nid
            nid += size * (bound + 1)
        self.num_vars = nid - 1

    def bound_for(self, fs: tuple[int, ...]) -> int:
        """Bad-set horizon for this fault set (t, or t0 when fault-free)."""
        p = self.params
        if not fs and p.t0 is not None:
            return p.t0
        return p.t

    def a(self, u: Config, i: int, c: int) -> int:
        p = self.params
        if self.klass == CYCLIC:
            u, i = rotate(u, i), 0
        return self._offsets["a"] + (config_index(u, p.s) * (1 if self.klass == CYCLIC else p.n) + i) * p.s + c

    def h(self, fs, x: Config, i: int, c: int) -> int:
        xi = self._actual_index[fs][x]
        pos = self._free[fs].index(i)
        s = self.params.s
        return self._offsets[("h", fs)] + (xi * len(self._free[fs]) + pos) * s + c

    def e(self, fs, x: Config, y: Config) -> int:
        idx = self._actual_index[fs]
        return self._offsets[("e", fs)] + idx[x] * len(idx) + idx[y]

    def b(self, fs, x: Config, d: int) -> int:
        xi = self._actual_index[fs][x]
        return self._offsets[("b", fs)] + xi * (self.bound_for(fs) + 1) + d

    def legend(self) -> list[str]:
        p = self.params
        t0 = "-" if p.t0 is None else p.t0
        lines = [f"params n={p.n} f={p.f} s={p.s} t={p.t} t0={t0} class={self.klass}",
                 f"block a offset={self._offsets['a']} layout=(u,i,c) row-major"]
        for fs in self.fault_sets:
            fset = "{" + ",".join(map(str, fs)) + "}"
            for kind in ("h", "e", "b"):
                lines.append(f"block {kind} F={fset} offset={self._offsets[(kind, fs)]}")
        return lines


@dataclass
class CnfInstance:
    num_vars: int
    clauses: list[list[int]]
    atlas: VarAtlas

    @property
    def params(self) -> Params:
        return self.atlas.params

    @property
    def klass(self) -> str:
        return self.atlas.klass


def encode(params: Params, klass: str = GENERAL,
           var_cap: int = DEFAULT_VAR_CAP) -> CnfInstance:
    """Build the synthesis CNF for the given parameters and class."""
    n, s, f = params.n, params.s, params.f
    fault_sets = tuple(fault_sets_for(n, f, klass == CYCLIC))
    atlas = VarAtlas(params, klass, fault_sets)
    if atlas.num_vars > var_cap:
        raise EncodingSizeError(
            f"encoding needs {atlas.num_vars} variables, cap is {var_cap}")

    clauses: list[list[int]] = []
    add = clauses.append

    # transition tables are total functions
    table_nodes = (0,) if klass == CYCLIC else tuple(range(n))
    for u in all_observed(n, s):
        for i in table_nodes:
            add([atlas.a(u, i, c) for c in range(s)])
            for c in range(s):
                for c2 in range(c + 1, s):
                    add([-atlas.a(u, i, c), -atlas.a(u, i, c2)])

    for fs in fault_sets:
        actuals = enumerate_actuals(n, s, fs)
        free = [i for i in range(n) if i not in fs]
        g0, g1 = good_configs(n, s, fs)
        bound = atlas.bound_for(fs)

        # adversary closure: any wildcard filling can drive node i to c
        for x in actuals:
            for filling in itertools.product(range(s), repeat=len(fs)):
                u = list(x)
                for slot, v in zip(fs, filling):
                    u[slot] = v
                u = tuple(u)
                for i in free:
                    for c in range(s):
                        add([-atlas.a(u, i, c), atlas.h(fs, x, i, c)])

        # forced states imply projection-graph edges
        for x in actuals:
            for y in actuals:
                add([-atlas.h(fs, x, i, y[i]) for i in free] + [atlas.e(fs, x, y)])

        # the good configurations form an exclusive 2-cycle, no self-loops
        add([atlas.e(fs, g0, g1)])
        add([atlas.e(fs, g1, g0)])
        for x in actuals:
            if x not in (g0, g1):
                add([-atlas.e(fs, g0, x)])
                add([-atlas.e(fs, g1, x)])
            add([-atlas.e(fs, x, x)])

        # bad sets: seeded everywhere but the goods, propagated backwards,
        # empty at the horizon
        add([-atlas.b(fs, g0, 0)])
        add([-atlas.b(fs, g1, 0)])
        for x in actuals:
            if x not in (g0, g1):
                add([atlas.b(fs, x, 0)])
        for x in actuals:
            for y in actuals:
                e = atlas.e(fs, x, y)
                for d in range(bound):
                    add([-e, -atlas.b(fs, y, d), atlas.b(fs, x, d + 1)])
        for x in actuals:
            add([-atlas.b(fs, x, bound)])

    return CnfInstance(num_vars=atlas.num_vars, clauses=clauses, atlas=atlas)


def decode(model, instance: CnfInstance) -> Algorithm:
    """Translate a satisfying assignment into an Algorithm.

    Rejects assignments that set no or several states for some entry (such
    assignments violate the totality/functionality families anyway).
    """
    atlas = instance.atlas
    p, s, n = instance.params, instance.params.s, instance.params.n
    truth = {abs(l): l > 0 for l in model}
    table_nodes = (0,) if instance.klass == CYCLIC else tuple(range(n))
    tables = []
    for i in table_nodes:
        table = []
        for u in all_observed(n, s):
            states = [c for c in range(s) if truth.get(atlas.a(u, i, c), False)]
            if len(states) != 1:
                raise DecodeError(
                    f"model sets {len(states)} states for node {i}, u={u}")
            table.append(states[0])
        tables.append(tuple(table))
    return Algorithm(p, instance.klass, tuple(tables))


def algorithm_assumptions(alg: Algorithm, atlas: VarAtlas) -> list[int]:
    """The a-literals pinning a concrete algorithm (for equivalence checks)."""
    n, s = alg.params.n, alg.params.s
    out = []
    table_nodes = (0,) if atlas.klass == CYCLIC else tuple(range(n))
    for i in table_nodes:
        for u in all_observed(n, s):
            v = alg.transition(i, u)
            for c in range(s):
                out.append(atlas.a(u, i, c) if c == v else -atlas.a(u, i, c))
    return out


def emit_dimacs(instance: CnfInstance) -> str:
    """DIMACS text with the atlas legend in the comment header."""
    return write_dimacs(instance.num_vars, instance.clauses,
                        comments=instance.atlas.legend())
