"""Exact verification of counting algorithms via projection graphs.

For a fault set F the projection graph has one node per actual
configuration and an edge (x, y) whenever the adversary can steer the
system from x to y in one round.  An algorithm stabilises in t rounds iff,
for every admissible F, (1) the two good configurations form an exclusive
2-cycle and (2) no walk of length t avoids them.  Condition (2) is decided
by iterating the bad sets B(0) = V \\ {good} and
B(d+1) = {x : some edge (x, y) has y in B(d)}; the smallest d with
B(d) empty is the exact stabilisation time for that F.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import (
    Algorithm,
    Config,
    CYCLIC,
    Execution,
    enumerate_actuals,
    good_configs,
    normalize_fault_set,
    render_config,
)

DEFAULT_NODE_CAP = 300_000


class ProjectionSizeError(Exception):
    """Raised when a projection graph would exceed the configured cap."""


def reachable_state_sets(alg: Algorithm, fault_set, x: Config) -> dict[int, set[int]]:
    """Per non-faulty node, the states the adversary can force from ``x``.

    Enumerates the s^|F| fillings of the wildcard slots independently per
    node: misinformation need not be consistent between recipients.
    """
    n, s = alg.params.n, alg.params.s
    fs = sorted(set(fault_set))
    free = [i for i in range(n) if i not in fs]
    out: dict[int, set[int]] = {i: set() for i in free}
    u = list(x)
    for filling in itertools.product(range(s), repeat=len(fs)):
        for slot, v in zip(fs, filling):
            u[slot] = v
        for i in free:
            out[i].add(alg.transition(i, u))
    return out


def is_reachable(alg: Algorithm, fault_set, x: Config, y: Config) -> bool:
    """True iff configuration ``y`` is one-round reachable from ``x``."""
    sets = reachable_state_sets(alg, fault_set, x)
    return all(y[i] in states for i, states in sets.items())


@dataclass(frozen=True)
class ProjectionGraph:
    """Reachability graph over the actual configurations of one fault set.

    ``succ[i]`` lists the successor node indices of node ``i`` in ascending
    order.  ``bad_sets[d]`` is B(d) as a frozenset of node indices; the
    sequence ends either with an empty set (the algorithm escapes every bad
    walk) or with a repeated non-empty fixed point (it never does).
    """

    fault_set: tuple[int, ...]
    s: int
    nodes: tuple[Config, ...]
    succ: tuple[tuple[int, ...], ...]
    good0: int
    good1: int
    bad_sets: tuple[frozenset[int], ...]

    @property
    def cond1_ok(self) -> bool:
        return (self.succ[self.good0] == (self.good1,)
                and self.succ[self.good1] == (self.good0,))

    @property
    def num_edges(self) -> int:
        return sum(len(ss) for ss in self.succ)

    @property
    def stab_time(self) -> int | None:
        """Smallest d with B(d) empty, or None if B never empties."""
        if not self.bad_sets[-1]:
            return len(self.bad_sets) - 1
        return None

    def bad_at(self, d: int) -> frozenset[int]:
        """B(d), extending the trailing fixed point beyond the stored levels."""
        if d < len(self.bad_sets):
            return self.bad_sets[d]
        return self.bad_sets[-1]


def build_projection_graph(alg: Algorithm, fault_set,
                           node_cap: int = DEFAULT_NODE_CAP) -> ProjectionGraph:
    """Construct the projection graph and its bad-set sequence for one F."""
    n, s = alg.params.n, alg.params.s
    fs = normalize_fault_set(fault_set, n, alg.params.f)
    size = s ** (n - len(fs))
    if size > node_cap:
        raise ProjectionSizeError(
            f"projection graph for F={set(fs)} has {size} nodes, cap is {node_cap}")

    nodes = tuple(enumerate_actuals(n, s, fs))
    index = {x: i for i, x in enumerate(nodes)}
    free = [i for i in range(n) if i not in fs]

    succ: list[tuple[int, ...]] = []
    for x in nodes:
        per_node = reachable_state_sets(alg, fs, x)
        targets = []
        for combo in itertools.product(*(sorted(per_node[i]) for i in free)):
            y = list(x)
            for i, v in zip(free, combo):
                y[i] = v
            targets.append(index[tuple(y)])
        succ.append(tuple(sorted(targets)))

    g0, g1 = good_configs(n, s, fs)
    good0, good1 = index[g0], index[g1]

    levels = [frozenset(i for i in range(len(nodes)) if i not in (good0, good1))]
    while levels[-1]:
        cur = levels[-1]
        nxt = frozenset(i for i in range(len(nodes))
                        if any(j in cur for j in succ[i]))
        if nxt == cur:
            break  # non-empty fixed point: some walk avoids the goods forever
        levels.append(nxt)

    return ProjectionGraph(fault_set=fs, s=s, nodes=nodes, succ=tuple(succ),
                           good0=good0, good1=good1, bad_sets=tuple(levels))


def fault_sets_for(n: int, f: int, cyclic: bool) -> list[tuple[int, ...]]:
    """Fault sets whose projection graphs decide correctness.

    General algorithms need every F with |F| <= f.  For cyclic algorithms
    the graphs of fault sets related by rotation are isomorphic, so one
    representative per rotation orbit suffices; with f = 1 that is just the
    empty set and {0}.
    """
    subsets = [fs for k in range(f + 1)
               for fs in itertools.combinations(range(n), k)]
    if not cyclic:
        return subsets
    reps = []
    seen: set[tuple[int, ...]] = set()
    for fs in subsets:
        orbit = min(tuple(sorted((i + r) % n for i in fs)) for r in range(n))
        if orbit not in seen:
            seen.add(orbit)
            reps.append(fs)
    return reps


def fault_sets_to_check(alg: Algorithm) -> list[tuple[int, ...]]:
    return fault_sets_for(alg.params.n, alg.params.f, alg.klass == CYCLIC)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a stabilisation check at a time bound."""

    s: int
    t: int
    t0: int | None
    stabilizes: bool
    times: dict[tuple[int, ...], int | None]
    counterexample: Execution | None

    @property
    def exact_time(self) -> int | None:
        """Worst stabilisation time over the checked fault sets."""
        vals = list(self.times.values())
        if any(v is None for v in vals):
            return None
        return max(vals) if vals else 0

    def to_text(self) -> str:
        lines = []
        for fs in sorted(self.times):
            d = self.times[fs]
            fset = "{" + ",".join(str(i) for i in fs) + "}"
            lines.append(f"F={fset} stab_time={'inf' if d is None else d}")
        if self.counterexample is not None:
            ce = self.counterexample
            fset = "{" + ",".join(str(i) for i in ce.fault_set) + "}"
            lines.append(f"counterexample F={fset}")
            lines.extend(f"{r} {render_config(x, self.s)}"
                         for r, x in enumerate(ce.configs))
        return "\n".join(lines) + "\n"


def check_stabilization(alg: Algorithm, t: int | None = None,
                        t0: int | None = None,
                        fault_sets=None,
                        node_cap: int = DEFAULT_NODE_CAP) -> VerificationReport:
    """Verify stabilisation within ``t`` rounds (``t0`` for the fault-free
    case when given), across all admissible fault sets."""
    if t is None:
        t = alg.params.t
    if t0 is None:
        t0 = alg.params.t0
    if fault_sets is None:
        fault_sets = fault_sets_to_check(alg)

    times: dict[tuple[int, ...], int | None] = {}
    counterexample = None
    ok = True
    for fs in fault_sets:
        fs = normalize_fault_set(fs, alg.params.n, alg.params.f)
        graph = build_projection_graph(alg, fs, node_cap=node_cap)
        bound = t0 if (not fs and t0 is not None) else t
        if not graph.cond1_ok:
            times[fs] = None
        else:
            times[fs] = graph.stab_time
        good_here = times[fs] is not None and times[fs] <= bound
        if not good_here and ok:
            ok = False
            counterexample = extract_counterexample(graph, bound)
    return VerificationReport(s=alg.params.s, t=t, t0=t0, stabilizes=ok,
                              times=times, counterexample=counterexample)


def extract_counterexample(graph: ProjectionGraph, t: int) -> Execution:
    """A concrete non-stabilising run of length <= t+1 from the bad sets."""
    if not graph.cond1_ok:
        for g in (graph.good0, graph.good1):
            partner = graph.good1 if g == graph.good0 else graph.good0
            for y in graph.succ[g]:
                if y != partner:
                    return Execution(graph.fault_set,
                                     (graph.nodes[g], graph.nodes[y]))
    if graph.stab_time is not None and graph.stab_time <= t:
        raise ValueError(f"graph stabilises in {graph.stab_time} <= t={t}")
    x = min(graph.bad_at(t))
    walk = [x]
    for d in range(t, 0, -1):
        below = graph.bad_at(d - 1)
        x = min(y for y in graph.succ[x] if y in below)
        walk.append(x)
    return Execution(graph.fault_set, tuple(graph.nodes[i] for i in walk))


def replay(alg: Algorithm, execution: Execution) -> bool:
    """Check an execution step by step against the reachability relation."""
    pairs = zip(execution.configs, execution.configs[1:])
    return all(is_reachable(alg, execution.fault_set, x, y) for x, y in pairs)


def node_depths(graph: ProjectionGraph) -> dict[int, int | None]:
    """Rounds needed before a node is forced into the good cycle.

    depth(x) = smallest d with x not in B(d); good nodes get 0, nodes that
    can avoid the goods forever get None.
    """
    depths: dict[int, int | None] = {}
    for i in range(len(graph.nodes)):
        depths[i] = None
        for d, level in enumerate(graph.bad_sets):
            if i not in level:
                depths[i] = d
                break
        if depths[i] is None and graph.stab_time is not None:
            depths[i] = len(graph.bad_sets) - 1
    return depths


def export_dot(graph: ProjectionGraph) -> str:
    """Render as a DOT digraph, clustered by stabilisation depth."""
    depths = node_depths(graph)
    clusters: dict[int | None, list[int]] = {}
    for i, d in depths.items():
        clusters.setdefault(d, []).append(i)

    def key(d):
        return (1, 0) if d is None else (0, d)

    lines = ["digraph projection {", "  rankdir=LR;"]
    for d in sorted(clusters, key=key):
        name = "unbounded" if d is None else str(d)
        lines.append(f"  subgraph cluster_{name} {{")
        lines.append(f'    label="depth {name}";')
        for i in sorted(clusters[d]):
            label = render_config(graph.nodes[i], graph.s)
            lines.append(f'    x{i} [label="{label}"];')
        lines.append("  }")
    for i, targets in enumerate(graph.succ):
        for j in targets:
            lines.append(f"  x{i} -> x{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
