"""Domain model for synchronous 2-counting algorithms.

A system has ``n`` nodes, each a state machine over states ``[s] = {0..s-1}``.
Every round each node observes the full state vector (an *observed
configuration*, a length-``n`` tuple over ``[s]``) and moves to a new state.
Up to ``f`` nodes are Byzantine: their reported states are chosen by an
adversary, possibly differently per recipient.  An *actual configuration*
replaces the faulty entries by a wildcard; in packed form the wildcard is the
sentinel value ``s`` (one past the last valid state) and renders as ``*``.

Observed configurations are indexed by reading the state tuple left to right
as a base-``s`` numeral, i.e. node 0 is the most significant digit.  This
makes stored tables line up with square transition tables read row-major
(rows = first half of the nodes, columns = second half).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

Config = tuple[int, ...]

CYCLIC = "cyclic"
GENERAL = "general"

FILE_MAGIC = "counting-algorithm v1"


@dataclass(frozen=True)
class Params:
    """Instance parameters: node count, fault budget, states, time bound.

    ``t`` is the stabilisation bound in rounds; ``t0`` optionally tightens
    the bound for the fault-free case (``t0 <= t``).  The counting modulus
    is fixed to 2; larger moduli are obtained by layer composition.
    """

    n: int
    f: int
    s: int
    t: int
    t0: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if not 0 <= self.f < self.n:
            raise ValueError(f"need 0 <= f < n, got f={self.f}, n={self.n}")
        if self.s < 2:
            raise ValueError(f"need s >= 2, got {self.s}")
        if self.t < 0:
            raise ValueError(f"need t >= 0, got {self.t}")
        if self.t0 is not None and not 0 <= self.t0 <= self.t:
            raise ValueError(f"need 0 <= t0 <= t, got t0={self.t0}, t={self.t}")

    @property
    def num_observed(self) -> int:
        return self.s**self.n

    def num_actuals(self, fault_set: Iterable[int]) -> int:
        return self.s ** (self.n - len(set(fault_set)))


def config_index(u: Sequence[int], s: int) -> int:
    """Index of an observed configuration (base-s numeral, node 0 leading)."""
    idx = 0
    for v in u:
        idx = idx * s + v
    return idx


def config_from_index(idx: int, n: int, s: int) -> Config:
    """Inverse of :func:`config_index`."""
    out = [0] * n
    for i in range(n - 1, -1, -1):
        idx, out[i] = divmod(idx, s)
    return tuple(out)


def all_observed(n: int, s: int) -> Iterable[Config]:
    """All observed configurations in index order."""
    return itertools.product(range(s), repeat=n)


def rotate(u: Sequence[int], r: int) -> Config:
    """Cyclic left rotation: position ``r`` of ``u`` comes first."""
    r %= len(u)
    return tuple(u[r:]) + tuple(u[:r])


def normalize_fault_set(members: Iterable[int], n: int, f: int) -> tuple[int, ...]:
    """Validate and canonicalise a fault set to a sorted tuple."""
    fs = sorted(set(members))
    if fs and (fs[0] < 0 or fs[-1] >= n):
        raise ValueError(f"fault set {fs} not within [0, {n})")
    if len(fs) > f:
        raise ValueError(f"fault set {fs} exceeds budget f={f}")
    return tuple(fs)


def project(u: Sequence[int], fault_set: Iterable[int], s: int) -> Config:
    """Replace the faulty entries of ``u`` by the wildcard sentinel ``s``."""
    fs = set(fault_set)
    return tuple(s if i in fs else v for i, v in enumerate(u))


def enumerate_actuals(n: int, s: int, fault_set: Iterable[int]) -> list[Config]:
    """All actual configurations for a fault set, lexicographic over the
    non-faulty entries."""
    fs = set(fault_set)
    free = [i for i in range(n) if i not in fs]
    out = []
    for vals in itertools.product(range(s), repeat=len(free)):
        x = [s] * n
        for i, v in zip(free, vals):
            x[i] = v
        out.append(tuple(x))
    return out


def good_configs(n: int, s: int, fault_set: Iterable[int]) -> tuple[Config, Config]:
    """The two target configurations: all non-faulty nodes at 0 resp. 1."""
    fs = set(fault_set)
    zero = tuple(s if i in fs else 0 for i in range(n))
    one = tuple(s if i in fs else 1 for i in range(n))
    return zero, one


def render_config(x: Sequence[int], s: int) -> str:
    """Human-readable configuration; wildcard slots render as ``*``."""
    parts = ["*" if v == s else str(v) for v in x]
    if s <= 10:
        return "".join(parts)
    return ",".join(parts)


@dataclass(frozen=True)
class Algorithm:
    """A counting algorithm: one transition table per node.

    ``tables[i][j]`` is the new state of node ``i`` after observing the
    configuration with index ``j``.  Cyclic algorithms store only node 0's
    table; the other nodes' transitions are obtained by rotating the observed
    configuration so that the acting node's own entry comes first, which
    guarantees invariance under cyclic renaming by construction.
    """

    params: Params
    klass: str
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n, s = self.params.n, self.params.s
        if self.klass not in (CYCLIC, GENERAL):
            raise ValueError(f"unknown algorithm class {self.klass!r}")
        want = 1 if self.klass == CYCLIC else n
        if len(self.tables) != want:
            raise ValueError(f"{self.klass} algorithm needs {want} tables, got {len(self.tables)}")
        for tab in self.tables:
            if len(tab) != s**n:
                raise ValueError(f"table length {len(tab)} != s^n = {s**n}")
            if any(not 0 <= v < s for v in tab):
                raise ValueError("table entry out of range")

    def transition(self, i: int, u: Sequence[int]) -> int:
        """New state of node ``i`` on observing ``u``."""
        n, s = self.params.n, self.params.s
        if not 0 <= i < n:
            raise IndexError(f"node index {i} out of range [0, {n})")
        if self.klass == CYCLIC:
            return self.tables[0][config_index(rotate(u, i), s)]
        return self.tables[i][config_index(u, s)]

    def table_for(self, i: int) -> tuple[int, ...]:
        """Explicit lookup table of node ``i`` (materialised for cyclic)."""
        n, s = self.params.n, self.params.s
        if self.klass == GENERAL or i == 0:
            return self.tables[0] if self.klass == CYCLIC else self.tables[i]
        base = self.tables[0]
        return tuple(base[config_index(rotate(u, i), s)] for u in all_observed(n, s))

    def to_general(self) -> "Algorithm":
        """Same behaviour, stored as one explicit table per node."""
        if self.klass == GENERAL:
            return self
        tables = tuple(self.table_for(i) for i in range(self.params.n))
        return Algorithm(self.params, GENERAL, tables)


def _format_header(alg: Algorithm) -> str:
    p = alg.params
    return f"n={p.n} f={p.f} s={p.s} t={p.t} class={alg.klass}"


def write_algorithm(alg: Algorithm) -> str:
    """Serialise to the v1 text format (exact, trailing newline included)."""
    lines = [FILE_MAGIC, _format_header(alg)]
    lines.extend(" ".join(str(v) for v in tab) for tab in alg.tables)
    return "\n".join(lines) + "\n"


def save_algorithm(alg: Algorithm, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_algorithm(alg))


def parse_algorithm(text: str) -> Algorithm:
    """Parse the v1 text format; rejects any deviation from it."""
    lines = text.split("\n")
    if not text.endswith("\n"):
        raise ValueError("algorithm file must end with a newline")
    lines = lines[:-1]
    if len(lines) < 3:
        raise ValueError("truncated algorithm file")
    if lines[0] != FILE_MAGIC:
        raise ValueError(f"bad magic line {lines[0]!r}")
    fields = {}
    for part in lines[1].split(" "):
        key, _, val = part.partition("=")
        fields[key] = val
    try:
        klass = fields.pop("class")
        params = Params(n=int(fields.pop("n")), f=int(fields.pop("f")),
                        s=int(fields.pop("s")), t=int(fields.pop("t")))
    except KeyError as exc:
        raise ValueError(f"header missing field {exc}") from exc
    if fields:
        raise ValueError(f"unexpected header fields {sorted(fields)}")
    want = 1 if klass == CYCLIC else params.n
    if len(lines) - 2 != want:
        raise ValueError(f"expected {want} table lines, found {len(lines) - 2}")
    tables = tuple(tuple(int(v) for v in line.split(" ")) for line in lines[2:])
    return Algorithm(params, klass, tables)


def load_algorithm(path) -> Algorithm:
    with open(path) as fh:
        return parse_algorithm(fh.read())


def load_bundled(name: str) -> Algorithm:
    """Load one of the reference algorithms shipped with the package.

    ``table4``: cyclic, n=4, s=3, f=1, t=7.  ``table5``: general, n=6, s=2,
    f=1, t=6.
    """
    data = resources.files("syncount").joinpath(f"data/{name}.alg").read_text()
    return parse_algorithm(data)


@dataclass(frozen=True)
class Execution:
    """A finite run: actual configurations sharing one fault set."""

    fault_set: tuple[int, ...]
    configs: tuple[Config, ...]

    def __len__(self) -> int:
        return len(self.configs)

    def render(self, s: int) -> str:
        return "\n".join(f"{r} {render_config(x, s)}"
                         for r, x in enumerate(self.configs))
