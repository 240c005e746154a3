"""Self-contained incremental CDCL SAT solver with a numba-compiled core.

This is the bundled fallback backend: the package has no hard dependency on
an external SAT solver.  It is a MiniSAT-style solver -- two watched
literals with blockers, first-UIP learning with clause minimisation, VSIDS
with phase saving, Luby restarts, LBD-guided clause-database reduction, and
MiniSAT's assumption protocol for incremental solving.  No inprocessing;
adequate for desk-scale instances, not a competitive solver.

Internally a literal is ``2*var + sign`` (sign 1 = negated); the public
interface speaks signed DIMACS integers.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit

# _search exit codes
SAT = 10
UNSAT = 20
UNSAT_ASSUMPS = 30
GROW = 1
BUDGET = 2
REDUCE = 3

# regs slots
R_TRAIL = 0
R_QHEAD = 1
R_CDB = 2       # clause-db fill pointer
R_WLEN = 3      # watcher-node fill pointer
R_LEVEL = 4     # current decision level
R_CONFL = 5
R_DECIS = 6
R_PROPS = 7
R_HSIZE = 8     # heap size
R_RESTARTS = 9
R_LCOUNT = 10   # live learned clauses
R_REDUCE_AT = 11
R_STAMP = 12    # LBD stamp counter

VAR_DECAY = 0.95
RESCALE = 1e100
LBD_KEEP = 3


@njit(cache=True, inline="always")
def _val(assigns, lit):
    # 0 true, 1 false, >=2 unassigned
    return assigns[lit >> 1] ^ (lit & 1)


@njit(cache=True)
def _heap_up(heap, hpos, activity, i):
    v = heap[i]
    a = activity[v]
    while i > 0:
        parent = (i - 1) >> 1
        pv = heap[parent]
        if activity[pv] >= a:
            break
        heap[i] = pv
        hpos[pv] = i
        i = parent
    heap[i] = v
    hpos[v] = i


@njit(cache=True)
def _heap_down(heap, hpos, activity, regs, i):
    size = regs[R_HSIZE]
    v = heap[i]
    a = activity[v]
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        right = left + 1
        child = left
        if right < size and activity[heap[right]] > activity[heap[left]]:
            child = right
        cv = heap[child]
        if activity[cv] <= a:
            break
        heap[i] = cv
        hpos[cv] = i
        i = child
    heap[i] = v
    hpos[v] = i


@njit(cache=True)
def _heap_insert(heap, hpos, activity, regs, v):
    if hpos[v] >= 0:
        return
    i = regs[R_HSIZE]
    heap[i] = v
    hpos[v] = i
    regs[R_HSIZE] = i + 1
    _heap_up(heap, hpos, activity, i)


@njit(cache=True)
def _heap_pop(heap, hpos, activity, regs):
    v = heap[0]
    regs[R_HSIZE] -= 1
    last = heap[regs[R_HSIZE]]
    hpos[v] = -1
    if regs[R_HSIZE] > 0:
        heap[0] = last
        hpos[last] = 0
        _heap_down(heap, hpos, activity, regs, 0)
    return v


@njit(cache=True, inline="always")
def _enqueue(lit, reason_ref, assigns, level, reason, trail, regs):
    v = lit >> 1
    assigns[v] = lit & 1
    level[v] = regs[R_LEVEL]
    reason[v] = reason_ref
    trail[regs[R_TRAIL]] = lit
    regs[R_TRAIL] += 1


@njit(cache=True)
def _propagate(cdb, whead, wnext, wcl, wblk, assigns, level, reason, trail, regs):
    while regs[R_QHEAD] < regs[R_TRAIL]:
        p = trail[regs[R_QHEAD]]
        regs[R_QHEAD] += 1
        regs[R_PROPS] += 1
        falsified = p ^ 1
        node = whead[falsified]
        prev = -1
        while node != -1:
            nxt = wnext[node]
            if _val(assigns, wblk[node]) == 0:
                prev = node
                node = nxt
                continue
            ref = wcl[node]
            size = cdb[ref]
            if cdb[ref + 1] == falsified:
                cdb[ref + 1] = cdb[ref + 2]
                cdb[ref + 2] = falsified
            w0 = cdb[ref + 1]
            if _val(assigns, w0) == 0:
                wblk[node] = w0
                prev = node
                node = nxt
                continue
            moved = False
            for k in range(ref + 3, ref + 1 + size):
                lk = cdb[k]
                if _val(assigns, lk) != 1:
                    cdb[ref + 2] = lk
                    cdb[k] = falsified
                    if prev == -1:
                        whead[falsified] = nxt
                    else:
                        wnext[prev] = nxt
                    wnext[node] = whead[lk]
                    whead[lk] = node
                    wblk[node] = w0
                    moved = True
                    break
            if moved:
                node = nxt
                continue
            if _val(assigns, w0) == 1:
                regs[R_QHEAD] = regs[R_TRAIL]
                return ref
            _enqueue(w0, ref, assigns, level, reason, trail, regs)
            wblk[node] = w0
            prev = node
            node = nxt
    return -1


@njit(cache=True)
def _bump(v, activity, heap, hpos, fregs):
    activity[v] += fregs[0]
    if activity[v] > RESCALE:
        for u in range(activity.shape[0]):
            activity[u] *= 1.0 / RESCALE
        fregs[0] *= 1.0 / RESCALE
    if hpos[v] >= 0:
        _heap_up(heap, hpos, activity, hpos[v])


@njit(cache=True)
def _lit_redundant(q, abstract_levels, cdb, level, reason, seen, tocl,
                   ntocl, top, mstack):
    """Deep minimisation test: is q implied by the rest of the learnt
    clause (plus root facts)?  Marks visited vars seen; on failure rolls
    back the marks above ``top``.  Returns the new tocl count (negative
    encodes failure)."""
    msp = 0
    mstack[msp] = q
    msp += 1
    while msp > 0:
        msp -= 1
        ref = reason[mstack[msp] >> 1]
        size = cdb[ref]
        for m in range(ref + 2, ref + 1 + size):
            p = cdb[m]
            v = p >> 1
            if seen[v] == 0 and level[v] > 0:
                if reason[v] != -1 and (np.int64(1) << (level[v] & 63)) & abstract_levels != 0:
                    seen[v] = 1
                    mstack[msp] = p
                    msp += 1
                    tocl[ntocl] = v
                    ntocl += 1
                else:
                    for j in range(top, ntocl):
                        seen[tocl[j]] = 0
                    return -top - 1
    return ntocl


@njit(cache=True)
def _analyze(confl, cdb, assigns, level, reason, trail, regs, seen, learnt,
             tocl, mstack, activity, heap, hpos, fregs, lbd_stamp):
    """First-UIP learning with deep clause minimisation.

    Returns (learnt size, backjump level, lbd).
    """
    pathc = 0
    p = -1
    learnt_len = 1
    idx = regs[R_TRAIL] - 1
    ref = confl
    while True:
        size = cdb[ref]
        start = ref + 1
        j0 = 0 if p == -1 else 1  # reason clauses carry the implied lit first
        for k in range(start + j0, start + size):
            q = cdb[k]
            v = q >> 1
            if seen[v] == 0 and level[v] > 0:
                seen[v] = 1
                _bump(v, activity, heap, hpos, fregs)
                if level[v] >= regs[R_LEVEL]:
                    pathc += 1
                else:
                    learnt[learnt_len] = q
                    learnt_len += 1
        while seen[trail[idx] >> 1] == 0:
            idx -= 1
        p = trail[idx]
        idx -= 1
        v = p >> 1
        seen[v] = 0
        pathc -= 1
        if pathc <= 0:
            break
        ref = reason[v]
    learnt[0] = p ^ 1

    ntocl = learnt_len - 1
    for k in range(1, learnt_len):
        tocl[k - 1] = learnt[k] >> 1
    abstract_levels = np.int64(0)
    for k in range(1, learnt_len):
        abstract_levels |= np.int64(1) << (level[learnt[k] >> 1] & 63)
    j = 1
    for k in range(1, learnt_len):
        q = learnt[k]
        if reason[q >> 1] == -1:
            learnt[j] = q
            j += 1
            continue
        res = _lit_redundant(q, abstract_levels, cdb, level, reason, seen,
                             tocl, ntocl, ntocl, mstack)
        if res < 0:
            ntocl = -res - 1
            learnt[j] = q
            j += 1
        else:
            ntocl = res
    learnt_len = j

    bt = 0
    if learnt_len > 1:
        maxi = 1
        for k in range(2, learnt_len):
            if level[learnt[k] >> 1] > level[learnt[maxi] >> 1]:
                maxi = k
        tmp = learnt[1]
        learnt[1] = learnt[maxi]
        learnt[maxi] = tmp
        bt = level[learnt[1] >> 1]

    # glue: number of distinct decision levels in the learnt clause
    regs[R_STAMP] += 1
    stamp = regs[R_STAMP]
    lbd = 0
    for k in range(learnt_len):
        lv = level[learnt[k] >> 1]
        if lbd_stamp[lv] != stamp:
            lbd_stamp[lv] = stamp
            lbd += 1
    for k in range(ntocl):
        seen[tocl[k]] = 0
    return learnt_len, bt, lbd


@njit(cache=True)
def _cancel_until(lvl, assigns, level, reason, trail, trail_lim, regs,
                  polarity, heap, hpos, activity):
    if regs[R_LEVEL] <= lvl:
        return
    bound = trail_lim[lvl]
    for i in range(regs[R_TRAIL] - 1, bound - 1, -1):
        lit = trail[i]
        v = lit >> 1
        polarity[v] = assigns[v]
        assigns[v] = 2
        reason[v] = -1
        _heap_insert(heap, hpos, activity, regs, v)
    regs[R_TRAIL] = bound
    regs[R_QHEAD] = bound
    regs[R_LEVEL] = lvl


@njit(cache=True)
def _luby(x):
    # Luby sequence 1,1,2,1,1,2,4,... (0-based index)
    size = 1
    seq = 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


@njit(cache=True)
def _search(budget, assumptions, cdb, cdb_cap, whead, wnext, wcl, wblk, wcap,
            assigns, level, reason, trail, trail_lim, regs, fregs, seen,
            learnt, tocl, mstack, activity, polarity, heap, hpos, lrefs,
            llbd, lcap, lbd_stamp, nvars):
    restart_limit = 100 * _luby(regs[R_RESTARTS])
    confl_this = 0
    n_assumps = assumptions.shape[0]
    while True:
        # room for one worst-case learnt clause before every propagation:
        # conflicts can chain without passing the conflict-free branch
        if (cdb_cap - regs[R_CDB] < nvars + 2 or wcap - regs[R_WLEN] < 2
                or regs[R_LCOUNT] >= lcap):
            return GROW
        confl = _propagate(cdb, whead, wnext, wcl, wblk, assigns, level,
                           reason, trail, regs)
        if confl >= 0:
            regs[R_CONFL] += 1
            confl_this += 1
            if regs[R_LEVEL] == 0:
                return UNSAT
            lsize, bt, lbd = _analyze(confl, cdb, assigns, level, reason,
                                      trail, regs, seen, learnt, tocl, mstack,
                                      activity, heap, hpos, fregs, lbd_stamp)
            _cancel_until(bt, assigns, level, reason, trail, trail_lim, regs,
                          polarity, heap, hpos, activity)
            if lsize == 1:
                _enqueue(learnt[0], -1, assigns, level, reason, trail, regs)
            else:
                ref = regs[R_CDB]
                cdb[ref] = lsize
                for k in range(lsize):
                    cdb[ref + 1 + k] = learnt[k]
                regs[R_CDB] = ref + 1 + lsize
                lrefs[regs[R_LCOUNT]] = ref
                llbd[regs[R_LCOUNT]] = lbd
                regs[R_LCOUNT] += 1
                for w in range(2):
                    node = regs[R_WLEN]
                    lit = cdb[ref + 1 + w]
                    wcl[node] = ref
                    wblk[node] = cdb[ref + 1 + (1 - w)]
                    wnext[node] = whead[lit]
                    whead[lit] = node
                    regs[R_WLEN] = node + 1
                _enqueue(learnt[0], ref, assigns, level, reason, trail, regs)
            fregs[0] *= 1.0 / VAR_DECAY
            if confl_this >= budget:
                return BUDGET
            continue

        # conflict-free state
        if confl_this >= restart_limit and regs[R_LEVEL] > n_assumps:
            regs[R_RESTARTS] += 1
            _cancel_until(0, assigns, level, reason, trail, trail_lim, regs,
                          polarity, heap, hpos, activity)
            restart_limit = confl_this + 100 * _luby(regs[R_RESTARTS])
        if regs[R_LCOUNT] >= regs[R_REDUCE_AT]:
            _cancel_until(0, assigns, level, reason, trail, trail_lim, regs,
                          polarity, heap, hpos, activity)
            return REDUCE

        enqueued = False
        while regs[R_LEVEL] < n_assumps:
            p = assumptions[regs[R_LEVEL]]
            v = _val(assigns, p)
            if v == 0:
                trail_lim[regs[R_LEVEL]] = regs[R_TRAIL]
                regs[R_LEVEL] += 1
            elif v == 1:
                return UNSAT_ASSUMPS
            else:
                trail_lim[regs[R_LEVEL]] = regs[R_TRAIL]
                regs[R_LEVEL] += 1
                _enqueue(p, -1, assigns, level, reason, trail, regs)
                enqueued = True
                break
        if enqueued:
            continue

        branch = -1
        while regs[R_HSIZE] > 0:
            v = _heap_pop(heap, hpos, activity, regs)
            if assigns[v] == 2:
                branch = v
                break
        if branch == -1:
            return SAT
        regs[R_DECIS] += 1
        trail_lim[regs[R_LEVEL]] = regs[R_TRAIL]
        regs[R_LEVEL] += 1
        _enqueue(2 * branch + polarity[branch], -1, assigns, level, reason,
                 trail, regs)


class SolverError(Exception):
    pass


class MiniCdcl:
    """Incremental CDCL solver over signed DIMACS literals."""

    REDUCE_BASE = 4000
    REDUCE_GROWTH = 1.1

    def __init__(self, nvars: int = 0):
        self._nvars = 0
        cap = 1 << 14
        self.cdb = np.zeros(cap, dtype=np.int32)
        self.wnext = np.zeros(cap, dtype=np.int32)
        self.wcl = np.zeros(cap, dtype=np.int32)
        self.wblk = np.zeros(cap, dtype=np.int32)
        self.lrefs = np.zeros(1 << 12, dtype=np.int32)
        self.llbd = np.zeros(1 << 12, dtype=np.int32)
        self.whead = np.zeros(0, dtype=np.int32)
        self.assigns = np.zeros(0, dtype=np.uint8)
        self.level = np.zeros(0, dtype=np.int32)
        self.reason = np.zeros(0, dtype=np.int32)
        self.trail = np.zeros(0, dtype=np.int32)
        self.trail_lim = np.zeros(16, dtype=np.int32)
        self.activity = np.zeros(0, dtype=np.float64)
        self.polarity = np.zeros(0, dtype=np.uint8)
        self.seen = np.zeros(0, dtype=np.uint8)
        self.learnt = np.zeros(1, dtype=np.int32)
        self.tocl = np.zeros(1, dtype=np.int32)
        self.mstack = np.zeros(1, dtype=np.int32)
        self.lbd_stamp = np.zeros(16, dtype=np.int64)
        self.heap = np.zeros(0, dtype=np.int32)
        self.hpos = np.zeros(0, dtype=np.int32)
        self.regs = np.zeros(16, dtype=np.int64)
        self.regs[R_REDUCE_AT] = self.REDUCE_BASE
        self.fregs = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.float64)
        self._max_learnts: float | None = None
        self._ok = True
        self._orig_refs: list[int] = []
        self._root_units: list[int] = []
        if nvars:
            self.ensure_vars(nvars)

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def ok(self) -> bool:
        return self._ok

    def stats(self) -> dict[str, int]:
        return {"conflicts": int(self.regs[R_CONFL]),
                "decisions": int(self.regs[R_DECIS]),
                "propagations": int(self.regs[R_PROPS])}

    def ensure_vars(self, n: int) -> None:
        if n <= self._nvars:
            return
        old = self._nvars

        def grow(arr, size, fill):
            if size <= arr.shape[0]:
                return arr
            out = np.full(size, fill, dtype=arr.dtype)
            out[: arr.shape[0]] = arr
            return out

        self.whead = grow(self.whead, 2 * n, -1)
        self.assigns = grow(self.assigns, n, 2)
        self.level = grow(self.level, n, 0)
        self.reason = grow(self.reason, n, -1)
        self.trail = grow(self.trail, n, 0)
        # assumption levels can be dummies, so levels may exceed #vars
        self.trail_lim = grow(self.trail_lim, 3 * n + 8, 0)
        self.lbd_stamp = grow(self.lbd_stamp, 3 * n + 10, 0)
        self.activity = grow(self.activity, n, 0.0)
        self.polarity = grow(self.polarity, n, 1)
        self.seen = grow(self.seen, n, 0)
        self.learnt = grow(self.learnt, n + 1, 0)
        self.tocl = grow(self.tocl, n + 1, 0)
        self.mstack = grow(self.mstack, n + 1, 0)
        self.heap = grow(self.heap, n, 0)
        self.hpos = grow(self.hpos, n, -1)
        self._nvars = n
        for v in range(old, n):
            _heap_insert(self.heap, self.hpos, self.activity, self.regs, v)

    def _grow_cdb(self, need: int) -> None:
        cap = self.cdb.shape[0]
        while cap - self.regs[R_CDB] < need:
            cap *= 2
        if cap != self.cdb.shape[0]:
            out = np.zeros(cap, dtype=np.int32)
            out[: self.cdb.shape[0]] = self.cdb
            self.cdb = out

    def _grow_watchers(self, need: int) -> None:
        cap = self.wnext.shape[0]
        while cap - self.regs[R_WLEN] < need:
            cap *= 2
        if cap != self.wnext.shape[0]:
            for name in ("wnext", "wcl", "wblk"):
                arr = getattr(self, name)
                out = np.zeros(cap, dtype=np.int32)
                out[: arr.shape[0]] = arr
                setattr(self, name, out)

    def _grow_learned_meta(self) -> None:
        if self.regs[R_LCOUNT] < self.lrefs.shape[0]:
            return
        cap = self.lrefs.shape[0] * 2
        for name in ("lrefs", "llbd"):
            arr = getattr(self, name)
            out = np.zeros(cap, dtype=arr.dtype)
            out[: arr.shape[0]] = arr
            setattr(self, name, out)

    def _to_internal(self, lit: int) -> int:
        if lit == 0:
            raise SolverError("0 is not a literal")
        v = abs(lit) - 1
        if v >= self._nvars:
            self.ensure_vars(v + 1)
        return 2 * v + (1 if lit < 0 else 0)

    def add_clause(self, clause) -> bool:
        """Add a clause; returns False once the instance is root-unsat."""
        if not self._ok:
            return False
        lits = sorted({self._to_internal(l) for l in clause})
        out = []
        prev = -2
        for l in lits:
            if l ^ 1 == prev:
                return True  # tautology
            val = _val(self.assigns, l)
            if val == 0 and self.level[l >> 1] == 0:
                return True  # satisfied at root
            if val == 1 and self.level[l >> 1] == 0:
                prev = l
                continue  # falsified at root
            out.append(l)
            prev = l
        if not out:
            self._ok = False
            return False
        if len(out) == 1:
            l = out[0]
            val = _val(self.assigns, l)
            if val == 1:
                self._ok = False
                return False
            if val != 0:
                _enqueue(l, -1, self.assigns, self.level, self.reason,
                         self.trail, self.regs)
            self._root_units.append(l)
            return True
        self._grow_cdb(len(out) + 1)
        self._grow_watchers(2)
        ref = int(self.regs[R_CDB])
        self.cdb[ref] = len(out)
        self.cdb[ref + 1: ref + 1 + len(out)] = out
        self.regs[R_CDB] = ref + 1 + len(out)
        self._orig_refs.append(ref)
        self._watch(ref)
        return True

    def _watch(self, ref: int) -> None:
        for w in range(2):
            node = int(self.regs[R_WLEN])
            lit = int(self.cdb[ref + 1 + w])
            self.wcl[node] = ref
            self.wblk[node] = self.cdb[ref + 1 + (1 - w)]
            self.wnext[node] = self.whead[lit]
            self.whead[lit] = node
            self.regs[R_WLEN] = node + 1

    def add_clauses(self, clauses) -> bool:
        return all(self.add_clause(c) for c in clauses)

    def _reduce_db(self) -> None:
        """Drop the weakest half of the learned clauses and rebuild.

        Runs at decision level 0; level-0 reasons are nulled (those literals
        are root facts), so no clause is pinned.  Clauses are re-simplified
        against the root assignment while rebuilding.
        """
        nl = int(self.regs[R_LCOUNT])
        order = sorted(range(nl), key=lambda i: (int(self.llbd[i]),
                                                 int(self.cdb[self.lrefs[i]])))
        keep_n = nl // 2
        kept = [order[i] for i in range(nl)
                if i < keep_n or self.llbd[order[i]] <= LBD_KEEP]

        self.reason[: self._nvars] = -1
        live: list[tuple[int, int, bool]] = []  # (ref, lbd, original)
        live.extend((ref, 0, True) for ref in self._orig_refs)
        live.extend((int(self.lrefs[i]), int(self.llbd[i]), False)
                    for i in kept)
        live.sort()

        new_cdb = np.zeros(self.cdb.shape[0], dtype=np.int32)
        self.whead[:] = -1
        self.regs[R_WLEN] = 0
        pos = 0
        self._orig_refs = []
        nlearned = 0
        for ref, lbd, orig in live:
            size = int(self.cdb[ref])
            lits = []
            satisfied = False
            for k in range(ref + 1, ref + 1 + size):
                l = int(self.cdb[k])
                val = _val(self.assigns, l)
                if val == 0:
                    satisfied = True
                    break
                if val != 1:
                    lits.append(l)
            if satisfied:
                continue
            if not lits:
                self._ok = False
                continue
            if len(lits) == 1:
                _enqueue(lits[0], -1, self.assigns, self.level, self.reason,
                         self.trail, self.regs)
                self._root_units.append(lits[0])
                continue
            new_cdb[pos] = len(lits)
            new_cdb[pos + 1: pos + 1 + len(lits)] = lits
            if orig:
                self._orig_refs.append(pos)
            else:
                self.lrefs[nlearned] = pos
                self.llbd[nlearned] = lbd
                nlearned += 1
            pos += len(lits) + 1
        self.cdb = new_cdb
        self.regs[R_CDB] = pos
        self.regs[R_LCOUNT] = nlearned
        self._max_learnts = max(self._max_learnts * self.REDUCE_GROWTH,
                                nlearned + self.REDUCE_BASE / 2)
        self.regs[R_REDUCE_AT] = int(self._max_learnts)
        for ref in self._orig_refs:
            self._watch(ref)
        for i in range(nlearned):
            self._watch(int(self.lrefs[i]))

    def solve(self, assumptions=(), conflict_budget: int | None = None,
              time_budget: float | None = None):
        """Returns (status, model, stats): status in 'sat'/'unsat'/'unknown';
        model is a full signed assignment when sat."""
        start = time.monotonic()
        if not self._ok:
            return "unsat", None, self.stats()
        # exact duplicates would waste decision levels; contradictory pairs
        # must stay (they are how UNSAT-under-assumptions is detected)
        assumps = np.array(list(dict.fromkeys(
            self._to_internal(l) for l in assumptions)), dtype=np.int32)
        if self._max_learnts is None:
            self._max_learnts = max(self.REDUCE_BASE, len(self._orig_refs) / 3)
        self.regs[R_REDUCE_AT] = int(self._max_learnts)
        chunk = 8192
        spent = 0
        status = None
        while True:
            st = _search(chunk, assumps, self.cdb, self.cdb.shape[0],
                         self.whead, self.wnext, self.wcl, self.wblk,
                         self.wnext.shape[0], self.assigns, self.level,
                         self.reason, self.trail, self.trail_lim, self.regs,
                         self.fregs, self.seen, self.learnt, self.tocl,
                         self.mstack, self.activity, self.polarity, self.heap,
                         self.hpos, self.lrefs, self.llbd, self.lrefs.shape[0],
                         self.lbd_stamp, self._nvars)
            if st == GROW:
                self._grow_cdb(self._nvars + 2)
                self._grow_watchers(2)
                self._grow_learned_meta()
                continue
            if st == REDUCE:
                self._reduce_db()
                continue
            if st == BUDGET:
                spent += chunk
                out_of_time = (time_budget is not None
                               and time.monotonic() - start > time_budget)
                out_of_conflicts = (conflict_budget is not None
                                    and spent >= conflict_budget)
                if out_of_time or out_of_conflicts:
                    status = "unknown"
                    break
                continue
            if st == SAT:
                status = "sat"
                break
            if st in (UNSAT, UNSAT_ASSUMPS):
                if st == UNSAT:
                    self._ok = False
                status = "unsat"
                break
        model = None
        if status == "sat":
            model = [(v + 1) if self.assigns[v] == 0 else -(v + 1)
                     for v in range(self._nvars)]
            self._check_model(model)
        _cancel_until(0, self.assigns, self.level, self.reason, self.trail,
                      self.trail_lim, self.regs, self.polarity, self.heap,
                      self.hpos, self.activity)
        stats = self.stats()
        stats["time"] = time.monotonic() - start
        return status, model, stats

    def _check_model(self, model) -> None:
        """Guard against solver bugs: every original clause must be satisfied."""
        truth = [False] * (self._nvars + 1)
        for l in model:
            truth[abs(l)] = l > 0
        for l in self._root_units:
            want = (l & 1) == 0
            if truth[(l >> 1) + 1] != want:
                raise SolverError("model violates a root unit clause")
        for ref in self._orig_refs:
            size = int(self.cdb[ref])
            for k in range(ref + 1, ref + 1 + size):
                lit = int(self.cdb[k])
                if truth[(lit >> 1) + 1] == ((lit & 1) == 0):
                    break
            else:
                raise SolverError(f"model violates clause at ref {ref}")
