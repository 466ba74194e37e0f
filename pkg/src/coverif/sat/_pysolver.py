"""Pure-Python CDCL solver.

Two-watched-literal propagation, first-UIP learning with local clause
minimisation, VSIDS branching with phase saving, Luby restarts and
MiniSat-style solving under assumption literals.  Literals use the DIMACS
convention: variable ``v >= 1`` and its negation ``-v``.

The compiled core in ``_cdcl.pyx`` implements the same algorithm; keep the
two in step.
"""

from __future__ import annotations

import heapq
import time

from .errors import SolverLimit


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class PySolver:
    backend = "python"

    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []   # index -> literals (None when deleted)
        self.learnt: list[bool] = []
        self.watches: list[list[int]] = [[], []]  # literal index -> clause ids
        self.value: list[int] = [0]          # var -> 0 / 1 / -1
        self.level: list[int] = [0]
        self.reason: list[int] = [-1]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [-1]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.model: list[int] = []
        self.n_learnts = 0
        self.max_learnts = 2000
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.conflict_budget = 0  # 0 = unlimited
        self.time_budget = 0.0

    # -- construction --------------------------------------------------
    def new_var(self) -> int:
        self.nvars += 1
        self.value.append(0)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.phase.append(-1)
        self.watches.append([])
        self.watches.append([])
        heapq.heappush(self.heap, (0.0, self.nvars))
        return self.nvars

    def num_vars(self) -> int:
        return self.nvars

    def num_clauses(self) -> int:
        return sum(1 for c, l in zip(self.clauses, self.learnt) if c is not None and not l)

    @staticmethod
    def _idx(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _lval(self, lit: int) -> int:
        v = self.value[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def add_clause(self, lits) -> bool:
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        seen = set()
        out = []
        for lit in lits:
            v = abs(lit)
            if v == 0 or v > self.nvars:
                raise ValueError(f"literal {lit} refers to an unknown variable")
            if -lit in seen:
                return True  # tautology
            if lit in seen:
                continue
            lv = self._lval(lit)
            if lv == 1:
                return True
            if lv == -1:
                continue
            seen.add(lit)
            out.append(lit)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
            return self.ok
        self._attach(out, False)
        return True

    def _attach(self, lits: list[int], learnt: bool) -> int:
        cid = len(self.clauses)
        self.clauses.append(lits)
        self.learnt.append(learnt)
        self.watches[self._idx(-lits[0])].append(cid)
        self.watches[self._idx(-lits[1])].append(cid)
        return cid

    # -- core ----------------------------------------------------------
    def _enqueue(self, lit: int, reason: int) -> None:
        v = lit if lit > 0 else -lit
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause id or -1."""
        trail = self.trail
        value = self.value
        clauses = self.clauses
        watches = self.watches
        idx = self._idx
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            # clauses watching -p (stored under index of p's falsified literal)
            wl = watches[idx(p)]
            i = j = 0
            n = len(wl)
            false_lit = -p
            while i < n:
                cid = wl[i]
                i += 1
                c = clauses[cid]
                if c is None:
                    continue
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = value[first] if first > 0 else -value[-first]
                if fv == 1:
                    wl[j] = cid
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = value[lk] if lk > 0 else -value[-lk]
                    if lv != -1:
                        c[1], c[k] = lk, false_lit
                        watches[idx(-lk)].append(cid)
                        found = True
                        break
                if found:
                    continue
                wl[j] = cid
                j += 1
                if fv == -1:
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    del wl[j:]
                    self.qhead = len(trail)
                    return cid
                self._enqueue(first, cid)
            del wl[j:]
        return -1

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for k in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[k]
            v = lit if lit > 0 else -lit
            self.phase[v] = 1 if lit > 0 else -1
            self.value[v] = 0
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1) if self.value[u] == 0]
            heapq.heapify(self.heap)
        if self.value[v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = [False] * (self.nvars + 1)
        learnt = [0]
        pathc = 0
        p = 0
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        while True:
            c = self.clauses[confl]
            for q in (c if p == 0 else c[1:]):
                v = q if q > 0 else -q
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur:
                        pathc += 1
                    else:
                        learnt.append(q)
            while True:
                p = self.trail[idx]
                idx -= 1
                if seen[p if p > 0 else -p]:
                    break
            v = p if p > 0 else -p
            confl = self.reason[v]
            seen[v] = False
            pathc -= 1
            if pathc == 0:
                break
            # reason clauses keep the implied literal in position 0
            c = self.clauses[confl]
            if c[0] != p:
                k = c.index(p)
                c[0], c[k] = c[k], c[0]
        learnt[0] = -p
        # local minimisation: drop literals implied by other learnt literals
        keep = [learnt[0]]
        for q in learnt[1:]:
            v = q if q > 0 else -q
            r = self.reason[v]
            if r == -1:
                keep.append(q)
                continue
            for x in self.clauses[r]:
                xv = x if x > 0 else -x
                if xv != v and not seen[xv] and self.level[xv] > 0:
                    keep.append(q)
                    break
        learnt = keep
        if len(learnt) == 1:
            bt = 0
        else:
            mi = 1
            for k in range(2, len(learnt)):
                if self.level[abs(learnt[k])] > self.level[abs(learnt[mi])]:
                    mi = k
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bt = self.level[abs(learnt[1])]
        return learnt, bt

    def _pick_branch(self) -> int:
        heap = self.heap
        while heap:
            _, v = heapq.heappop(heap)
            if self.value[v] == 0:
                return v if self.phase[v] > 0 else -v
        return 0

    def _reduce_db(self) -> None:
        locked = set()
        for lit in self.trail:
            r = self.reason[abs(lit)]
            if r != -1:
                locked.add(r)
        cand = [cid for cid, c in enumerate(self.clauses)
                if c is not None and self.learnt[cid] and cid not in locked and len(c) > 2]
        cand.sort(key=lambda cid: len(self.clauses[cid]), reverse=True)
        for cid in cand[: len(cand) // 2]:
            self.clauses[cid] = None
            self.n_learnts -= 1

    def _search(self, nof_conflicts: int, assumptions: list[int], deadline: float):
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_here += 1
                if len(self.trail_lim) == 0:
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    cid = self._attach(learnt, True)
                    self.n_learnts += 1
                    self._enqueue(learnt[0], cid)
                self.var_inc *= 1.0 / 0.95
                if self.conflict_budget and self.conflicts >= self.conflict_budget:
                    raise SolverLimit("conflict budget exhausted")
                if deadline and (self.conflicts & 63) == 0 and time.monotonic() > deadline:
                    raise SolverLimit("time budget exhausted")
                continue
            if conflicts_here >= nof_conflicts:
                self._cancel_until(0)
                return None
            if self.n_learnts - len(self.trail) >= self.max_learnts:
                self._reduce_db()
            nxt = 0
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                av = self._lval(a)
                if av == 1:
                    self.trail_lim.append(len(self.trail))
                elif av == -1:
                    return False
                else:
                    nxt = a
                    break
            if nxt == 0:
                self.decisions += 1
                nxt = self._pick_branch()
                if nxt == 0:
                    return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, -1)

    def solve(self, assumptions=()) -> bool:
        assumptions = list(assumptions)
        for a in assumptions:
            if a == 0 or abs(a) > self.nvars:
                raise ValueError(f"assumption {a} refers to an unknown variable")
        self.model = []
        if not self.ok:
            return False
        self._cancel_until(0)
        deadline = time.monotonic() + self.time_budget if self.time_budget else 0.0
        self.max_learnts = max(self.max_learnts, len(self.clauses) // 3)
        restart = 0
        status = None
        try:
            while status is None:
                status = self._search(100 * luby(restart), assumptions, deadline)
                restart += 1
                self.max_learnts = int(self.max_learnts * 1.05)
        except SolverLimit:
            self._cancel_until(0)
            raise
        if status:
            self.model = [0] + [1 if self.value[v] >= 0 else -1 for v in range(1, self.nvars + 1)]
        elif not self.trail_lim and not assumptions:
            self.ok = False
        self._cancel_until(0)
        return bool(status)

    def model_value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return (v > 0) == (lit > 0)

    def set_budget(self, conflicts: int = 0, seconds: float = 0.0) -> None:
        self.conflict_budget = conflicts
        self.time_budget = seconds
