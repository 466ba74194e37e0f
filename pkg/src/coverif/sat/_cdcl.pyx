# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CDCL core.

Same algorithm and public surface as ``_pysolver.PySolver``: two watched
literals, first-UIP learning with local minimisation, VSIDS with an indexed
binary heap, phase saving, Luby restarts, assumption literals.
"""

from libc.time cimport clock, CLOCKS_PER_SEC
from libcpp.vector cimport vector

from .errors import SolverLimit


cdef inline int lidx(int lit) noexcept nogil:
    return 2 * lit if lit > 0 else -2 * lit + 1


cdef inline int iabs(int x) noexcept nogil:
    return x if x > 0 else -x


cdef int luby_c(int i) noexcept:
    cdef int size = 1, seq = 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


cdef class CSolver:
    cdef public int nvars
    cdef vector[vector[int]] clauses
    cdef vector[char] learnt
    cdef vector[char] deleted
    cdef vector[vector[int]] watches
    cdef vector[int] value
    cdef vector[int] level
    cdef vector[int] reason
    cdef vector[int] phase
    cdef vector[double] activity
    cdef vector[int] heap
    cdef vector[int] heap_pos
    cdef vector[int] trail
    cdef vector[int] trail_lim
    cdef vector[char] seen
    cdef int qhead
    cdef double var_inc
    cdef public bint ok
    cdef public list model
    cdef long n_learnts
    cdef long max_learnts
    cdef public long conflicts
    cdef public long decisions
    cdef public long propagations
    cdef public long conflict_budget
    cdef public double time_budget

    backend = "cython"

    def __cinit__(self):
        self.nvars = 0
        self.value.push_back(0)
        self.level.push_back(0)
        self.reason.push_back(-1)
        self.phase.push_back(-1)
        self.activity.push_back(0.0)
        self.heap_pos.push_back(-1)
        self.seen.push_back(0)
        self.watches.resize(2)
        self.qhead = 0
        self.var_inc = 1.0
        self.ok = True
        self.model = []
        self.n_learnts = 0
        self.max_learnts = 2000
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.conflict_budget = 0
        self.time_budget = 0.0

    # -- heap ------------------------------------------------------------
    cdef inline bint _lt(self, int a, int b) noexcept:
        return self.activity[a] > self.activity[b]

    cdef void _heap_up(self, int i) noexcept:
        cdef int v = self.heap[i]
        cdef int p
        while i > 0:
            p = (i - 1) >> 1
            if not self._lt(v, self.heap[p]):
                break
            self.heap[i] = self.heap[p]
            self.heap_pos[self.heap[i]] = i
            i = p
        self.heap[i] = v
        self.heap_pos[v] = i

    cdef void _heap_down(self, int i) noexcept:
        cdef int v = self.heap[i]
        cdef int n = self.heap.size()
        cdef int c
        while True:
            c = 2 * i + 1
            if c >= n:
                break
            if c + 1 < n and self._lt(self.heap[c + 1], self.heap[c]):
                c += 1
            if not self._lt(self.heap[c], v):
                break
            self.heap[i] = self.heap[c]
            self.heap_pos[self.heap[i]] = i
            i = c
        self.heap[i] = v
        self.heap_pos[v] = i

    cdef void _heap_insert(self, int v) noexcept:
        if self.heap_pos[v] >= 0:
            return
        self.heap.push_back(v)
        self.heap_pos[v] = self.heap.size() - 1
        self._heap_up(self.heap.size() - 1)

    cdef int _heap_pop(self) noexcept:
        cdef int v = self.heap[0]
        cdef int last = self.heap.back()
        self.heap.pop_back()
        self.heap_pos[v] = -1
        if self.heap.size() > 0:
            self.heap[0] = last
            self.heap_pos[last] = 0
            self._heap_down(0)
        return v

    # -- construction ----------------------------------------------------
    def new_var(self):
        self.nvars += 1
        self.value.push_back(0)
        self.level.push_back(0)
        self.reason.push_back(-1)
        self.phase.push_back(-1)
        self.activity.push_back(0.0)
        self.heap_pos.push_back(-1)
        self.seen.push_back(0)
        self.watches.resize(2 * self.nvars + 2)
        self._heap_insert(self.nvars)
        return self.nvars

    def num_vars(self):
        return self.nvars

    def num_clauses(self):
        cdef size_t i
        cdef long n = 0
        for i in range(self.clauses.size()):
            if not self.deleted[i] and not self.learnt[i]:
                n += 1
        return n

    cdef inline int _lval(self, int lit) noexcept:
        cdef int v = self.value[iabs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits):
        if not self.ok:
            return False
        if self.trail_lim.size() > 0:
            self._cancel_until(0)
        cdef vector[int] out
        cdef int lit, lv, k
        cdef bint dup
        for py_lit in lits:
            lit = py_lit
            if lit == 0 or iabs(lit) > self.nvars:
                raise ValueError(f"literal {lit} refers to an unknown variable")
            lv = self._lval(lit)
            if lv == 1:
                return True
            if lv == -1:
                continue
            dup = False
            for k in range(out.size()):
                if out[k] == -lit:
                    return True
                if out[k] == lit:
                    dup = True
                    break
            if not dup:
                out.push_back(lit)
        if out.size() == 0:
            self.ok = False
            return False
        if out.size() == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
            return self.ok
        self._attach(out, False)
        return True

    cdef int _attach(self, vector[int]& lits, bint is_learnt) noexcept:
        cdef int cid = self.clauses.size()
        self.clauses.push_back(lits)
        self.learnt.push_back(is_learnt)
        self.deleted.push_back(0)
        self.watches[lidx(-lits[0])].push_back(cid)
        self.watches[lidx(-lits[1])].push_back(cid)
        return cid

    # -- core --------------------------------------------------------------
    cdef inline void _enqueue(self, int lit, int why) noexcept:
        cdef int v = iabs(lit)
        cdef int sign = 1 if lit > 0 else -1
        self.value[v] = sign
        self.level[v] = self.trail_lim.size()
        self.reason[v] = why
        self.trail.push_back(lit)

    cdef int _propagate(self) noexcept:
        cdef int p, false_lit, cid, first, fv, lk, lv, k, tmp
        cdef size_t i, j, n
        cdef vector[int]* wl
        cdef vector[int]* c
        cdef bint found
        while self.qhead < <int>self.trail.size():
            p = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = -p
            wl = &self.watches[lidx(p)]
            i = 0
            j = 0
            n = wl.size()
            while i < n:
                cid = wl[0][i]
                i += 1
                if self.deleted[cid]:
                    continue
                c = &self.clauses[cid]
                if c[0][0] == false_lit:
                    c[0][0] = c[0][1]
                    c[0][1] = false_lit
                first = c[0][0]
                fv = self._lval(first)
                if fv == 1:
                    wl[0][j] = cid
                    j += 1
                    continue
                found = False
                for k in range(2, c.size()):
                    lk = c[0][k]
                    if self._lval(lk) != -1:
                        c[0][1] = lk
                        c[0][k] = false_lit
                        self.watches[lidx(-lk)].push_back(cid)
                        # the push may reallocate the outer vector only if it
                        # resized; watches is pre-sized so wl stays valid
                        found = True
                        break
                if found:
                    continue
                wl[0][j] = cid
                j += 1
                if fv == -1:
                    while i < n:
                        wl[0][j] = wl[0][i]
                        j += 1
                        i += 1
                    wl.resize(j)
                    self.qhead = self.trail.size()
                    return cid
                self._enqueue(first, cid)
            wl.resize(j)
        return -1

    cdef void _cancel_until(self, int lvl) noexcept:
        cdef int start, k, lit, v, sign
        if <int>self.trail_lim.size() <= lvl:
            return
        start = self.trail_lim[lvl]
        k = self.trail.size() - 1
        while k >= start:
            lit = self.trail[k]
            v = iabs(lit)
            sign = 1 if lit > 0 else -1
            self.phase[v] = sign
            self.value[v] = 0
            self.reason[v] = -1
            self._heap_insert(v)
            k -= 1
        self.trail.resize(start)
        self.trail_lim.resize(lvl)
        self.qhead = start

    cdef void _bump(self, int v) noexcept:
        cdef int u
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_pos[v] >= 0:
            self._heap_up(self.heap_pos[v])

    cdef int _analyze(self, int confl, vector[int]& out_learnt) noexcept:
        cdef int pathc = 0, p = 0, idx, cur, v, q, k, start, bt, mi, r, x, xv
        cdef vector[int]* c
        cdef vector[int] learnt
        cdef vector[int] keep
        cdef vector[int] touched
        cdef bint redundant
        idx = self.trail.size() - 1
        cur = self.trail_lim.size()
        learnt.push_back(0)
        while True:
            c = &self.clauses[confl]
            start = 0 if p == 0 else 1
            for k in range(start, c.size()):
                q = c[0][k]
                v = iabs(q)
                if not self.seen[v] and self.level[v] > 0:
                    self.seen[v] = 1
                    touched.push_back(v)
                    self._bump(v)
                    if self.level[v] >= cur:
                        pathc += 1
                    else:
                        learnt.push_back(q)
            while True:
                p = self.trail[idx]
                idx -= 1
                if self.seen[iabs(p)]:
                    break
            v = iabs(p)
            confl = self.reason[v]
            self.seen[v] = 0
            pathc -= 1
            if pathc == 0:
                break
            c = &self.clauses[confl]
            if c[0][0] != p:
                for k in range(1, c.size()):
                    if c[0][k] == p:
                        c[0][k] = c[0][0]
                        c[0][0] = p
                        break
        learnt[0] = -p
        keep.push_back(learnt[0])
        for k in range(1, learnt.size()):
            q = learnt[k]
            v = iabs(q)
            r = self.reason[v]
            if r == -1:
                keep.push_back(q)
                continue
            redundant = True
            for x in self.clauses[r]:
                xv = iabs(x)
                if xv != v and not self.seen[xv] and self.level[xv] > 0:
                    redundant = False
                    break
            if not redundant:
                keep.push_back(q)
        for k in range(touched.size()):
            self.seen[touched[k]] = 0
        if keep.size() == 1:
            bt = 0
        else:
            mi = 1
            for k in range(2, keep.size()):
                if self.level[iabs(keep[k])] > self.level[iabs(keep[mi])]:
                    mi = k
            q = keep[1]
            keep[1] = keep[mi]
            keep[mi] = q
            bt = self.level[iabs(keep[1])]
        out_learnt.swap(keep)
        return bt

    cdef int _pick_branch(self) noexcept:
        cdef int v
        while self.heap.size() > 0:
            v = self._heap_pop()
            if self.value[v] == 0:
                return v if self.phase[v] > 0 else -v
        return 0

    cdef void _reduce_db(self):
        cdef vector[char] locked
        cdef size_t i
        cdef int r
        cdef list cand
        locked.resize(self.clauses.size(), 0)
        for i in range(self.trail.size()):
            r = self.reason[iabs(self.trail[i])]
            if r >= 0:
                locked[r] = 1
        cand = []
        for i in range(self.clauses.size()):
            if self.learnt[i] and not self.deleted[i] and not locked[i] and self.clauses[i].size() > 2:
                cand.append((self.clauses[i].size(), i))
        cand.sort(reverse=True)
        for k in range(len(cand) // 2):
            i = cand[k][1]
            self.deleted[i] = 1
            self.clauses[i].clear()
            self.clauses[i].shrink_to_fit()
            self.n_learnts -= 1

    cdef int _search(self, long nof_conflicts, vector[int]& assumptions, double deadline) except -2:
        # 1 = sat, 0 = unsat, -1 = restart
        cdef long conflicts_here = 0
        cdef int confl, bt, nxt, a, av, cid
        cdef vector[int] learnt
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_here += 1
                if self.trail_lim.size() == 0:
                    return 0
                bt = self._analyze(confl, learnt)
                self._cancel_until(bt)
                if learnt.size() == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    cid = self._attach(learnt, True)
                    self.n_learnts += 1
                    self._enqueue(learnt[0], cid)
                self.var_inc *= 1.0 / 0.95
                if self.conflict_budget and self.conflicts >= self.conflict_budget:
                    raise SolverLimit("conflict budget exhausted")
                if deadline > 0 and (self.conflicts & 63) == 0 and \
                        (<double>clock()) / CLOCKS_PER_SEC > deadline:
                    raise SolverLimit("time budget exhausted")
                continue
            if conflicts_here >= nof_conflicts:
                self._cancel_until(0)
                return -1
            if self.n_learnts - <long>self.trail.size() >= self.max_learnts:
                self._reduce_db()
            nxt = 0
            while self.trail_lim.size() < assumptions.size():
                a = assumptions[self.trail_lim.size()]
                av = self._lval(a)
                if av == 1:
                    self.trail_lim.push_back(self.trail.size())
                elif av == -1:
                    return 0
                else:
                    nxt = a
                    break
            if nxt == 0:
                self.decisions += 1
                nxt = self._pick_branch()
                if nxt == 0:
                    return 1
            self.trail_lim.push_back(self.trail.size())
            self._enqueue(nxt, -1)

    def solve(self, assumptions=()):
        cdef vector[int] assume
        cdef int a, status, restart
        cdef double deadline = 0.0
        for py_a in assumptions:
            a = py_a
            if a == 0 or iabs(a) > self.nvars:
                raise ValueError(f"assumption {a} refers to an unknown variable")
            assume.push_back(a)
        self.model = []
        if not self.ok:
            return False
        self._cancel_until(0)
        if self.time_budget > 0:
            deadline = (<double>clock()) / CLOCKS_PER_SEC + self.time_budget
        if self.max_learnts < <long>self.clauses.size() // 3:
            self.max_learnts = self.clauses.size() // 3
        restart = 0
        status = -1
        try:
            while status == -1:
                status = self._search(100 * luby_c(restart), assume, deadline)
                restart += 1
                self.max_learnts = <long>(self.max_learnts * 1.05)
        except SolverLimit:
            self._cancel_until(0)
            raise
        if status == 1:
            self.model = [0] + [1 if self.value[v] >= 0 else -1 for v in range(1, self.nvars + 1)]
        elif self.trail_lim.size() == 0 and assume.size() == 0:
            self.ok = False
        self._cancel_until(0)
        return status == 1

    def model_value(self, int lit):
        v = self.model[iabs(lit)]
        return (v > 0) == (lit > 0)

    def set_budget(self, long conflicts=0, double seconds=0.0):
        self.conflict_budget = conflicts
        self.time_budget = seconds
