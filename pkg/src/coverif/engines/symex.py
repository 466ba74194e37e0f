"""Path-based symbolic execution with eager infeasibility pruning.

Paths are explored depth first, then-branch first.  Every assignment
creates a fresh SSA version of its target (versions are global across
paths, starting at 1 for the initial value) and adds the equality to the
path condition.  At branches and assumptions the extended path condition
is checked for satisfiability before the path is extended, so infeasible
subtrees are never entered.

Two solving modes:

``pi`` (partial incremental)
    One solver instance per path.  While a path is extended only the new
    segment of the path condition is encoded; a sibling path popped from
    the worklist gets a fresh instance into which its prefix is re-encoded.
``fi`` (full incremental)
    One instance for the whole run.  Each segment is added under an
    activation literal passed as an assumption; on backtracking the
    literals of the abandoned path are disabled with unit clauses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..bitvec import BvExpr, bvnot, conjuncts, const, eq, fold, var
from ..netlist.ir import CYCLE_VAR, Assert, Assign, Assume, Havoc, If
from ..sat import CnfInstance
from ..sat.errors import SolverError, SolverLimit
from .common import (
    SAFE, UNKNOWN, UNSAFE, EngineError, ExplorationStats, HavocValue, Trace, Verdict,
)
from .unwind import UNWIND_LABEL


@dataclass
class SymexConfig:
    mode: str = "pi"                     # 'pi' or 'fi'
    prune: bool = True
    backend: Optional[str] = None
    max_branch_attempts: Optional[int] = None
    timeout: Optional[float] = None
    record_paths: bool = False           # keep the path condition of every completed path

    def __post_init__(self):
        if self.mode not in ("pi", "fi"):
            raise ValueError(f"unknown incremental mode {self.mode!r}")


@dataclass
class SymState:
    versions: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    frames: list = field(default_factory=list)         # [[stmts, index]]
    havocs: list = field(default_factory=list)         # [(site, name, version, cycle, tag)]
    cycle: int = 0
    depth: int = 0
    solver: Optional[CnfInstance] = None               # partial mode: this path's instance
    encoded: int = 0                                   # constraints already in the solver
    activations: list = field(default_factory=list)    # full mode: literals of encoded segments
    fresh: set = field(default_factory=set)            # comb havocs not yet mentioned anywhere
    learned: dict = field(default_factory=dict)        # (name, version) -> value implied by assumes

    def fork(self) -> "SymState":
        return SymState(dict(self.versions), list(self.constraints),
                        [list(f) for f in self.frames], list(self.havocs), self.cycle, self.depth,
                        None, self.encoded, list(self.activations), set(self.fresh), dict(self.learned))

    def version(self, name: str) -> int:
        return self.versions.get(name, 1)


class SymbolicExecutor:
    def __init__(self, program, config: SymexConfig | None = None):
        self.program = tuple(program)
        self.config = config or SymexConfig()
        self.stats = ExplorationStats()
        self.next_version: dict = {}
        self.consts: dict = {}
        self.widths: dict = {}
        self.global_solver: Optional[CnfInstance] = None
        self.live_activations: list = []
        self.last_solver: Optional[CnfInstance] = None
        self.paths: list = []            # filled when config.record_paths is set

    # -- SSA helpers
    def rename(self, e: BvExpr, st: SymState) -> BvExpr:
        consts = self.consts

        def fn(v):
            name = v.params[0]
            ver = st.versions.get(name, 1)
            self.widths.setdefault(name, v.width)
            c = consts.get((name, ver))
            if c is None:
                c = st.learned.get((name, ver))
            if c is not None:
                return const(c, v.width)
            return var(name, v.width, ver)
        return fold(e, fn)

    def fresh(self, name: str) -> int:
        v = self.next_version.get(name, 1) + 1
        self.next_version[name] = v
        return v

    def symex_assign(self, st: SymState, target: str, rhs: BvExpr) -> SymState:
        e = self.rename(rhs, st)
        v = self.fresh(target)
        st.versions[target] = v
        self.widths[target] = e.width
        if e.op == "const":
            self.consts[(target, v)] = e.value
        st.constraints.append(eq(var(target, e.width, v), e))
        if target == CYCLE_VAR and e.op == "const":
            st.cycle = e.value
        return st

    def symex_havoc(self, st: SymState, s: Havoc) -> SymState:
        v = self.fresh(s.target)
        st.versions[s.target] = v
        self.widths[s.target] = s.width
        st.havocs.append((s.site, s.target, v, st.cycle, s.tag))
        if s.tag == "comb":
            st.fresh.add((s.target, v))
        return st

    def learn(self, st: SymState, cond: BvExpr) -> tuple[BvExpr, bool]:
        """Rename ``cond`` and learn constants from ``v == k`` conjuncts.

        Every learned equality is added to the path condition, so later
        folding with the constant is sound.  Returns the remaining condition
        and whether a learned variable could already be constrained (so the
        assumption still needs a feasibility check).
        """
        c = self.rename(cond, st)
        needs_check = False
        while c.op != "const":
            learned = []
            for cj in conjuncts(c):
                if cj.op != "eq":
                    continue
                a, b = cj.args
                if b.op == "var" and a.op == "const":
                    a, b = b, a
                if a.op == "var" and b.op == "const":
                    key = (a.params[0], a.params[1])
                    if key not in self.consts and key not in st.learned:
                        learned.append((key, a, b))
            if not learned:
                break
            for key, v, k in learned:
                if key in st.learned:
                    continue
                st.learned[key] = k.value
                st.constraints.append(eq(v, k))
                if key not in st.fresh:
                    needs_check = True
            c = self.rename(cond, st)
        st.fresh.clear()
        return c, needs_check

    # -- solving
    def _instance(self) -> CnfInstance:
        self.stats.solver_instances += 1
        return CnfInstance(self.config.backend, timeout=self.config.timeout)

    def _prepare(self, st: SymState) -> tuple[CnfInstance, list]:
        """Encode the not-yet-encoded segment of ``st``'s path condition."""
        new = st.constraints[st.encoded:]
        if self.config.mode == "pi":
            if st.solver is None:
                st.solver = self._instance()
                new = st.constraints
            for c in new:
                st.solver.add(c)
            st.encoded = len(st.constraints)
            return st.solver, []
        if self.global_solver is None:
            self.global_solver = self._instance()
        inst = self.global_solver
        if new:
            b = inst.new_activation()
            for c in new:
                inst.add_guarded(b, c)
            st.activations.append(b)
            self.live_activations.append(b)
            st.encoded = len(st.constraints)
        return inst, list(st.activations)

    def is_feasible(self, st: SymState, c: BvExpr) -> bool:
        """Is the path condition of ``st`` together with ``c`` satisfiable?"""
        if not self.config.prune:
            return True
        return self._check(st, c)

    def _check(self, st: SymState, c: BvExpr) -> bool:
        if c.op == "const":
            if not c.value:
                return False
        inst, assumptions = self._prepare(st)
        lits = assumptions if c.op == "const" else assumptions + [inst.lit(c)]
        try:
            ok = inst.solve(lits)
        except SolverLimit as exc:
            raise EngineError(f"solver limit reached: {exc}") from exc
        except SolverError as exc:
            raise EngineError(str(exc)) from exc
        self.stats.solver_calls += 1
        self.last_solver = inst
        return ok

    def _backtrack_to(self, st: SymState) -> None:
        if self.config.mode != "fi" or self.global_solver is None:
            return
        keep = set(st.activations)
        still = []
        for b in self.live_activations:
            if b in keep:
                still.append(b)
            else:
                self.global_solver.retire(b)
        self.live_activations = still

    # -- traces
    def _trace(self, st: SymState, label: str, inst: CnfInstance) -> Trace:
        havocs = [HavocValue(site, name, cycle, tag, inst.var_value(name, ver))
                  for site, name, ver, cycle, tag in st.havocs]
        initial = {}
        model = {}
        for (name, ver), bits in inst.var_bits.items():
            val = inst.model_value_bits(bits)
            model[f"{name}#{ver}"] = val
            if ver == 1:
                initial[name] = val
        return Trace(label, havocs, initial, model)

    # -- exploration
    def _attempt(self) -> None:
        self.stats.branch_attempts += 1
        lim = self.config.max_branch_attempts
        if lim is not None and self.stats.branch_attempts > lim:
            raise _Budget()

    def run(self) -> Verdict:
        t0 = time.perf_counter()
        try:
            verdict = self._explore()
        except _Budget:
            self.stats.budget_exhausted = True
            verdict = Verdict(UNKNOWN, self.stats, engine=self.engine_name)
        self.stats.total_time = time.perf_counter() - t0
        self.stats.solve_time = self._solve_time()
        return verdict

    @property
    def engine_name(self) -> str:
        return f"symex-{self.config.mode}" + ("" if self.config.prune else "-noprune")

    def _solve_time(self) -> float:
        return self._solve_acc + (self.global_solver.solve_time if self.global_solver else 0.0)

    _solve_acc = 0.0

    def _explore(self) -> Verdict:
        work = [SymState(frames=[[self.program, 0]])]
        first = True
        while work:
            st = work.pop()
            if not first:
                self._backtrack_to(st)
            first = False
            result = self._run_path(st, work)
            if st.solver is not None:
                self._solve_acc += st.solver.solve_time
                st.solver = None
            if result is not None:
                return result
        return Verdict(SAFE, self.stats, engine=self.engine_name)

    @staticmethod
    def _extend(st: SymState, c: BvExpr, body) -> None:
        if not (c.op == "const" and c.value):
            st.constraints.append(c)
        if body:
            st.frames.append([body, 0])

    def _run_path(self, st: SymState, work: list) -> Optional[Verdict]:
        stats = self.stats
        while True:
            if not st.frames:
                stats.completed_paths += 1
                if self.config.record_paths:
                    self.paths.append(list(st.constraints))
                return None
            frame = st.frames[-1]
            stmts, i = frame
            if i >= len(stmts):
                st.frames.pop()
                continue
            frame[1] = i + 1
            s = stmts[i]
            st.depth += 1
            stats.statements += 1
            if st.depth > stats.max_depth:
                stats.max_depth = st.depth
            if isinstance(s, Assign):
                self.symex_assign(st, s.target, s.expr)
            elif isinstance(s, Havoc):
                self.symex_havoc(st, s)
            elif isinstance(s, Assume):
                c, needs_check = self.learn(st, s.cond)
                if c.op == "const" and c.value and not needs_check:
                    continue
                if c.op == "const" and not c.value and s.label == UNWIND_LABEL:
                    stats.completed_paths += 1
                    return None
                self._attempt()
                if not self.is_feasible(st, c):
                    stats.pruned += 1
                    return None
                if not (c.op == "const" and c.value):
                    st.constraints.append(c)
            elif isinstance(s, Assert):
                c = self.rename(s.cond, st)
                if c.op == "const" and c.value:
                    continue
                nc = fold(bvnot(c))
                if self._check(st, nc):
                    return Verdict(UNSAFE, stats, self._trace(st, s.label, self.last_solver),
                                   engine=self.engine_name)
                if c.op != "const":
                    st.constraints.append(c)
            elif isinstance(s, If):
                c = self.rename(s.cond, st)
                self._attempt()
                nc = fold(bvnot(c))
                if not self.config.prune:
                    # ablation: no feasibility reasoning at all, not even folding
                    then_ok = else_ok = True
                elif c.op == "const":
                    then_ok, else_ok = bool(c.value), not c.value
                else:
                    then_ok = self._check(st, c)
                    else_ok = self._check(st, nc) if then_ok else True
                stats.pruned += (not then_ok) + (not else_ok)
                if then_ok and else_ok:
                    other = st.fork()
                    self._extend(other, nc, s.orelse)
                    work.append(other)
                    self._extend(st, c, s.then)
                elif then_ok:
                    self._extend(st, c, s.then)
                else:
                    self._extend(st, nc, s.orelse)
            else:
                raise EngineError(f"unexpected statement in unwound program: {s!r}")


class _Budget(Exception):
    pass


def run(program, config: SymexConfig | None = None) -> Verdict:
    """Symbolically execute the unwound ``program``."""
    return SymbolicExecutor(program, config).run()
