"""Monolithic bounded model checking over guarded SSA.

The unwound program is converted into a single formula.  Branch conditions
become ``guard`` variables, each side of a branch assigns fresh versions,
and at the join every variable written on either side receives a merge
version ``ite(guard, then_version, else_version)``.  Assumptions are folded
into an accumulator variable so that an assertion is only required to hold
on executions that satisfied every assumption before it.  All assertion
obligations are checked with a single solver call.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..bitvec import (
    TRUE, BvExpr, bvnot, eq, implies, ite, land, pretty, substitute, var,
)
from ..netlist.ir import CYCLE_VAR, Assert, Assign, Assume, Havoc, If
from ..sat import CnfInstance
from ..sat.errors import SolverError, SolverLimit
from .common import SAFE, UNSAFE, EngineError, ExplorationStats, HavocValue, Trace, Verdict

GUARD = "guard"
ASSUME_ACC = "__assume"


@dataclass
class Obligation:
    label: str
    context: BvExpr          # path guard conjoined with the assumption accumulator
    cond: BvExpr

    def violation(self) -> BvExpr:
        return land(self.context, bvnot(self.cond))


@dataclass
class SsaProgram:
    equalities: list = field(default_factory=list)    # [(name, version, expr)]
    guards: list = field(default_factory=list)        # [(version, cond)]
    merges: list = field(default_factory=list)        # [(name, version, expr)], also in equalities
    obligations: list = field(default_factory=list)   # [Obligation]
    havocs: list = field(default_factory=list)       # [(site, name, version, tag, cycle_version)]
    widths: dict = field(default_factory=dict)

    def formula(self) -> list:
        """Conjuncts of the single formula C (obligations excluded)."""
        out = [eq(var(GUARD, 1, v), c) for v, c in self.guards]
        out += [eq(var(n, e.width, v), e) for n, v, e in self.equalities]
        return out

    def size(self) -> int:
        return len(self.guards) + len(self.equalities)

    def render(self) -> str:
        lines = [f"{GUARD}{v} = {pretty(c)}" for v, c in self.guards]
        lines += [f"{n}{v} = {pretty(e)}" for n, v, e in self.equalities]
        lines += [f"obligation {o.label}: {pretty(o.violation())}" for o in self.obligations]
        return "\n".join(lines)


class _Encoder:
    def __init__(self):
        self.ssa = SsaProgram()
        self.next_version: dict = {}

    def fresh(self, name: str) -> int:
        # guards have no initial value, so they are numbered from 1
        v = self.next_version.get(name, 0 if name == GUARD else 1) + 1
        self.next_version[name] = v
        return v

    def rename(self, e: BvExpr, env: dict) -> BvExpr:
        def fn(v):
            name = v.params[0]
            self.ssa.widths.setdefault(name, v.width)
            return var(name, v.width, env.get(name, 1))
        return substitute(e, fn)

    def define(self, name: str, e: BvExpr, env: dict, merge: bool = False) -> None:
        v = self.fresh(name)
        self.ssa.widths[name] = e.width
        self.ssa.equalities.append((name, v, e))
        if merge:
            self.ssa.merges.append((name, v, e))
        env[name] = v

    def block(self, stmts, env: dict, guard: BvExpr) -> None:
        for s in stmts:
            self.stmt(s, env, guard)

    def stmt(self, s, env: dict, guard: BvExpr) -> None:
        if isinstance(s, Assign):
            self.define(s.target, self.rename(s.expr, env), env)
        elif isinstance(s, Havoc):
            v = self.fresh(s.target)
            self.ssa.widths[s.target] = s.width
            env[s.target] = v
            self.ssa.havocs.append((s.site, s.target, v, s.tag, env.get(CYCLE_VAR, 1)))
        elif isinstance(s, Assume):
            acc = var(ASSUME_ACC, 1, env.get(ASSUME_ACC, 1)) if ASSUME_ACC in env else TRUE
            c = self.rename(s.cond, env)
            self.define(ASSUME_ACC, land(acc, implies(guard, c) if guard is not TRUE else c), env)
        elif isinstance(s, Assert):
            ctx = guard
            if ASSUME_ACC in env:
                ctx = land(guard, var(ASSUME_ACC, 1, env[ASSUME_ACC]))
            self.ssa.obligations.append(Obligation(s.label, ctx, self.rename(s.cond, env)))
        elif isinstance(s, If):
            c = self.rename(s.cond, env)
            gv = self.fresh(GUARD)
            self.ssa.guards.append((gv, c))
            g = var(GUARD, 1, gv)
            te, ee = dict(env), dict(env)
            self.block(s.then, te, g if guard is TRUE else land(guard, g))
            ng = bvnot(g)
            self.block(s.orelse, ee, ng if guard is TRUE else land(guard, ng))
            for name in sorted(set(te) | set(ee)):
                tv, ev = te.get(name, 1), ee.get(name, 1)
                if tv == ev:
                    env[name] = tv
                    continue
                w = self.ssa.widths[name]
                self.define(name, ite(g, var(name, w, tv), var(name, w, ev)), env, merge=True)
        else:
            raise EngineError(f"unexpected statement in unwound program: {s!r}")


def encode_ssa(program) -> SsaProgram:
    """Guarded SSA form of the acyclic ``program``."""
    enc = _Encoder()
    enc.block(list(program), {}, TRUE)
    return enc.ssa


@dataclass
class BmcResult:
    verdict: Verdict
    ssa: SsaProgram
    dimacs: Optional[str] = None


def check(ssa: SsaProgram, backend: str | None = None, timeout: float | None = None,
          dump_dimacs: bool = False) -> BmcResult:
    """Solve formula ∧ (some obligation violated) with one solver call."""
    stats = ExplorationStats()
    t0 = time.perf_counter()
    if not ssa.obligations:
        stats.total_time = time.perf_counter() - t0
        return BmcResult(Verdict(SAFE, stats, engine="bmc"), ssa)
    inst = CnfInstance(backend, timeout=timeout, record=dump_dimacs)
    stats.solver_instances = 1
    for c in ssa.formula():
        inst.add(c)
    selectors = []
    for ob in ssa.obligations:
        s = inst.new_lit()
        inst.add_clause([-s, inst.lit(ob.violation())])
        selectors.append(s)
    inst.add_clause(selectors)
    stats.encode_size = inst.num_vars
    dimacs = inst.to_dimacs() if dump_dimacs else None
    try:
        sat = inst.solve()
    except SolverLimit as exc:
        raise EngineError(f"solver limit reached: {exc}") from exc
    except SolverError as exc:
        raise EngineError(str(exc)) from exc
    stats.solver_calls = 1
    stats.solve_time = inst.solve_time
    stats.statements = ssa.size()
    trace = None
    if sat:
        label = next(ob.label for ob, s in zip(ssa.obligations, selectors)
                     if inst.solver.model_value(s))
        trace = _trace(ssa, inst, label)
    stats.total_time = time.perf_counter() - t0
    return BmcResult(Verdict(UNSAFE if sat else SAFE, stats, trace, engine="bmc"), ssa, dimacs)


def _trace(ssa: SsaProgram, inst: CnfInstance, label: str) -> Trace:
    havocs = []
    defined = {(n, v) for n, v, _ in ssa.equalities}
    for site, name, ver, tag, cver in ssa.havocs:
        cycle = inst.var_value(CYCLE_VAR, cver) if (CYCLE_VAR, cver) in defined else 0
        havocs.append(HavocValue(site, name, cycle, tag, inst.var_value(name, ver)))
    model = {}
    initial = {}
    for (name, ver), bits in inst.var_bits.items():
        val = inst.model_value_bits(bits)
        model[f"{name}#{ver}"] = val
        if ver == 1 and name not in (GUARD, ASSUME_ACC):
            initial[name] = val
    return Trace(label, havocs, initial, model)


def run(program, backend: str | None = None, timeout: float | None = None,
        dump_dimacs: bool = False) -> BmcResult:
    t0 = time.perf_counter()
    ssa = encode_ssa(program)
    res = check(ssa, backend, timeout, dump_dimacs)
    res.verdict.stats.total_time = time.perf_counter() - t0
    return res
