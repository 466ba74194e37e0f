"""Translate an elaborated design into a software netlist program.

The step routine of one clock cycle is laid out as

1. shadow captures ``r$old := r`` for every register that is read;
2. combinational logic needed by the clocked blocks, reading shadows;
3. the clocked blocks of every instance in hierarchy order (non-blocking
   writes commit immediately, reads of other registers go through shadows);
4. combinational logic feeding the observed signals, recomputed from the
   new register values.

Combinational drivers that form a feedback loop, either through a cycle
between signals or through a cycle of port connections between instances,
are emitted as a group: every member is havocked and the conjunction of
the defining equalities is assumed.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import networkx as nx

from ..bitvec import BvExpr, const, const_wrap, eq, fold, ite, land, var
from ..diagnostics import SourceError, UnsupportedConstruct
from ..verilog import ast as A
from ..verilog.elaborate import ElaboratedDesign, ElaborationError, InstanceNode, lvalue_targets
from .ir import (
    Assign, Assume, CombGroup, Havoc, If, SwNetlistProgram, collect_widths,
)
from .vlower import ExprLowerer, lvalue_reads, read_names

LOOP_CAP = 4096


class SynthesisError(SourceError):
    pass


def shadow_name(reg: str) -> str:
    return f"{reg}$old"


# ---------------------------------------------------------------- drivers

@dataclass
class Driver:
    """One source of combinational values: an assign, a combinational
    always block, or the connection of one instance port."""
    kind: str                    # 'assign' | 'always' | 'input-port' | 'output-port'
    owner: str                   # instance path owning the driver
    node: InstanceNode           # scope in which ``item`` is written
    item: object
    targets: list                # hierarchical names written
    reads: set                   # hierarchical names read
    index: int = 0               # position in source/hierarchy order
    port: str = ""               # formal port name for port drivers
    child: Optional[InstanceNode] = None

    @property
    def label(self) -> str:
        if self.kind in ("input-port", "output-port"):
            return f"{self.child.path}.{self.port}"
        return f"{self.owner}:{self.kind}#{self.index}"


@dataclass
class Unit:
    drivers: list
    group: bool = False

    @property
    def targets(self) -> list:
        return [t for d in self.drivers for t in d.targets]

    @property
    def reads(self) -> set:
        own = set(self.targets)
        return {r for d in self.drivers for r in d.reads} - own

    @property
    def index(self) -> int:
        return min(d.index for d in self.drivers)


@dataclass
class CombDepGraph:
    """Dependencies between combinational signals.

    ``nodes`` lists every combinational signal together with the inputs
    and register outputs they read, in a topological order (ties broken by
    declaration order).  ``sccs`` partitions the combinational signals.
    """
    nodes: list
    edges: set
    sccs: list
    sources: set = field(default_factory=set)

    def successors(self, n) -> list:
        return sorted(v for (u, v) in self.edges if u == n)

    def nontrivial_sccs(self) -> list:
        return [c for c in self.sccs if len(c) > 1 or (c[0], c[0]) in self.edges]


# ---------------------------------------------------------------- helpers

class _Scope:
    """Name resolution inside one instance."""

    def __init__(self, design: ElaboratedDesign, node: InstanceNode):
        self.design = design
        self.node = node
        self.path = node.path

    def h(self, name: str) -> str:
        return f"{self.path}.{name}"

    def signal(self, name: str) -> tuple:
        s = self.design.signals.get(self.h(name))
        if s is None:
            raise ElaborationError(f"undeclared identifier {name} in {self.path}")
        return s.width, s.lsb

    def width(self, name: str) -> int:
        return self.design.signals[self.h(name)].width

    def lowerer(self, read: Callable[[str], BvExpr], loop_env=None) -> ExprLowerer:
        return ExprLowerer(self.signal, read, loop_env, self.path)


def _stmt_reads(s, loop_vars: set) -> set:
    out: set = set()

    def go(x):
        if isinstance(x, A.Block):
            for y in x.stmts:
                go(y)
        elif isinstance(x, A.If):
            out.update(read_names(x.cond, loop_vars))
            go(x.then)
            if x.other is not None:
                go(x.other)
        elif isinstance(x, A.ProcAssign):
            out.update(read_names(x.rhs, loop_vars))
            out.update(lvalue_reads(x.lhs, loop_vars))
        elif isinstance(x, A.For):
            go(x.body)
    go(s)
    return out


def _loop_names(s) -> set:
    out = set()

    def go(x):
        if isinstance(x, A.Block):
            for y in x.stmts:
                go(y)
        elif isinstance(x, A.If):
            go(x.then)
            if x.other is not None:
                go(x.other)
        elif isinstance(x, A.For):
            out.update(lvalue_targets(x.init.lhs))
            go(x.body)
    go(s)
    return out


def _assign_kinds(s) -> dict:
    """target -> set of {'blocking', 'nonblocking'} used in a block."""
    out: dict = {}

    def go(x):
        if isinstance(x, A.Block):
            for y in x.stmts:
                go(y)
        elif isinstance(x, A.If):
            go(x.then)
            if x.other is not None:
                go(x.other)
        elif isinstance(x, A.ProcAssign):
            for t in lvalue_targets(x.lhs):
                out.setdefault(t, {}).setdefault("blocking" if x.blocking else "nonblocking", x.loc)
        elif isinstance(x, A.For):
            go(x.body)
    go(s)
    return out


def _unroll(loop: A.For, env: dict, lw: ExprLowerer, body: Callable[[dict], None]) -> None:
    """Run ``body(env')`` for every iteration of a constant-bound loop."""
    var_name = loop.init.lhs.name
    env = dict(env)
    env[var_name] = lw.with_loop(env).const_value(loop.init.rhs, "loop initialiser")
    count = 0
    while True:
        c = lw.with_loop(env).const_value(loop.cond, "loop condition")
        if not c:
            break
        count += 1
        if count > LOOP_CAP:
            raise SynthesisError(f"for loop exceeds {LOOP_CAP} iterations", loop.loc)
        body(env)
        env[var_name] = lw.with_loop(env).const_value(loop.step.rhs, "loop step") & 0xFFFFFFFF


# ---------------------------------------------------------------- block lowering

class _CombBody:
    """Symbolically execute a combinational always block into equations."""

    def __init__(self, scope: _Scope, targets: list, read: Callable[[str], BvExpr], loc):
        self.scope = scope
        self.targets = set(targets)
        self.outer_read = read
        self.loc = loc

    def run(self, body) -> list:
        env = self._stmt(body, {}, {})
        missing = [t for t in sorted(self.targets) if t not in env or env[t] is None]
        if missing:
            raise UnsupportedConstruct(
                "latch inference", self.loc,
                f"{self.scope.h(missing[0])} is not assigned on every path of a combinational block")
        return [(self.scope.h(t), env[t]) for t in sorted(self.targets)]

    def _lw(self, env, loops):
        def read(name):
            if name in self.targets:
                v = env.get(name)
                if v is None:
                    raise UnsupportedConstruct(
                        "latch inference", self.loc,
                        f"combinational block reads {self.scope.h(name)} before assigning it")
                return v
            return self.outer_read(name)
        return self.scope.lowerer(read, loops)

    def _stmt(self, s, env: dict, loops: dict) -> dict:
        if isinstance(s, A.Block):
            for x in s.stmts:
                env = self._stmt(x, env, loops)
            return env
        if isinstance(s, A.ProcAssign):
            lw = self._lw(env, loops)
            value = lw.rvalue(s.rhs, lw.width(s.lhs))

            def current(name):
                v = env.get(name)
                if v is None:
                    raise UnsupportedConstruct(
                        "latch inference", s.loc,
                        f"partial assignment to {self.scope.h(name)} before it is fully assigned")
                return v
            env = dict(env)
            for t, v in lw.assignments(s.lhs, value, current):
                env[t] = fold(v)
            return env
        if isinstance(s, A.If):
            c = self._lw(env, loops).cond(s.cond)
            if c.op == "const":
                branch = s.then if c.value else s.other
                return env if branch is None else self._stmt(branch, env, loops)
            a = self._stmt(s.then, dict(env), loops)
            b = env if s.other is None else self._stmt(s.other, dict(env), loops)
            out = {}
            for k in set(a) | set(b):
                va, vb = a.get(k), b.get(k)
                out[k] = None if va is None or vb is None else fold(ite(c, va, vb))
            return out
        if isinstance(s, A.For):
            box = [env]

            def body(lenv):
                box[0] = self._stmt(s.body, box[0], {**loops, **lenv})
            _unroll(s, loops, self.scope.lowerer(lambda n: self.outer_read(n), loops), body)
            return box[0]
        raise SynthesisError("unsupported statement", getattr(s, "loc", None))


class _ClockedBody:
    """Lower one clocked always block into IR statements."""

    def __init__(self, scope: _Scope, blk: A.Always, shadow_read: Callable[[str], BvExpr]):
        self.scope = scope
        kinds = _assign_kinds(blk.body)
        loop_vars = _loop_names(blk.body)
        self.blocking = set()
        for t, k in kinds.items():
            if t in loop_vars:
                continue
            if len(k) > 1:
                raise UnsupportedConstruct(
                    "mixed blocking and non-blocking assignment", k["nonblocking"],
                    f"{scope.h(t)} is assigned with both = and <= in one block")
            if "blocking" in k:
                self.blocking.add(t)
        self.shadow_read = shadow_read
        self.blk = blk

    def read(self, name: str) -> BvExpr:
        if name in self.blocking:
            return var(self.scope.h(name), self.scope.width(name))
        return self.shadow_read(name)

    def current(self, name: str) -> BvExpr:
        return var(self.scope.h(name), self.scope.width(name))

    def run(self) -> list:
        return self._stmt(self.blk.body, {})

    def _stmt(self, s, loops: dict) -> list:
        lw = self.scope.lowerer(self.read, loops)
        if isinstance(s, A.Block):
            out = []
            for x in s.stmts:
                out += self._stmt(x, loops)
            return out
        if isinstance(s, A.ProcAssign):
            value = lw.rvalue(s.rhs, lw.width(s.lhs))
            return [Assign(self.scope.h(t), fold(v)) for t, v in lw.assignments(s.lhs, value, self.current)]
        if isinstance(s, A.If):
            c = lw.cond(s.cond)
            then = self._stmt(s.then, loops)
            other = [] if s.other is None else self._stmt(s.other, loops)
            if c.op == "const":
                return then if c.value else other
            return [If(c, tuple(then), tuple(other))]
        if isinstance(s, A.For):
            out = []

            def body(lenv):
                out.extend(self._stmt(s.body, {**loops, **lenv}))
            _unroll(s, loops, lw, body)
            return out
        raise SynthesisError("unsupported statement", getattr(s, "loc", None))


# ---------------------------------------------------------------- synthesizer

class _Synth:
    def __init__(self, design: ElaboratedDesign, observe: Iterable[str] = ()):
        self.design = design
        self.nodes = design.instances()
        self.scopes = {n.path: _Scope(design, n) for n in self.nodes}
        self.clock = design.clock
        self.clock_aliases = self._clock_aliases()
        self.drivers: list[Driver] = []
        self.clocked: list[tuple] = []          # (scope, Always, reads)
        self.comb_targets: set = set()
        self.registers: list = []
        self._collect()
        self.observe = list(observe)

    # -- discovery
    def _clock_aliases(self) -> set:
        """Hierarchical names that carry the clock."""
        out = set()
        if self.clock is None:
            return out
        out.add(self.clock)
        for n in self.nodes:
            for formal, actual in n.bindings.items():
                if isinstance(actual, A.Ident) and f"{n.parent.path}.{actual.name}" in out:
                    out.add(f"{n.path}.{formal}")
        return out

    def _collect(self) -> None:
        idx = 0
        clocked_targets: set = set()
        for n in self.nodes:
            sc = self.scopes[n.path]
            m = n.ast
            for a in m.continuous_assigns:
                reads = {sc.h(r) for r in read_names(a.rhs) | lvalue_reads(a.lhs)}
                self.drivers.append(Driver("assign", n.path, n, a,
                                           [sc.h(t) for t in lvalue_targets(a.lhs)], reads, idx))
                idx += 1
            for blk in m.always_blocks:
                loops = _loop_names(blk.body)
                reads = {sc.h(r) for r in _stmt_reads(blk.body, loops)}
                targets = [t for t in _proc_targets_ordered(blk.body) if t not in loops]
                if blk.clock is None:
                    self.drivers.append(Driver("always", n.path, n, blk,
                                               [sc.h(t) for t in targets], reads, idx))
                    self.comb_targets.update(sc.h(t) for t in targets)
                else:
                    self.clocked.append((sc, blk, reads))
                    clocked_targets.update(sc.h(t) for t in targets)
                idx += 1
            for child in n.children:
                for p in child.ast.ports:
                    actual = child.bindings[p.name]
                    formal = f"{child.path}.{p.name}"
                    if formal in self.clock_aliases:
                        continue
                    if p.direction == "input":
                        reads = {sc.h(r) for r in read_names(actual)}
                        self.drivers.append(Driver("input-port", child.path, n, actual, [formal], reads,
                                                   idx, p.name, child))
                    else:
                        targets = [sc.h(t) for t in lvalue_targets(actual)]
                        reads = {formal} | {sc.h(r) for r in lvalue_reads(actual)}
                        self.drivers.append(Driver("output-port", child.path, n, actual, targets, reads,
                                                   idx, p.name, child))
                    idx += 1
        for name, s in self.design.signals.items():
            if s.is_reg and name not in self.comb_targets:
                self.registers.append(name)
        self.reg_set = set(self.registers)
        for name in clocked_targets:
            if name not in self.reg_set:
                raise SynthesisError(f"{name} is assigned in a clocked block but is not a register")
        self.comb_targets = {t for d in self.drivers for t in d.targets}
        for t in self.comb_targets & self.reg_set:
            raise SynthesisError(f"register {t} is also driven combinationally")

    @property
    def top_inputs(self) -> list:
        out = []
        for p in self.design.root.ast.ports:
            name = f"{self.design.top}.{p.name}"
            if p.direction == "input" and name != self.clock:
                out.append((name, self.design.signals[name].width))
        return out

    @property
    def top_outputs(self) -> list:
        return [(f"{self.design.top}.{p.name}", self.design.signals[f"{self.design.top}.{p.name}"].width)
                for p in self.design.root.ast.ports if p.direction == "output"]

    # -- graph
    def comb_graph(self) -> CombDepGraph:
        writer = {}
        for d in self.drivers:
            for t in d.targets:
                writer[t] = d
        edges = set()
        nodes = set(writer)
        sources = set()
        for d in self.drivers:
            for r in d.reads:
                if r in self.clock_aliases:
                    continue
                if r not in writer:
                    sources.add(r)
                for t in d.targets:
                    edges.add((r, t))
        g = nx.DiGraph()
        order = {name: i for i, name in enumerate(self.design.signals)}
        g.add_nodes_from(nodes | sources)
        g.add_edges_from(edges)
        cond = nx.condensation(g)
        members = cond.graph["mapping"]
        rank = {}
        for n, c in members.items():
            rank[c] = min(rank.get(c, 1 << 30), order.get(n, 1 << 30))
        topo = list(nx.lexicographical_topological_sort(cond, key=lambda c: rank[c]))
        by_comp: dict = {}
        for n, c in members.items():
            by_comp.setdefault(c, []).append(n)
        ordered = [n for c in topo for n in sorted(by_comp[c], key=lambda x: order.get(x, 1 << 30))]
        # SCCs of the combinational signals, listed in topological order
        comps = [sorted(by_comp[c], key=order.get) for c in topo if by_comp[c][0] in nodes]
        return CombDepGraph(ordered, edges, comps, sources)

    def units(self) -> list:
        """Drivers grouped so that the unit dependency graph is acyclic."""
        writer = {}
        for d in self.drivers:
            for t in d.targets:
                writer[t] = d
        # groups induced by cycles between instances through their ports
        owner_g = nx.DiGraph()
        for d in self.drivers:
            owner_g.add_node(d.owner)
            for r in d.reads:
                w = writer.get(r)
                if w is not None and w.owner != d.owner:
                    owner_g.add_edge(w.owner, d.owner)
        uf = {id(d): i for i, d in enumerate(self.drivers)}
        parent = list(range(len(self.drivers)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for comp in nx.strongly_connected_components(owner_g):
            if len(comp) < 2:
                continue
            ids = [uf[id(d)] for d in self.drivers if d.owner in comp]
            for i in ids[1:]:
                union(ids[0], i)
        # merge until the driver-level graph is acyclic
        while True:
            g = nx.DiGraph()
            g.add_nodes_from({find(i) for i in range(len(self.drivers))})
            for i, d in enumerate(self.drivers):
                for r in d.reads:
                    w = writer.get(r)
                    if w is not None:
                        g.add_edge(find(uf[id(w)]), find(i))
            changed = False
            for comp in nx.strongly_connected_components(g):
                if len(comp) > 1 or any(g.has_edge(c, c) for c in comp):
                    comp = sorted(comp)
                    for c in comp[1:]:
                        union(comp[0], c)
                    changed = changed or len(comp) > 1
            if not changed:
                break
        buckets: dict = {}
        for i, d in enumerate(self.drivers):
            buckets.setdefault(find(i), []).append(d)
        out = []
        for root in sorted(buckets):
            ds = buckets[root]
            grouped = len(ds) > 1 or any(r in ds[0].targets for r in ds[0].reads)
            out.append(Unit(ds, grouped))
        return out

    # -- equations
    def equations(self, d: Driver, reg_read: Callable[[str], BvExpr]) -> list:
        """``[(target, value)]`` of a driver; registers are read via ``reg_read``."""
        sc = self.scopes[d.node.path]

        def read(name):
            h = sc.h(name)
            if h in self.reg_set:
                return reg_read(h)
            return var(h, sc.width(name))
        lw = sc.lowerer(read)
        zero = lambda n: const(0, sc.width(n))  # noqa: E731  undriven bits of a net are 0
        if d.kind == "assign":
            a = d.item
            value = lw.rvalue(a.rhs, lw.width(a.lhs))
            return [(sc.h(t), fold(v)) for t, v in lw.assignments(a.lhs, value, zero)]
        if d.kind == "always":
            loc = d.item.loc
            return _CombBody(sc, [t.rsplit(".", 1)[1] for t in d.targets], read, loc).run(d.item.body)
        if d.kind == "input-port":
            port = d.child.ast.port(d.port)
            return [(f"{d.child.path}.{d.port}", lw.rvalue(d.item, port.width))]
        if d.kind == "output-port":
            cs = self.scopes[d.child.path]
            src = var(cs.h(d.port), cs.width(d.port))
            return [(sc.h(t), fold(v)) for t, v in lw.assignments(d.item, src, zero)]
        raise AssertionError(d.kind)

    def emit_unit(self, u: Unit, reg_read, tag: str = "comb") -> list:
        eqs = [e for d in u.drivers for e in self.equations(d, reg_read)]
        if not u.group:
            return [Assign(t, v) for t, v in eqs]
        out: list = [Havoc(t, v.width, tag) for t, v in eqs]
        out.append(Assume(land(*[eq(var(t, v.width), v) for t, v in eqs]), label=self.group_name(u)))
        return out

    def group_name(self, u: Unit) -> str:
        owners = sorted({d.owner for d in u.drivers})
        return "comb:" + ",".join(owners)

    # -- ordering
    def _order(self, units: list, wanted: set, key) -> list:
        writer = {}
        for i, u in enumerate(units):
            for t in u.targets:
                writer[t] = i
        indeg = {i: 0 for i in wanted}
        succ: dict = {i: [] for i in wanted}
        for i in wanted:
            for r in units[i].reads:
                j = writer.get(r)
                if j is not None and j in wanted and j != i:
                    succ[j].append(i)
                    indeg[i] += 1
        heap = [(key(i), i) for i in wanted if indeg[i] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, i = heapq.heappop(heap)
            out.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, (key(j), j))
        assert len(out) == len(wanted), "unit graph must be acyclic"
        return out

    def _cone(self, units: list, names: set) -> set:
        writer = {}
        for i, u in enumerate(units):
            for t in u.targets:
                writer[t] = i
        out: set = set()
        todo = [writer[n] for n in names if n in writer]
        while todo:
            i = todo.pop()
            if i in out:
                continue
            out.add(i)
            todo += [writer[r] for r in units[i].reads if r in writer]
        return out

    def _reg_dependent(self, units: list) -> dict:
        writer = {}
        for i, u in enumerate(units):
            for t in u.targets:
                writer[t] = i
        memo: dict = {}

        def dep(i):
            if i in memo:
                return memo[i]
            memo[i] = False
            r = any(n in self.reg_set or (n in writer and dep(writer[n])) for n in units[i].reads)
            memo[i] = r
            return r
        return {i: dep(i) for i in range(len(units))}

    # -- main
    def run(self) -> SwNetlistProgram:
        units = self.units()
        regdep = self._reg_dependent(units)
        key = lambda i: (regdep[i], units[i].index)  # noqa: E731

        observed = {n for n, _ in self.top_outputs}
        for n in self.observe:
            if n not in self.design.signals:
                raise SynthesisError(f"unknown signal {n}")
            observed.add(n)
        clocked_reads = set()
        for _, _, reads in self.clocked:
            clocked_reads |= reads
        pre = self._cone(units, clocked_reads)
        post_cone = self._cone(units, observed)
        post = {i for i in post_cone if regdep[i] or i not in pre}

        # registers read anywhere in the step get a shadow copy
        read_regs = set()
        for _, _, reads in self.clocked:
            read_regs |= reads & self.reg_set
        for i in pre | post:
            read_regs |= units[i].reads & self.reg_set
        shadows = {r: shadow_name(r) for r in self.registers if r in read_regs}
        width = {n: s.width for n, s in self.design.signals.items()}

        def shadow_read(h):
            if h in shadows:
                return var(shadows[h], width[h])
            return var(h, width[h])

        def direct(h):
            return var(h, width[h])

        step: list = [Assign(shadows[r], var(r, width[r])) for r in self.registers if r in shadows]
        for i in self._order(units, pre, key):
            step += self.emit_unit(units[i], shadow_read)
        for sc, blk, _ in self.clocked:
            def read_local(name, sc=sc):
                h = sc.h(name)
                if h in self.reg_set:
                    return shadow_read(h)
                return var(h, sc.width(name))
            step += _ClockedBody(sc, blk, read_local).run()
        for i in self._order(units, post, key):
            step += self.emit_unit(units[i], direct)

        reg_init = self._initial_values()
        init: list = [Assign(r, const(reg_init.get(r, 0), width[r])) for r in self.registers]
        init += [Assign(n, const(0, w)) for n, w in self.top_inputs]
        for i in self._order(units, post_cone, key):
            init += self.emit_unit(units[i], direct)

        groups = []
        for u in units:
            if u.group:
                eqs = [e for d in u.drivers for e in self.equations(d, direct)]
                groups.append(CombGroup(self.group_name(u), [(t, v.width) for t, v in eqs], eqs))

        signals = dict(width)
        for c in self.clock_aliases:
            signals.pop(c, None)
        for r, s in shadows.items():
            signals[s] = width[r]
        collect_widths(step, signals)
        collect_widths(init, signals)
        return SwNetlistProgram(
            top=self.design.top, clock=self.clock,
            state_vars=[(r, width[r]) for r in self.registers],
            inputs=self.top_inputs, outputs=self.top_outputs,
            signals=signals, init=init, step=step, comb_groups=groups,
            reg_init=reg_init, shadows=shadows)

    def _initial_values(self) -> dict:
        values: dict = {}
        for n in self.nodes:
            sc = self.scopes[n.path]
            for ini in n.ast.initial_blocks:
                def read(name, sc=sc):
                    h = sc.h(name)
                    if h not in self.reg_set:
                        raise SynthesisError(f"initial block reads non-constant {h}", ini.loc)
                    return const(values.get(h, 0), sc.width(name))
                self._exec_initial(sc, ini.body, read, values, {})
        return values

    def _exec_initial(self, sc: _Scope, s, read, values: dict, loops: dict) -> None:
        lw = sc.lowerer(read, loops)
        if isinstance(s, A.Block):
            for x in s.stmts:
                self._exec_initial(sc, x, read, values, loops)
        elif isinstance(s, A.ProcAssign):
            value = lw.rvalue(s.rhs, lw.width(s.lhs))
            for t, v in lw.assignments(s.lhs, value, lambda n: read(n)):
                v = fold(v)
                if v.op != "const":
                    raise SynthesisError("initial block value is not constant", s.loc)
                values[sc.h(t)] = v.value
        elif isinstance(s, A.If):
            c = lw.cond(s.cond)
            if c.op != "const":
                raise SynthesisError("initial block condition is not constant", s.loc)
            branch = s.then if c.value else s.other
            if branch is not None:
                self._exec_initial(sc, branch, read, values, loops)
        elif isinstance(s, A.For):
            _unroll(s, loops, lw, lambda lenv: self._exec_initial(sc, s.body, read, values,
                                                                  {**loops, **lenv}))


def _proc_targets_ordered(s) -> list:
    out: list = []

    def go(x):
        if isinstance(x, A.Block):
            for y in x.stmts:
                go(y)
        elif isinstance(x, A.If):
            go(x.then)
            if x.other is not None:
                go(x.other)
        elif isinstance(x, A.ProcAssign):
            for t in lvalue_targets(x.lhs):
                if t not in out:
                    out.append(t)
        elif isinstance(x, A.For):
            go(x.body)
    go(s)
    return out


def build_comb_graph(design: ElaboratedDesign) -> CombDepGraph:
    """Combinational dependency graph over the whole hierarchy."""
    return _Synth(design).comb_graph()


def synthesize(design: ElaboratedDesign, observe: Iterable[str] = ()) -> SwNetlistProgram:
    """Software netlist of ``design``.

    ``observe`` names extra hierarchical signals (besides the top outputs)
    whose combinational value must be current at the end of each step.
    """
    return _Synth(design, observe).run()
