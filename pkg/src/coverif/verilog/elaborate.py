"""Elaboration: parameter specialisation, width inference, the instance tree
and the flattened signal table.

Each instance gets its own specialised copy of its module's AST in which
parameters are replaced by constants and every expression node carries its
self-determined width.  The parsed modules are never mutated.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..diagnostics import Loc, SourceError, UnsupportedConstruct
from . import ast as A


class ElaborationError(SourceError):
    pass


@dataclass
class Signal:
    name: str                 # hierarchical, e.g. top.a.q
    kind: str                 # 'input' | 'output' | 'wire' | 'reg' | 'integer'
    width: int
    msb: int
    lsb: int
    is_reg: bool = False
    loc: Loc = field(default=Loc(), compare=False, repr=False)


@dataclass
class InstanceNode:
    path: str
    module: str
    ast: A.ModuleAst                       # specialised copy
    params: dict                           # name -> int
    children: list = field(default_factory=list)
    parent: Optional["InstanceNode"] = field(default=None, repr=False)
    item: Optional[A.Instance] = field(default=None, repr=False)   # instantiation in the parent
    bindings: dict = field(default_factory=dict)   # formal -> actual Expr (parent scope, widths set)

    def scope(self) -> str:
        return self.path

    def walk(self) -> Iterator["InstanceNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class ElaboratedDesign:
    top: str
    modules: dict                          # name -> parsed ModuleAst
    root: InstanceNode
    signals: dict                          # hierarchical name -> Signal (ordered)
    clock: Optional[str] = None            # hierarchical name of the single clock input

    @property
    def instance_tree(self) -> list:
        return [(n.path, n.module) for n in self.root.walk()]

    def instances(self) -> list:
        return list(self.root.walk())

    def instance(self, path: str) -> InstanceNode:
        for n in self.root.walk():
            if n.path == path:
                return n
        raise KeyError(path)

    @property
    def flattened_signal_table(self) -> dict:
        return {k: (s.kind, s.width) for k, s in self.signals.items()}


# ---------------------------------------------------------------- constants

def const_eval(e, env: dict, what: str = "constant expression") -> int:
    """Evaluate a constant expression over integer parameters."""
    if isinstance(e, A.Number):
        return e.value
    if isinstance(e, A.Ident):
        if e.name in env:
            return env[e.name]
        raise ElaborationError(f"{e.name} is not a constant in {what}", e.loc)
    if isinstance(e, A.Unary):
        v = const_eval(e.arg, env, what)
        if e.op == "-":
            return -v
        if e.op == "+":
            return v
        if e.op == "!":
            return int(v == 0)
        if e.op == "~":
            w = _const_width_of(e.arg, env)
            return ~v & ((1 << w) - 1)
    if isinstance(e, A.Binary):
        a = const_eval(e.lhs, env, what)
        b = const_eval(e.rhs, env, what)
        op = e.op
        table = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b,
            "<<": lambda: a << b, ">>": lambda: a >> b,
            "<<<": lambda: a << b, ">>>": lambda: a >> b,
            "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "<": lambda: int(a < b), "<=": lambda: int(a <= b),
            ">": lambda: int(a > b), ">=": lambda: int(a >= b),
            "&&": lambda: int(bool(a) and bool(b)), "||": lambda: int(bool(a) or bool(b)),
        }
        if op in table:
            return table[op]()
    if isinstance(e, A.Ternary):
        c = const_eval(e.cond, env, what)
        return const_eval(e.then if c else e.other, env, what)
    raise ElaborationError(f"unsupported operator in {what}", getattr(e, "loc", None))


def _const_width_of(e, env) -> int:
    if isinstance(e, A.Number):
        return e.size or 32
    return 32


# ---------------------------------------------------------------- elaboration

class _Elaborator:
    def __init__(self, modules: list[A.ModuleAst], top: str, overrides: dict | None):
        self.by_name: dict[str, A.ModuleAst] = {}
        for m in modules:
            if m.name in self.by_name:
                raise ElaborationError(f"duplicate module {m.name}", m.loc)
            self.by_name[m.name] = m
        if top not in self.by_name:
            raise ElaborationError(f"unknown module {top}")
        self.top = top
        self.overrides = dict(overrides or {})
        self.signals: dict[str, Signal] = {}

    def run(self) -> ElaboratedDesign:
        top_ast = self.by_name[self.top]
        unknown = set(self.overrides) - set(top_ast.parameters)
        if unknown:
            raise ElaborationError(f"module {self.top} has no parameter {sorted(unknown)[0]}")
        root = self._instantiate(self.top, self.top, dict(self.overrides), None, None, [])
        self._check_drivers(root)
        clock = self._resolve_clock(root)
        return ElaboratedDesign(self.top, dict(self.by_name), root, self.signals, clock)

    # -- parameters and specialisation
    def _param_values(self, m: A.ModuleAst, overrides: dict) -> dict:
        env: dict[str, int] = {}
        for name in m.param_order():
            if name in overrides:
                env[name] = overrides[name]
            else:
                env[name] = const_eval(m.parameters[name], env, f"parameter {name}")
        for name, e in m.localparams.items():
            env[name] = const_eval(e, env, f"localparam {name}")
        return env

    def _instantiate(self, mod_name: str, path: str, overrides: dict,
                     parent: Optional[InstanceNode], item: Optional[A.Instance],
                     stack: list) -> InstanceNode:
        if mod_name not in self.by_name:
            raise ElaborationError(f"unknown module {mod_name}", item.loc if item else None)
        if mod_name in stack:
            raise ElaborationError(
                f"recursive instantiation of module {mod_name} ({' -> '.join(stack + [mod_name])})",
                item.loc if item else None)
        parsed = self.by_name[mod_name]
        params = self._param_values(parsed, overrides)
        spec = copy.deepcopy(parsed)
        scope = _Scope(spec, params, path)
        scope.resolve_declarations()
        for p in spec.ports:
            if p.direction == "inout":
                raise ElaborationError(f"inout port {p.name} of module {mod_name} is not supported", p.loc)
        node = InstanceNode(path, mod_name, spec, params, parent=parent, item=item)
        for sig in scope.signal_list():
            self.signals[sig.name] = sig
        scope.annotate_module()
        for inst in spec.instances:
            child_mod = self.by_name.get(inst.module)
            if child_mod is None:
                raise ElaborationError(f"unknown module {inst.module}", inst.loc)
            child_over = self._overrides_for(child_mod, inst, params)
            child = self._instantiate(inst.module, f"{path}.{inst.name}", child_over, node, inst,
                                      stack + [mod_name])
            self._bind(node, scope, child, inst)
            node.children.append(child)
        return node

    def _overrides_for(self, child: A.ModuleAst, inst: A.Instance, env: dict) -> dict:
        out = {}
        order = child.param_order()
        for k, e in inst.params.items():
            if k.startswith("#"):
                idx = int(k[1:])
                if idx >= len(order):
                    raise ElaborationError(f"too many parameter overrides for {inst.module}", inst.loc)
                name = order[idx]
            else:
                name = k
                if name not in child.parameters:
                    raise ElaborationError(f"module {inst.module} has no parameter {name}", inst.loc)
            out[name] = const_eval(e, env, f"override of {name}")
        return out

    def _bind(self, parent: InstanceNode, scope: "_Scope", child: InstanceNode, inst: A.Instance) -> None:
        ports = child.ast.ports
        if inst.positional is not None:
            if len(inst.positional) != len(ports):
                raise ElaborationError(
                    f"instance {inst.name} of {inst.module} binds {len(inst.positional)} ports, "
                    f"module has {len(ports)}", inst.loc)
            actuals = {p.name: a for p, a in zip(ports, inst.positional)}
        else:
            formal_names = {p.name for p in ports}
            for f in inst.bindings:
                if f not in formal_names:
                    raise ElaborationError(f"module {inst.module} has no port {f}", inst.loc)
            actuals = dict(inst.bindings)
        for p in ports:
            a = actuals.get(p.name)
            if a is None:
                raise ElaborationError(f"port {p.name} of instance {child.path} is not bound", inst.loc)
            w = scope.annotate(a)
            if p.direction == "output":
                scope.check_lvalue(a, allow_reg=False, context=f"output port {p.name} binding")
            if w != p.width and not (isinstance(a, A.Number) and a.size is None
                                     and p.direction == "input" and a.value < (1 << p.width)):
                raise ElaborationError(
                    f"width mismatch binding port {p.name} of {child.path}: "
                    f"port is {p.width} bits, actual is {w} bits", getattr(a, "loc", inst.loc))
            child.bindings[p.name] = a

    # -- drivers
    def _check_drivers(self, root: InstanceNode) -> None:
        for node in root.walk():
            m = node.ast
            drivers: dict[str, list[str]] = {}

            def note(name, what, loc):
                drivers.setdefault(name, []).append(what)
                if len(drivers[name]) > 1:
                    raise ElaborationError(
                        f"net {node.path}.{name} is driven by more than one source "
                        f"({', '.join(drivers[name])})", loc)

            kinds = _kinds(m)
            for a in m.continuous_assigns:
                for t in lvalue_targets(a.lhs):
                    if kinds.get(t) == "reg":
                        raise ElaborationError(f"continuous assignment to reg {t}", a.loc)
                    if kinds.get(t) == "input":
                        raise ElaborationError(f"continuous assignment to input port {t}", a.loc)
                    note(t, "assign", a.loc)
            for i, blk in enumerate(m.always_blocks):
                loop_vars = _loop_vars(blk.body)
                for t, loc in sorted(_proc_targets(blk.body).items()):
                    if t in loop_vars:
                        continue
                    k = kinds.get(t)
                    if k not in ("reg", "integer"):
                        raise ElaborationError(f"procedural assignment to non-reg {t}", loc)
                    note(t, f"always block {i + 1}", loc)
            for child in node.children:
                for p in child.ast.ports:
                    if p.direction == "output":
                        for t in lvalue_targets(child.bindings[p.name]):
                            note(t, f"output {p.name} of {child.path}", child.item.loc)
            for ini in m.initial_blocks:
                for t, loc in _proc_targets(ini.body).items():
                    if kinds.get(t) not in ("reg", "integer"):
                        raise ElaborationError(f"initial block assigns non-reg {t}", loc)

    # -- clock
    def _resolve_clock(self, root: InstanceNode) -> Optional[str]:
        roots: dict[str, Loc] = {}
        for node in root.walk():
            for blk in node.ast.always_blocks:
                if blk.clock is None:
                    continue
                src = self._clock_source(node, blk.clock, blk.loc)
                roots.setdefault(src, blk.loc)
        if len(roots) > 1:
            names = sorted(roots)
            raise ElaborationError(f"multiple clock signals: {', '.join(names)}", roots[names[1]])
        return next(iter(roots), None)

    def _clock_source(self, node: InstanceNode, name: str, loc) -> str:
        p = node.ast.port(name)
        if p is None or p.direction != "input":
            raise ElaborationError(f"clock {node.path}.{name} must be an input port", loc)
        if node.parent is None:
            return f"{node.path}.{name}"
        actual = node.bindings[name]
        if not isinstance(actual, A.Ident):
            raise ElaborationError(f"clock port {name} of {node.path} must be bound to a plain signal", loc)
        return self._clock_source(node.parent, actual.name, loc)


def _kinds(m: A.ModuleAst) -> dict:
    kinds = {}
    for n in m.nets:
        kinds[n.name] = n.kind
    for p in m.ports:
        if p.direction == "input":
            kinds[p.name] = "input"
        elif p.is_reg:
            kinds[p.name] = "reg"
        else:
            kinds.setdefault(p.name, "wire")
    return kinds


def lvalue_targets(lv) -> list[str]:
    if isinstance(lv, A.Ident):
        return [lv.name]
    if isinstance(lv, (A.BitSelect, A.PartSelect, A.IndexedPartSelect)):
        return lvalue_targets(lv.base)
    if isinstance(lv, A.Concat):
        out = []
        for p in lv.parts:
            out += lvalue_targets(p)
        return out
    raise ElaborationError("invalid assignment target", getattr(lv, "loc", None))


def _proc_targets(s) -> dict:
    out: dict[str, Loc] = {}

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
                out.setdefault(t, x.loc)
        elif isinstance(x, A.For):
            go(x.init)
            go(x.step)
            go(x.body)
    go(s)
    return out


def _loop_vars(s) -> set:
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


class _Scope:
    """Name resolution and width annotation inside one specialised module."""

    def __init__(self, m: A.ModuleAst, params: dict, path: str):
        self.m = m
        self.params = params
        self.path = path
        self.decl: dict[str, Signal] = {}
        self.loop_vars: set = set()

    def _range(self, rng, loc) -> tuple[int, int]:
        if rng is None:
            return 0, 0
        msb = const_eval(rng.msb, self.params, "range bound")
        lsb = const_eval(rng.lsb, self.params, "range bound")
        if msb < lsb:
            raise UnsupportedConstruct("ascending range", loc, f"[{msb}:{lsb}]")
        if lsb < 0:
            raise ElaborationError(f"negative range bound [{msb}:{lsb}]", loc)
        return msb, lsb

    def resolve_declarations(self) -> None:
        m = self.m
        for name in self.params:
            if m.port(name) is not None or m.net(name) is not None:
                raise ElaborationError(f"{name} is declared both as a parameter and a signal", m.loc)
        for p in m.ports:
            msb, lsb = self._range(p.range, p.loc)
            p.width = msb - lsb + 1
            kind = p.direction
            self.decl[p.name] = Signal(f"{self.path}.{p.name}", kind, p.width, msb, lsb, p.is_reg, loc=p.loc)
        for n in m.nets:
            if n.kind == "integer":
                n.width = 32
                msb, lsb = 31, 0
            else:
                msb, lsb = self._range(n.range, n.loc)
                n.width = msb - lsb + 1
            if n.name in self.decl:
                continue  # reg half of an output reg port
            self.decl[n.name] = Signal(f"{self.path}.{n.name}", n.kind, n.width, msb, lsb,
                                       n.kind in ("reg", "integer"), loc=n.loc)
        for blk in m.always_blocks:
            self.loop_vars |= _loop_vars(blk.body)
        for ini in m.initial_blocks:
            self.loop_vars |= _loop_vars(ini.body)

    def signal_list(self) -> list[Signal]:
        out = []
        for p in self.m.ports:
            out.append(self.decl[p.name])
        for n in self.m.nets:
            if self.m.port(n.name) is None:
                s = self.decl[n.name]
                if n.kind == "integer" and n.name in self.loop_vars:
                    continue
                out.append(s)
        return out

    def info(self, name: str, loc) -> Signal:
        s = self.decl.get(name)
        if s is None:
            raise ElaborationError(f"undeclared identifier {name} in module {self.m.name}", loc)
        return s

    # -- width annotation (self-determined widths)
    def annotate(self, e) -> int:
        w = self._annotate(e)
        e.width = w
        return w

    def _annotate(self, e) -> int:
        if isinstance(e, A.Number):
            if e.size is None and e.value >= (1 << 32):
                return e.value.bit_length()
            return e.size or 32
        if isinstance(e, A.Ident):
            if e.name in self.params:
                raise AssertionError("parameters are substituted before annotation")
            return self.info(e.name, e.loc).width
        if isinstance(e, A.BitSelect):
            self._base(e)
            self.annotate(e.index)
            if _is_const(e.index):
                s = self.info(e.base.name, e.loc)
                idx = const_eval(e.index, {}, "bit index")
                if not s.lsb <= idx <= s.msb:
                    raise ElaborationError(f"bit index {idx} out of range [{s.msb}:{s.lsb}] of {e.base.name}", e.loc)
            return 1
        if isinstance(e, A.PartSelect):
            s = self._base(e)
            try:
                msb = const_eval(e.msb, {}, "part-select bound")
                lsb = const_eval(e.lsb, {}, "part-select bound")
            except ElaborationError:
                raise UnsupportedConstruct("non-constant part-select", e.loc, "use an indexed part-select") from None
            if msb < lsb:
                raise ElaborationError(f"part-select [{msb}:{lsb}] has msb < lsb", e.loc)
            if not (s.lsb <= lsb and msb <= s.msb):
                raise ElaborationError(f"part-select [{msb}:{lsb}] out of range [{s.msb}:{s.lsb}] of {e.base.name}", e.loc)
            self.annotate(e.msb)
            self.annotate(e.lsb)
            return msb - lsb + 1
        if isinstance(e, A.IndexedPartSelect):
            s = self._base(e)
            self.annotate(e.offset)
            size = const_eval(e.size, {}, "indexed part-select width")
            if size < 1 or size > s.width:
                raise ElaborationError(f"indexed part-select width {size} invalid for {e.base.name}", e.loc)
            self.annotate(e.size)
            return size
        if isinstance(e, A.Concat):
            return sum(self.annotate(p) for p in e.parts)
        if isinstance(e, A.Repeat):
            n = const_eval(e.count, {}, "replication count")
            self.annotate(e.count)
            if n < 1:
                raise ElaborationError("replication count must be positive", e.loc)
            return n * sum(self.annotate(p) for p in e.parts)
        if isinstance(e, A.Unary):
            w = self.annotate(e.arg)
            return 1 if e.op == "!" else w
        if isinstance(e, A.Reduction):
            self.annotate(e.arg)
            return 1
        if isinstance(e, A.Binary):
            a = self.annotate(e.lhs)
            b = self.annotate(e.rhs)
            if e.op in A.COMPARE_OPS or e.op in A.LOGICAL_OPS:
                return 1
            if e.op in A.SHIFT_OPS:
                return a
            return max(a, b)
        if isinstance(e, A.Ternary):
            self.annotate(e.cond)
            return max(self.annotate(e.then), self.annotate(e.other))
        raise ElaborationError("unsupported expression", getattr(e, "loc", None))

    def _base(self, e) -> Signal:
        if not isinstance(e.base, A.Ident):
            raise UnsupportedConstruct("select of an expression", e.loc)
        s = self.info(e.base.name, e.base.loc)
        e.base.width = s.width
        return s

    def check_lvalue(self, lv, allow_reg: bool, context: str) -> None:
        if isinstance(lv, A.Concat):
            for p in lv.parts:
                self.check_lvalue(p, allow_reg, context)
            return
        base = lv
        while isinstance(base, (A.BitSelect, A.PartSelect, A.IndexedPartSelect)):
            base = base.base
        if not isinstance(base, A.Ident):
            raise ElaborationError(f"{context} must be a net, a select of a net or a concatenation",
                                   getattr(lv, "loc", None))
        s = self.info(base.name, base.loc)
        if s.is_reg and not allow_reg:
            raise ElaborationError(f"{context} drives reg {base.name}", base.loc)

    # -- whole-module pass
    def annotate_module(self) -> None:
        m = self.m
        subst = _ParamSubst(self.params)
        for a in m.continuous_assigns:
            a.lhs = subst(a.lhs)
            a.rhs = subst(a.rhs)
            self.check_lvalue(a.lhs, allow_reg=True, context="continuous assignment target")
            self.annotate(a.lhs)
            self.annotate(a.rhs)
        for blk in m.always_blocks:
            blk.body = self._stmt(blk.body, subst, blk.clock is not None)
            if blk.clock is not None:
                self.info(blk.clock, blk.loc)
        for ini in m.initial_blocks:
            ini.body = self._stmt(ini.body, subst, True)
        for inst in m.instances:
            if inst.positional is not None:
                inst.positional = [subst(x) for x in inst.positional]
            else:
                inst.bindings = {k: (None if v is None else subst(v)) for k, v in inst.bindings.items()}

    def _stmt(self, s, subst, clocked: bool, loop_env: Optional[set] = None):
        loop_env = loop_env or set()
        if isinstance(s, A.Block):
            s.stmts = [self._stmt(x, subst, clocked, loop_env) for x in s.stmts]
            return s
        if isinstance(s, A.If):
            s.cond = subst(s.cond)
            self._annotate_loopy(s.cond, loop_env)
            s.then = self._stmt(s.then, subst, clocked, loop_env)
            if s.other is not None:
                s.other = self._stmt(s.other, subst, clocked, loop_env)
            return s
        if isinstance(s, A.ProcAssign):
            s.lhs = subst(s.lhs)
            s.rhs = subst(s.rhs)
            self.check_lvalue(s.lhs, allow_reg=True, context="procedural assignment target")
            self._annotate_loopy(s.lhs, loop_env)
            self._annotate_loopy(s.rhs, loop_env)
            return s
        if isinstance(s, A.For):
            var = s.init.lhs
            if not isinstance(var, A.Ident) or not (isinstance(s.step.lhs, A.Ident) and s.step.lhs.name == var.name):
                raise UnsupportedConstruct("for loop", s.loc, "loop must initialise and step a single variable")
            self.info(var.name, var.loc)
            inner = loop_env | {var.name}
            s.init = self._stmt(s.init, subst, clocked, loop_env)
            s.cond = subst(s.cond)
            self._annotate_loopy(s.cond, inner)
            s.step = self._stmt(s.step, subst, clocked, inner)
            s.body = self._stmt(s.body, subst, clocked, inner)
            return s
        raise ElaborationError("unsupported statement", getattr(s, "loc", None))

    def _annotate_loopy(self, e, loop_env: set) -> None:
        """Annotate, tolerating part-select bounds that mention loop variables."""
        if not loop_env:
            self.annotate(e)
            return
        try:
            self.annotate(e)
        except UnsupportedConstruct:
            if _mentions(e, loop_env):
                return  # widths are inferred after unrolling
            raise


def _is_const(e) -> bool:
    if isinstance(e, A.Number):
        return True
    if isinstance(e, A.Ident):
        return False
    if isinstance(e, (A.Unary,)):
        return _is_const(e.arg)
    if isinstance(e, A.Binary):
        return _is_const(e.lhs) and _is_const(e.rhs)
    if isinstance(e, A.Ternary):
        return _is_const(e.cond) and _is_const(e.then) and _is_const(e.other)
    return False


def _mentions(e, names: set) -> bool:
    if isinstance(e, A.Ident):
        return e.name in names
    for f in ("base", "index", "msb", "lsb", "offset", "size", "arg", "lhs", "rhs", "cond", "then", "other", "count"):
        sub = getattr(e, f, None)
        if sub is not None and not isinstance(sub, (int, str, bool)) and _mentions(sub, names):
            return True
    for p in getattr(e, "parts", None) or []:
        if _mentions(p, names):
            return True
    return False


class _ParamSubst:
    """Replace parameter identifiers by unsized constants (in place where possible)."""

    def __init__(self, params: dict):
        self.params = params

    def __call__(self, e):
        if isinstance(e, A.Ident):
            if e.name in self.params:
                v = self.params[e.name]
                if v < 0:
                    v &= (1 << 32) - 1
                return A.Number(v, None, "d", loc=e.loc)
            return e
        if isinstance(e, A.Number) or e is None:
            return e
        for f in ("base", "index", "msb", "lsb", "offset", "size", "arg", "lhs", "rhs", "cond", "then", "other", "count"):
            sub = getattr(e, f, None)
            if sub is not None and not isinstance(sub, (int, str, bool)):
                setattr(e, f, self(sub))
        if getattr(e, "parts", None) is not None:
            e.parts = [self(p) for p in e.parts]
        return e


def elaborate(modules: list[A.ModuleAst], top: str, params: dict | None = None) -> ElaboratedDesign:
    """Build the instance tree and signal table rooted at ``top``.

    ``params`` overrides parameters of the top module.
    """
    return _Elaborator(modules, top, params).run()
