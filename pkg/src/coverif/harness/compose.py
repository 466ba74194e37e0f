"""Sequential composition of firmware with a software netlist.

The result is one IR program: the netlist's initial block, then the
firmware's global initialisers and ``main`` with every function call
inlined.  Each ``step()`` expands to

    __cycle := __cycle + 1
    havoc every primary input not pinned by set_input
    <netlist step body>

``set_input`` pins an input: it keeps its value across later steps until
``release_input`` hands it back to the environment.  Pinning is tracked
statically; after an ``if`` an input is pinned when either branch pinned
it, and inputs pinned anywhere in a loop body count as pinned on entry.

Firmware values are unsigned bit-vectors.  Binary operators work at the
width of the wider operand (unsized literals take the smallest width that
holds them) and assignments truncate or zero-extend to the target.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..bitvec import (
    TRUE, BvExpr, add, bvand, bvnot, bvor, bvxor, const, eq, fold, ite, land, lor, lshr,
    mul, ne, neg, resize, shl, sub, truthy, uge, ugt, ule, ult, var,
)
from ..diagnostics import Loc, SourceError, UnsupportedConstruct
from ..netlist.ir import (
    CYCLE_VAR, CYCLE_WIDTH, Assert, Assign, Assume, Havoc, If, Loop, SwNetlistProgram,
    cycle_marker, is_cycle_marker, walk,
)
from . import firmware as F

log = logging.getLogger(__name__)

FW = "fw."
INLINE_DEPTH = 64


class CompositionError(SourceError):
    pass


@dataclass
class _Var:
    ir: str
    width: int
    size: Optional[int] = None        # arrays: number of elements

    def element(self, i: int) -> str:
        return f"{self.ir}[{i}]"


@dataclass
class ComposeInfo:
    steps: int = 0                    # step() expansions
    nondet_sites: int = 0
    inlined_calls: int = 0
    warnings: list = field(default_factory=list)


def resolve_signal(hw: SwNetlistProgram, name: str) -> Optional[str]:
    """Full netlist name for ``name`` given relative to the top module."""
    for cand in (name, f"{hw.top}.{name}"):
        if cand in hw.signals and not cand.endswith("$old"):
            return cand
    return None


class Composer:
    def __init__(self, hw: SwNetlistProgram, info: ComposeInfo | None = None, scenario=()):
        self.hw = hw
        self.scenario = list(scenario)
        self.inputs = dict(hw.inputs)
        self.info = info or ComposeInfo()
        self.scopes: list[dict] = [{}]
        self.used: set = set()
        self.counter = 0
        self.pinned: set = set()
        self.calls: list = []
        self.fw: Optional[F.FirmwareProgram] = None
        self.pre: list = []

    # -- names
    def fresh(self, base: str) -> str:
        name = base
        while name in self.used:
            self.counter += 1
            name = f"{base}${self.counter}"
        self.used.add(name)
        return name

    def temp(self, what: str) -> str:
        self.counter += 1
        name = f"{FW}{what}${self.counter}"
        self.used.add(name)
        return name

    def lookup(self, name: str) -> Optional[_Var]:
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    def hw_signal(self, name: str, loc) -> str:
        full = resolve_signal(self.hw, name)
        if full is None:
            raise CompositionError(f"unknown hardware signal {name!r}", loc)
        return full

    def hw_input(self, name: str, loc) -> str:
        full = self.hw_signal(name, loc)
        if full not in self.inputs:
            raise CompositionError(f"{name!r} is not a primary input of {self.hw.top}", loc)
        return full

    def _signal_arg(self, e, loc) -> str:
        if isinstance(e, (F.Name, F.HwRef)):
            return e.name
        if isinstance(e, F.Str):
            return e.text
        raise CompositionError("expected a signal name", loc)

    # -- expressions
    def expr(self, e) -> BvExpr:
        if isinstance(e, F.Num):
            w = e.width or max(1, e.value.bit_length())
            if w > 64:
                raise CompositionError("integer literal wider than 64 bits", e.loc)
            return const(e.value, w)
        if isinstance(e, F.Name):
            v = self.lookup(e.name)
            if v is None:
                full = resolve_signal(self.hw, e.name)
                if full is not None:
                    return var(full, self.hw.signals[full])
                raise CompositionError(f"undeclared identifier {e.name!r}", e.loc)
            if v.size is not None:
                raise UnsupportedConstruct("array used as a value", e.loc, e.name)
            return var(v.ir, v.width)
        if isinstance(e, F.HwRef):
            full = self.hw_signal(e.name, e.loc)
            return var(full, self.hw.signals[full])
        if isinstance(e, F.Index):
            return self.read_index(e)
        if isinstance(e, F.Unary):
            a = self.expr(e.arg)
            if e.op == "!":
                return bvnot(truthy(a))
            if e.op == "~":
                return bvnot(a)
            return neg(a)
        if isinstance(e, F.Binary):
            return self.binary(e)
        if isinstance(e, F.Cond):
            c = truthy(self.expr(e.cond))
            a, b = self.widen(self.expr(e.then), self.expr(e.orelse))
            return ite(c, a, b)
        if isinstance(e, F.Call):
            v = self.call(e, want_value=True)
            assert v is not None
            return v
        if isinstance(e, F.Str):
            raise UnsupportedConstruct("string used as a value", e.loc)
        raise CompositionError(f"cannot lower {e!r}", getattr(e, "loc", None))

    @staticmethod
    def widen(a: BvExpr, b: BvExpr) -> tuple[BvExpr, BvExpr]:
        w = max(a.width, b.width)
        return resize(a, w), resize(b, w)

    def binary(self, e: F.Binary) -> BvExpr:
        op = e.op
        a = self.expr(e.left)
        b = self.expr(e.right)
        if op == "&&":
            return land(truthy(a), truthy(b))
        if op == "||":
            return lor(truthy(a), truthy(b))
        if op in ("<<", ">>"):
            return shl(a, b) if op == "<<" else lshr(a, b)
        if op in ("/", "%"):
            k = fold(b)
            if k.op != "const" or k.value == 0 or k.value & (k.value - 1):
                raise UnsupportedConstruct(f"'{op}' by a non power-of-two", e.loc)
            sh = k.value.bit_length() - 1
            if op == "/":
                return lshr(a, const(sh, max(1, sh.bit_length())))
            return bvand(a, const(k.value - 1, a.width)) if k.value - 1 < (1 << a.width) else a
        a, b = self.widen(a, b)
        table = {"+": add, "-": sub, "*": mul, "&": bvand, "|": bvor, "^": bvxor,
                 "==": eq, "!=": ne, "<": ult, "<=": ule, ">": ugt, ">=": uge}
        return table[op](a, b)

    def array(self, name: str, loc) -> _Var:
        v = self.lookup(name)
        if v is None:
            raise CompositionError(f"undeclared array {name!r}", loc)
        if v.size is None:
            raise CompositionError(f"{name!r} is not an array", loc)
        return v

    def read_index(self, e: F.Index) -> BvExpr:
        arr = self.array(e.name, e.loc)
        idx = self.expr(e.index)
        k = fold(idx)
        if k.op == "const":
            if k.value >= arr.size:
                raise CompositionError(f"index {k.value} out of bounds for {e.name}[{arr.size}]", e.loc)
            return var(arr.element(k.value), arr.width)
        out = const(0, arr.width)          # out-of-range reads give 0
        for i in reversed(range(arr.size)):
            if i < (1 << idx.width):
                out = ite(eq(idx, const(i, idx.width)), var(arr.element(i), arr.width), out)
        return out

    # -- calls
    def call(self, c: F.Call, want_value: bool) -> Optional[BvExpr]:
        n, args, loc = c.name, c.args, c.loc
        if n == "nondet" or n.startswith("nondet_"):
            if n == "nondet":
                if len(args) != 1:
                    raise CompositionError("nondet takes the width as its only argument", loc)
                w = fold(self.expr(args[0]))
                if w.op != "const" or not 1 <= w.value <= 64:
                    raise CompositionError("nondet width must be a constant in 1..64", loc)
                w = w.value
            elif n == "nondet_bool":
                w = 1
            else:
                m = F._UTYPE.match(n[len("nondet_"):])
                if not m:
                    raise CompositionError(f"unknown intrinsic {n}", loc)
                w = int(m.group(1))
            t = self.temp("nondet")
            self.pre.append(Havoc(t, w, "nondet"))
            self.info.nondet_sites += 1
            return var(t, w)
        if n == "read_output":
            if len(args) != 1:
                raise CompositionError("read_output takes one signal name", loc)
            full = self.hw_signal(self._signal_arg(args[0], loc), loc)
            return var(full, self.hw.signals[full])
        if n == "__cast":
            return resize(self.expr(args[1]), args[0].value)
        if n in ("assume", "assert", "step", "set_input", "release_input"):
            if want_value:
                raise CompositionError(f"{n}() has no value", loc)
            self.intrinsic(c)
            return None
        if self.fw is None or n not in self.fw.functions:
            raise CompositionError(f"call to undefined function {n!r}", loc)
        return self.inline(self.fw.functions[n], args, loc, want_value)

    def intrinsic(self, c: F.Call) -> None:
        n, args, loc = c.name, c.args, c.loc
        if n == "assume":
            if len(args) != 1:
                raise CompositionError("assume takes one argument", loc)
            self.pre.append(Assume(truthy(self.expr(args[0])), f"assume@{loc.line}"))
        elif n == "assert":
            if len(args) not in (1, 2):
                raise CompositionError("assert takes a condition and an optional label", loc)
            label = f"assert@{loc.line}"
            if len(args) == 2:
                if not isinstance(args[1], F.Str):
                    raise CompositionError("assert label must be a string", loc)
                label = args[1].text
            self.pre.append(Assert(label, truthy(self.expr(args[0]))))
        elif n == "step":
            if args:
                raise CompositionError("step takes no arguments", loc)
            self.pre += self.step()
        elif n == "set_input":
            if len(args) != 2:
                raise CompositionError("set_input takes a signal name and a value", loc)
            self.set_input(self._signal_arg(args[0], loc), args[1], loc)
        else:
            if len(args) != 1:
                raise CompositionError("release_input takes a signal name", loc)
            self.pinned.discard(self.hw_input(self._signal_arg(args[0], loc), loc))

    def set_input(self, name: str, value, loc) -> None:
        full = self.hw_input(name, loc)
        self.pre.append(Assign(full, resize(self.expr(value), self.inputs[full])))
        self.pinned.add(full)

    def step(self) -> list:
        self.info.steps += 1
        out: list = [cycle_marker()]
        out += [Havoc(n, w, "input") for n, w in self.hw.inputs if n not in self.pinned]
        out += list(self.hw.step)
        out += [Assert(lbl, c) for lbl, c in self.hw.asserts]
        out += self.scenario_assumes()
        return out

    def scenario_assumes(self) -> list:
        """Scenario restrictions, read over hardware signals only."""
        if not self.scenario:
            return []
        saved, saved_pre = self.scopes, self.pre
        self.scopes, self.pre = [{}], []
        try:
            out = [Assume(truthy(self.expr(e)), "scenario") for e in self.scenario]
            if self.pre:
                raise CompositionError("scenario assumptions must not call functions or nondet")
        finally:
            self.scopes, self.pre = saved, saved_pre
        return out

    def inline(self, fn: F.Function, args: list, loc, want_value: bool) -> Optional[BvExpr]:
        if len(args) != len(fn.params):
            raise CompositionError(f"{fn.name} expects {len(fn.params)} arguments", loc)
        if fn.name in self.calls or len(self.calls) >= INLINE_DEPTH:
            raise UnsupportedConstruct("recursive function", loc, fn.name)
        if want_value and fn.ret_width is None:
            raise CompositionError(f"void function {fn.name} used as a value", loc)
        for i, s in enumerate(fn.body):
            if isinstance(s, F.ReturnStmt) and i != len(fn.body) - 1:
                raise UnsupportedConstruct("return before the end of a function", s.loc)
        for s in _nested_returns(fn.body):
            raise UnsupportedConstruct("return inside a nested statement", s.loc)
        self.info.inlined_calls += 1
        self.counter += 1
        prefix = f"{FW}{fn.name}${self.counter}."
        values = [self.expr(a) for a in args]
        saved = self.scopes
        self.scopes = [saved[0], {}]
        self.calls.append(fn.name)
        try:
            for (w, pname), v in zip(fn.params, values):
                ir = self.fresh(prefix + pname)
                self.scopes[-1][pname] = _Var(ir, w)
                self.pre.append(Assign(ir, resize(v, w)))
            body = fn.body
            ret = None
            if body and isinstance(body[-1], F.ReturnStmt):
                body, ret = body[:-1], body[-1]
            self.pre += self.block(body, new_scope=False)
            result = None
            if fn.ret_width is not None:
                if ret is None or ret.value is None:
                    raise CompositionError(f"{fn.name} must end with 'return <value>;'", fn.loc)
                r = self.fresh(prefix + "return")
                self.pre.append(Assign(r, resize(self.expr(ret.value), fn.ret_width)))
                result = var(r, fn.ret_width)
            elif ret is not None and ret.value is not None:
                raise CompositionError(f"void function {fn.name} returns a value", ret.loc)
        finally:
            self.calls.pop()
            self.scopes = saved
        return result

    # -- statements
    def block(self, stmts, new_scope: bool = True) -> list:
        if new_scope:
            self.scopes.append({})
        out: list = []
        try:
            for s in stmts:
                out += self.stmt(s)
        finally:
            if new_scope:
                self.scopes.pop()
        return out

    def _flush(self, tail: list) -> list:
        out, self.pre = self.pre + tail, []
        return out

    def declare(self, d: F.Decl) -> list:
        base = f"{FW}{d.name}" if not self.calls else None
        if base is None:
            base = f"{FW}{self.calls[-1]}.{d.name}"
        ir = self.fresh(base)
        v = _Var(ir, d.width, d.size)
        out: list = []
        if d.size is None:
            init = const(0, d.width) if d.init is None else resize(self.expr(d.init), d.width)
            self.scopes[-1][d.name] = v
            return self._flush([Assign(ir, init)])
        if isinstance(d.init, F.Str):
            items = [const(ord(ch), 8) for ch in d.init.text] + [const(0, 8)]
        elif isinstance(d.init, list):
            items = [self.expr(x) for x in d.init]
        elif d.init is None:
            items = []
        else:
            raise CompositionError(f"array {d.name} needs a brace or string initialiser", d.loc)
        if len(items) > d.size:
            raise CompositionError(f"too many initialisers for {d.name}[{d.size}]", d.loc)
        for i in range(d.size):
            val = items[i] if i < len(items) else const(0, d.width)
            out.append(Assign(v.element(i), resize(val, d.width)))
        self.scopes[-1][d.name] = v
        return self._flush(out)

    def assign(self, s: F.AssignStmt) -> list:
        t = s.target
        if isinstance(t, F.HwRef):
            self.set_input(t.name, s.value, s.loc)
            return self._flush([])
        if isinstance(t, F.Name):
            v = self.lookup(t.name)
            if v is None:
                if resolve_signal(self.hw, t.name) is not None:
                    self.set_input(t.name, s.value, s.loc)
                    return self._flush([])
                raise CompositionError(f"undeclared identifier {t.name!r}", t.loc)
            if v.size is not None:
                raise CompositionError(f"cannot assign to array {t.name}", t.loc)
            return self._flush([Assign(v.ir, resize(self.expr(s.value), v.width))])
        arr = self.array(t.name, t.loc)
        idx = self.expr(t.index)
        val = resize(self.expr(s.value), arr.width)
        k = fold(idx)
        if k.op == "const":
            if k.value >= arr.size:
                raise CompositionError(f"index {k.value} out of bounds for {t.name}[{arr.size}]", t.loc)
            return self._flush([Assign(arr.element(k.value), val)])
        out: list = []
        if val.op not in ("var", "const"):
            tmp = self.temp("tmp")
            out.append(Assign(tmp, val))
            val = var(tmp, arr.width)
        itmp = self.temp("idx")
        out.append(Assign(itmp, idx))
        iv = var(itmp, idx.width)
        for i in range(arr.size):
            if i < (1 << idx.width):
                el = var(arr.element(i), arr.width)
                out.append(Assign(arr.element(i), ite(eq(iv, const(i, idx.width)), val, el)))
        return self._flush(out)

    def stmt(self, s) -> list:
        if isinstance(s, F.Decl):
            return self.declare(s)
        if isinstance(s, F.AssignStmt):
            return self.assign(s)
        if isinstance(s, F.ExprStmt):
            if not isinstance(s.expr, F.Call):
                raise CompositionError("expression statement has no effect", s.loc)
            self.call(s.expr, want_value=False)
            return self._flush([])
        if isinstance(s, F.BlockStmt):
            return self.block(s.body)
        if isinstance(s, F.IfStmt):
            c = truthy(self.expr(s.cond))
            head = self._flush([])
            before = set(self.pinned)
            then = self.block(s.then)
            after_then, self.pinned = self.pinned, set(before)
            orelse = self.block(s.orelse)
            self.pinned |= after_then
            return head + [If(c, tuple(then), tuple(orelse))]
        if isinstance(s, F.WhileStmt):
            return self.loop(s.cond, s.body, [], s.loc)
        if isinstance(s, F.ForStmt):
            init = []
            for x in s.init:
                init += self.stmt(x)
            return init + self.loop(s.cond, s.body, s.update, s.loc)
        if isinstance(s, F.ReturnStmt):
            raise UnsupportedConstruct("return outside the end of a function", s.loc)
        raise CompositionError(f"cannot lower statement {s!r}", getattr(s, "loc", None))

    def loop(self, cond, body, update, loc) -> list:
        self.pinned |= self._pins_in(body + update)
        if cond is None:
            c, head = TRUE, []
        else:
            c = truthy(self.expr(cond))
            head = self._flush([])
        self.scopes.append({})
        try:
            inner = self.block(body)
            for x in update:
                inner += self.stmt(x)
        finally:
            self.scopes.pop()
        if head:
            # the condition has side effects (nondet, calls): evaluate it into
            # a flag before the loop and again at the end of every iteration
            flag = self.temp("cond")
            pre = [*head, Assign(flag, c)]
            inner += self._recompute(cond, flag)
            c = var(flag, 1)
        else:
            pre = []
        cycle = any(is_cycle_marker(x) for x in walk(inner))
        return pre + [Loop(c, tuple(inner), cycle, f"loop@{loc.line}")]

    def _recompute(self, cond, flag) -> list:
        c = truthy(self.expr(cond))
        return self._flush([Assign(flag, c)])

    def _pins_in(self, stmts) -> set:
        out = set()
        for s in _fw_walk(stmts, self.fw):
            if isinstance(s, F.Call) and s.name == "set_input" and s.args:
                name = resolve_signal(self.hw, self._signal_arg(s.args[0], s.loc))
                if name in self.inputs:
                    out.add(name)
            elif isinstance(s, F.AssignStmt) and isinstance(s.target, (F.HwRef, F.Name)):
                if isinstance(s.target, F.Name) and self.lookup(s.target.name) is not None:
                    continue
                name = resolve_signal(self.hw, s.target.name)
                if name in self.inputs:
                    out.add(name)
        return out

    # -- entry points
    def firmware(self, fw: F.FirmwareProgram) -> list:
        self.fw = fw
        out: list = []
        for d in fw.globals:
            out += self.declare(d)
        main = fw.entry
        if main.params:
            raise CompositionError("main must not take parameters", main.loc)
        body = main.body
        if body and isinstance(body[-1], F.ReturnStmt):
            body = body[:-1]
        out += self.block(body)
        return out

    def prologue(self) -> list:
        return [Assign(CYCLE_VAR, const(0, CYCLE_WIDTH))] + list(self.hw.init)


def _nested_returns(stmts):
    for s in stmts:
        for sub in _children(s):
            yield from (x for x in _fw_walk(sub, None) if isinstance(x, F.ReturnStmt))


def _children(s) -> list:
    if isinstance(s, F.IfStmt):
        return [s.then, s.orelse]
    if isinstance(s, (F.WhileStmt, F.BlockStmt)):
        return [s.body]
    if isinstance(s, F.ForStmt):
        return [s.init, s.update, s.body]
    return []


def _fw_walk(stmts, fw, seen=None):
    """Statements and calls reachable from ``stmts``, following user calls."""
    seen = set() if seen is None else seen
    for s in stmts:
        yield s
        for sub in _children(s):
            yield from _fw_walk(sub, fw, seen)
        for c in _calls_in(s):
            yield c
            if fw is not None and c.name in fw.functions and c.name not in seen:
                seen.add(c.name)
                yield from _fw_walk(fw.functions[c.name].body, fw, seen)


def _calls_in(s):
    def exprs(x):
        if isinstance(x, F.Call):
            yield x
            for a in x.args:
                yield from exprs(a)
        elif isinstance(x, F.Unary):
            yield from exprs(x.arg)
        elif isinstance(x, F.Binary):
            yield from exprs(x.left)
            yield from exprs(x.right)
        elif isinstance(x, F.Cond):
            for y in (x.cond, x.then, x.orelse):
                yield from exprs(y)
        elif isinstance(x, F.Index):
            yield from exprs(x.index)
    if isinstance(s, F.ExprStmt):
        yield from exprs(s.expr)
    elif isinstance(s, F.AssignStmt):
        yield from exprs(s.value)
        if isinstance(s.target, F.Index):
            yield from exprs(s.target.index)
    elif isinstance(s, F.Decl):
        inits = s.init if isinstance(s.init, list) else [s.init]
        for x in inits:
            if x is not None and not isinstance(x, F.Str):
                yield from exprs(x)
    elif isinstance(s, (F.IfStmt, F.WhileStmt)):
        yield from exprs(s.cond)
    elif isinstance(s, F.ForStmt) and s.cond is not None:
        yield from exprs(s.cond)
    elif isinstance(s, F.ReturnStmt) and s.value is not None:
        yield from exprs(s.value)


def compose(fw: F.FirmwareProgram, hw: SwNetlistProgram,
            info: ComposeInfo | None = None, scenario=()) -> list:
    """Single sequential IR program running ``fw`` against ``hw``.

    ``scenario`` lists firmware expressions over hardware signals that are
    assumed after every step.
    """
    c = Composer(hw, info, scenario)
    body = c.firmware(fw)
    if c.info.steps == 0 and hw.state_vars:
        msg = "firmware never calls step(): the hardware clock does not advance"
        log.warning(msg)
        c.info.warnings.append(msg)
    return c.prologue() + body


def compose_statements(stmts: list, hw: SwNetlistProgram, info: ComposeInfo | None = None) -> list:
    """Compose a bare firmware statement list (no functions) with ``hw``."""
    fw = F.FirmwareProgram(functions={"main": F.Function("main", None, [], stmts)})
    return compose(fw, hw, info)
