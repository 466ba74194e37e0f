"""Two-phase reference simulator working directly on the elaborated AST.

This is deliberately independent of the BvExpr lowering: values are plain
Python integers and every operator is evaluated at its Verilog context
width.  A cycle settles the combinational logic, runs every clocked block
against the pre-cycle register values, commits all register updates and
settles again.
"""

from __future__ import annotations

from ..verilog import ast as A
from ..verilog.elaborate import ElaboratedDesign, const_eval, lvalue_targets

_M32 = (1 << 32) - 1


def _m(w: int) -> int:
    return (1 << w) - 1


class RefSimError(RuntimeError):
    pass


class _Ctx:
    """Expression evaluation inside one instance."""

    def __init__(self, sim: "ReferenceSimulator", path: str, read, loops: dict):
        self.sim, self.path, self.read, self.loops = sim, path, read, loops

    def sig(self, name):
        return self.sim.design.signals[f"{self.path}.{name}"]

    def const(self, e) -> int:
        return const_eval(e, self.loops)

    def width(self, e) -> int:
        if isinstance(e, A.Number):
            return e.size if e.size is not None else max(32, e.value.bit_length())
        if isinstance(e, A.Ident):
            return 32 if e.name in self.loops else self.sig(e.name).width
        if isinstance(e, A.BitSelect):
            return 1
        if isinstance(e, A.PartSelect):
            return self.const(e.msb) - self.const(e.lsb) + 1
        if isinstance(e, A.IndexedPartSelect):
            return self.const(e.size)
        if isinstance(e, A.Concat):
            return sum(self.width(p) for p in e.parts)
        if isinstance(e, A.Repeat):
            return self.const(e.count) * sum(self.width(p) for p in e.parts)
        if isinstance(e, A.Unary):
            return 1 if e.op == "!" else self.width(e.arg)
        if isinstance(e, A.Reduction):
            return 1
        if isinstance(e, A.Binary):
            if e.op in A.COMPARE_OPS or e.op in A.LOGICAL_OPS:
                return 1
            if e.op in A.SHIFT_OPS:
                return self.width(e.lhs)
            return max(self.width(e.lhs), self.width(e.rhs))
        if isinstance(e, A.Ternary):
            return max(self.width(e.then), self.width(e.other))
        raise RefSimError(f"cannot size {e!r}")

    def bits(self, e) -> tuple:
        """(value of base, lo, width) for a select expression."""
        s = self.sig(e.base.name)
        base = self.read(e.base.name)
        if isinstance(e, A.BitSelect):
            return base, self.value(e.index, self.width(e.index)) - s.lsb, 1
        if isinstance(e, A.PartSelect):
            hi, lo = self.const(e.msb), self.const(e.lsb)
            return base, lo - s.lsb, hi - lo + 1
        size = self.const(e.size)
        off = self.value(e.offset, self.width(e.offset))
        lo = off - size + 1 if e.down else off
        return base, lo - s.lsb, size

    def value(self, e, w: int) -> int:
        """Value of ``e`` evaluated in a context of width ``w``."""
        if isinstance(e, A.Number):
            return e.value & _m(w)
        if isinstance(e, A.Ident):
            if e.name in self.loops:
                return self.loops[e.name] & _m(w)
            return self.read(e.name) & _m(w)
        if isinstance(e, (A.BitSelect, A.PartSelect, A.IndexedPartSelect)):
            base, lo, n = self.bits(e)
            bw = self.sig(e.base.name).width
            if lo < 0 or lo + n > bw:
                return 0
            return (base >> lo) & _m(n) & _m(w)
        if isinstance(e, (A.Concat, A.Repeat)):
            parts = list(e.parts)
            if isinstance(e, A.Repeat):
                parts = parts * self.const(e.count)
            v = 0
            for p in parts:
                pw = self.width(p)
                v = (v << pw) | self.value(p, pw)
            return v & _m(w)
        if isinstance(e, A.Unary):
            if e.op == "!":
                return int(self.value(e.arg, self.width(e.arg)) == 0)
            a = self.value(e.arg, w)
            return {"~": ~a, "-": -a, "+": a}[e.op] & _m(w)
        if isinstance(e, A.Reduction):
            aw = self.width(e.arg)
            a = self.value(e.arg, aw)
            base = e.op.lstrip("~")
            r = {"&": int(a == _m(aw)), "|": int(a != 0), "^": bin(a).count("1") & 1}[base]
            return (r ^ 1 if e.op.startswith("~") else r) & _m(w)
        if isinstance(e, A.Binary):
            op = e.op
            if op in A.COMPARE_OPS:
                cw = max(self.width(e.lhs), self.width(e.rhs))
                a, b = self.value(e.lhs, cw), self.value(e.rhs, cw)
                return int({"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
                            ">": a > b, ">=": a >= b}[op])
            if op in A.LOGICAL_OPS:
                a = self.value(e.lhs, self.width(e.lhs)) != 0
                b = self.value(e.rhs, self.width(e.rhs)) != 0
                return int(a and b) if op == "&&" else int(a or b)
            if op in A.SHIFT_OPS:
                a = self.value(e.lhs, w)
                n = self.value(e.rhs, self.width(e.rhs))
                if n >= w:
                    return 0
                return (a << n) & _m(w) if op in ("<<", "<<<") else a >> n
            a, b = self.value(e.lhs, w), self.value(e.rhs, w)
            r = {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b,
                 "~^": ~(a ^ b), "^~": ~(a ^ b)}[op]
            return r & _m(w)
        if isinstance(e, A.Ternary):
            c = self.value(e.cond, self.width(e.cond))
            return self.value(e.then if c else e.other, w)
        raise RefSimError(f"cannot evaluate {e!r}")


class ReferenceSimulator:
    """Cycle simulator of an elaborated design.

    ``values`` maps hierarchical names to integers; ``step(inputs)`` runs
    one clock cycle with the given top-level input values.
    """

    def __init__(self, design: ElaboratedDesign, max_settle: int = 1000):
        self.design = design
        self.max_settle = max_settle
        self.nodes = design.instances()
        self.values: dict = {n: 0 for n in design.signals}
        self._init()

    # -- helpers
    def _write(self, path: str, ctx: _Ctx, lhs, value: int, store: dict) -> None:
        """Assign ``value`` (already at the width of ``lhs``) into ``store``."""
        if isinstance(lhs, A.Ident):
            s = ctx.sig(lhs.name)
            store[f"{path}.{lhs.name}"] = value & _m(s.width)
            return
        if isinstance(lhs, A.Concat):
            pos = sum(ctx.width(p) for p in lhs.parts)
            for p in lhs.parts:
                pw = ctx.width(p)
                pos -= pw
                self._write(path, ctx, p, (value >> pos) & _m(pw), store)
            return
        name = f"{path}.{lhs.base.name}"
        bw = ctx.sig(lhs.base.name).width
        _, lo, n = ctx.bits(lhs)
        cur = store.get(name, self.values[name])
        for i in range(n):
            pos = lo + i
            if 0 <= pos < bw:
                cur = (cur & ~(1 << pos)) | (((value >> i) & 1) << pos)
        store[name] = cur & _m(bw)

    def _exec(self, path, s, read_fn, store: dict, nba: dict | None, loops: dict) -> None:
        def read(name):
            h = f"{path}.{name}"
            return store[h] if h in store else read_fn(h)
        ctx = _Ctx(self, path, read, loops)
        if isinstance(s, A.Block):
            for x in s.stmts:
                self._exec(path, x, read_fn, store, nba, loops)
        elif isinstance(s, A.If):
            if ctx.value(s.cond, ctx.width(s.cond)):
                self._exec(path, s.then, read_fn, store, nba, loops)
            elif s.other is not None:
                self._exec(path, s.other, read_fn, store, nba, loops)
        elif isinstance(s, A.ProcAssign):
            w = ctx.width(s.lhs)
            v = ctx.value(s.rhs, max(w, ctx.width(s.rhs))) & _m(w)
            if s.blocking or nba is None:
                self._write(path, ctx, s.lhs, v, store)
            else:
                # partial non-blocking writes accumulate on the pending value
                tmp = {h: nba[h] for h in (f"{path}.{t}" for t in lvalue_targets(s.lhs)) if h in nba}
                self._write(path, ctx, s.lhs, v, tmp)
                nba.update(tmp)
        elif isinstance(s, A.For):
            var_name = s.init.lhs.name
            env = dict(loops)
            env[var_name] = const_eval(s.init.rhs, env)
            while const_eval(s.cond, env):
                self._exec(path, s.body, read_fn, store, nba, env)
                env[var_name] = const_eval(s.step.rhs, env) & _M32
        else:
            raise RefSimError(f"cannot execute {s!r}")

    # -- phases
    def settle(self) -> None:
        """Evaluate combinational logic until nothing changes."""
        for _ in range(self.max_settle):
            before = dict(self.values)
            self._comb_pass()
            if self.values == before:
                return
        raise RefSimError("combinational logic does not settle")

    def _comb_pass(self) -> None:
        vals = self.values
        clock = self.design.clock
        for n in self.nodes:
            path = n.path
            read = lambda name, p=path: vals[f"{p}.{name}"]  # noqa: E731
            ctx = _Ctx(self, path, read, {})
            for a in n.ast.continuous_assigns:
                store: dict = {}
                for t in lvalue_targets(a.lhs):
                    store[f"{path}.{t}"] = 0
                w = ctx.width(a.lhs)
                self._write(path, ctx, a.lhs, ctx.value(a.rhs, max(w, ctx.width(a.rhs))) & _m(w), store)
                vals.update(store)
            for blk in n.ast.always_blocks:
                if blk.clock is None:
                    store = {}
                    self._exec(path, blk.body, lambda h: vals[h], store, None, {})
                    vals.update(store)
            for child in n.children:
                for p in child.ast.ports:
                    actual = child.bindings[p.name]
                    formal = f"{child.path}.{p.name}"
                    if formal == clock:
                        continue
                    if p.direction == "input":
                        vals[formal] = ctx.value(actual, max(p.width, ctx.width(actual))) & _m(p.width)
                    else:
                        store = {t: 0 for t in (f"{path}.{x}" for x in lvalue_targets(actual))}
                        self._write(path, ctx, actual, vals[formal], store)
                        vals.update(store)

    def _init(self) -> None:
        for n in self.nodes:
            for ini in n.ast.initial_blocks:
                store: dict = {}
                self._exec(n.path, ini.body, lambda h: self.values[h], store, None, {})
                self.values.update(store)
        self.settle()

    def set_inputs(self, inputs: dict) -> None:
        for k, v in inputs.items():
            s = self.design.signals[k]
            self.values[k] = v & _m(s.width)

    def step(self, inputs: dict | None = None) -> None:
        if inputs:
            self.set_inputs(inputs)
        self.settle()
        pre = dict(self.values)
        pending: dict = {}
        for n in self.nodes:
            for blk in n.ast.always_blocks:
                if blk.clock is None:
                    continue
                store: dict = {}
                nba: dict = {}
                self._exec(n.path, blk.body, lambda h: pre[h], store, nba, {})
                pending.update(store)
                pending.update(nba)
        self.values.update(pending)
        self.settle()

    def registers(self, names) -> dict:
        return {n: self.values[n] for n in names}
