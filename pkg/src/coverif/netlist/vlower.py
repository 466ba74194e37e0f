"""Verilog expressions to BvExpr under the usual context-width rules.

Operands of arithmetic and bitwise operators are extended to the width of
their context (the maximum of the assignment target and every
context-determined operand), comparisons size their operands against each
other, and the result is truncated to the target.  Truncations are pushed
into the operands where that is exact, so ``q = foo + 1`` on a 3-bit ``q``
becomes a 3-bit addition rather than a 32-bit one.
"""

from __future__ import annotations

from typing import Callable

from ..bitvec import (
    BvExpr, LoweringError, add, bvand, bvnot, bvor, bvxor, concat, concat_all, const,
    const_wrap, eq, extract, fold, ite, lower_bit_assign, lower_dynamic_bit_assign,
    lower_dynamic_select, lshr, mul, ne, neg, redand, redor, redxor, resize,
    shl, sub, truthy, ule, ult, zext,
)
from ..diagnostics import SourceError, UnsupportedConstruct
from ..verilog import ast as A
from ..verilog.elaborate import ElaborationError, const_eval

_LOW_CLOSED = {"add", "sub", "mul", "and", "or", "xor"}


def trunc(e: BvExpr, w: int) -> BvExpr:
    """The low ``w`` bits of ``e`` (zero-extended when ``w`` is wider)."""
    if e.width == w:
        return e
    if w > e.width:
        return zext(e, w) if e.op != "const" else const(e.value, w)
    op = e.op
    if op == "const":
        return const_wrap(e.value, w)
    if op == "zext":
        x = e.args[0]
        return x if x.width == w else trunc(x, w)
    if op in _LOW_CLOSED:
        return fold(BvExpr(op, (trunc(e.args[0], w), trunc(e.args[1], w)), w))
    if op in ("not", "neg"):
        return BvExpr(op, (trunc(e.args[0], w),), w)
    if op == "shl":
        return shl(trunc(e.args[0], w), e.args[1])
    if op == "ite":
        return ite(e.args[0], trunc(e.args[1], w), trunc(e.args[2], w))
    if op == "concat":
        hi, lo = e.args
        if w <= lo.width:
            return trunc(lo, w)
        return concat(trunc(hi, w - lo.width), lo)
    if op == "extract":
        lo = e.params[1]
        return extract(e.args[0], lo + w - 1, lo)
    return extract(e, w - 1, 0)


def _effective_width(e: BvExpr) -> int:
    if e.op == "const":
        return max(1, e.value.bit_length())
    if e.op == "zext":
        return _effective_width(e.args[0])
    return e.width


def _compare(op: str, a: BvExpr, b: BvExpr) -> BvExpr:
    w = max(_effective_width(a), _effective_width(b))
    if w < a.width:
        a, b = trunc(a, w), trunc(b, w)
    if op == "==":
        return eq(a, b)
    if op == "!=":
        return ne(a, b)
    if op == "<":
        return ult(a, b)
    if op == "<=":
        return ule(a, b)
    if op == ">":
        return ult(b, a)
    if op == ">=":
        return ule(b, a)
    raise AssertionError(op)


class ExprLowerer:
    """Lower expressions of one module instance.

    ``signal(name)`` returns ``(width, lsb)`` for a local name,
    ``read(name)`` the BvExpr to use when ``name`` is read, and ``loop_env``
    maps unrolled loop variables to their current values.
    """

    def __init__(self, signal: Callable[[str], tuple], read: Callable[[str], BvExpr],
                 loop_env: dict | None = None, where: str = ""):
        self.signal = signal
        self.read = read
        self.loop_env = dict(loop_env or {})
        self.where = where

    def with_loop(self, env: dict) -> "ExprLowerer":
        return ExprLowerer(self.signal, self.read, env, self.where)

    # ------------------------------------------------------------ widths
    def const_value(self, e, what: str) -> int:
        try:
            return const_eval(e, self.loop_env, what)
        except ElaborationError:
            raise UnsupportedConstruct(f"non-constant {what}", getattr(e, "loc", None)) from None

    def width(self, e) -> int:
        if isinstance(e, A.Number):
            if e.size is None:
                return max(32, e.value.bit_length())
            return e.size
        if isinstance(e, A.Ident):
            if e.name in self.loop_env:
                return 32
            return self.signal(e.name)[0]
        if isinstance(e, A.BitSelect):
            return 1
        if isinstance(e, A.PartSelect):
            return self.const_value(e.msb, "part-select bound") - self.const_value(e.lsb, "part-select bound") + 1
        if isinstance(e, A.IndexedPartSelect):
            return self.const_value(e.size, "indexed part-select width")
        if isinstance(e, A.Concat):
            return sum(self.width(p) for p in e.parts)
        if isinstance(e, A.Repeat):
            return self.const_value(e.count, "replication count") * sum(self.width(p) for p in e.parts)
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
        raise SourceError("unsupported expression", getattr(e, "loc", None))

    # ------------------------------------------------------------ values
    def rvalue(self, e, want: int) -> BvExpr:
        """Value of ``e`` assigned to a ``want``-bit target."""
        w = max(want, self.width(e))
        return fold(trunc(self.lower(e, w), want))

    def cond(self, e) -> BvExpr:
        return fold(truthy(self.lower(e, self.width(e))))

    def lower(self, e, w: int) -> BvExpr:
        out = self._lower(e, w)
        assert out.width == w, (e, w, out.width)
        return out

    def _lower(self, e, w: int) -> BvExpr:
        if isinstance(e, A.Number):
            return const_wrap(e.value, w)
        if isinstance(e, A.Ident):
            if e.name in self.loop_env:
                return const_wrap(self.loop_env[e.name], w)
            return resize(self.read(e.name), w)
        if isinstance(e, A.BitSelect):
            return resize(self.select_bit(e), w)
        if isinstance(e, (A.PartSelect, A.IndexedPartSelect)):
            hi, lo = self.slice_bounds(e)
            base = self.read(e.base.name)
            return resize(base if (lo == 0 and hi == base.width - 1) else extract(base, hi, lo), w)
        if isinstance(e, A.Concat):
            return resize(concat_all([self.lower(p, self.width(p)) for p in e.parts]), w)
        if isinstance(e, A.Repeat):
            n = self.const_value(e.count, "replication count")
            parts = [self.lower(p, self.width(p)) for p in e.parts] * n
            return resize(concat_all(parts), w)
        if isinstance(e, A.Unary):
            if e.op == "~":
                return bvnot(self.lower(e.arg, w))
            if e.op == "-":
                return neg(self.lower(e.arg, w))
            if e.op == "+":
                return self.lower(e.arg, w)
            if e.op == "!":
                return resize(bvnot(truthy(self.lower(e.arg, self.width(e.arg)))), w)
        if isinstance(e, A.Reduction):
            a = self.lower(e.arg, self.width(e.arg))
            base = {"&": redand, "|": redor, "^": redxor,
                    "~&": redand, "~|": redor, "~^": redxor}[e.op](a)
            if e.op.startswith("~"):
                base = bvnot(base)
            return resize(base, w)
        if isinstance(e, A.Binary):
            return self._binary(e, w)
        if isinstance(e, A.Ternary):
            c = truthy(self.lower(e.cond, self.width(e.cond)))
            return ite(c, self.lower(e.then, w), self.lower(e.other, w))
        raise SourceError("unsupported expression", getattr(e, "loc", None))

    def _binary(self, e: A.Binary, w: int) -> BvExpr:
        op = e.op
        if op in A.COMPARE_OPS:
            cw = max(self.width(e.lhs), self.width(e.rhs))
            r = _compare(op, self.lower(e.lhs, cw), self.lower(e.rhs, cw))
            return resize(r, w)
        if op in A.LOGICAL_OPS:
            a = truthy(self.lower(e.lhs, self.width(e.lhs)))
            b = truthy(self.lower(e.rhs, self.width(e.rhs)))
            return resize(bvand(a, b) if op == "&&" else bvor(a, b), w)
        if op in A.SHIFT_OPS:
            a = self.lower(e.lhs, w)
            amt = self.lower(e.rhs, self.width(e.rhs))
            amt = fold(amt)
            return shl(a, amt) if op in ("<<", "<<<") else lshr(a, amt)
        a = self.lower(e.lhs, w)
        b = self.lower(e.rhs, w)
        if op == "+":
            return add(a, b)
        if op == "-":
            return sub(a, b)
        if op == "*":
            return mul(a, b)
        if op == "&":
            return bvand(a, b)
        if op == "|":
            return bvor(a, b)
        if op == "^":
            return bvxor(a, b)
        if op in ("~^", "^~"):
            return bvnot(bvxor(a, b))
        raise UnsupportedConstruct(f"operator {op}", e.loc)

    # ------------------------------------------------------------ selects
    def _index(self, e) -> int | None:
        try:
            return const_eval(e, self.loop_env, "index")
        except ElaborationError:
            return None

    def slice_bounds(self, e) -> tuple[int, int]:
        """Bit positions (relative to bit 0 of the storage) of a part select."""
        width, lsb0 = self.signal(e.base.name)
        if isinstance(e, A.PartSelect):
            msb = self.const_value(e.msb, "part-select bound")
            lsb = self.const_value(e.lsb, "part-select bound")
        else:
            size = self.const_value(e.size, "indexed part-select width")
            off = self._index(e.offset)
            if off is None:
                folded = fold(self.lower(e.offset, self.width(e.offset)))
                if folded.op != "const":
                    raise UnsupportedConstruct("indexed part-select with a run-time offset", e.loc,
                                               "the offset must be constant after loop unrolling")
                off = folded.value
            if e.down:
                msb, lsb = off, off - size + 1
            else:
                msb, lsb = off + size - 1, off
        hi, lo = msb - lsb0, lsb - lsb0
        if lo < 0 or hi >= width or hi < lo:
            raise ElaborationError(f"select [{msb}:{lsb}] out of range for {e.base.name}", e.loc)
        return hi, lo

    def select_bit(self, e: A.BitSelect) -> BvExpr:
        width, lsb0 = self.signal(e.base.name)
        base = self.read(e.base.name)
        idx = self._index(e.index)
        if idx is not None:
            pos = idx - lsb0
            if not 0 <= pos < width:
                raise ElaborationError(f"bit index {idx} out of range for {e.base.name}", e.loc)
            return extract(base, pos, pos)
        ix = self.lower(e.index, self.width(e.index))
        if lsb0:
            ix = sub(ix, const_wrap(lsb0, ix.width))
        return lower_dynamic_select(base, ix)

    # ------------------------------------------------------------ targets
    def assignments(self, lhs, value: BvExpr, current: Callable[[str], BvExpr]) -> list:
        """``[(target, full-width value)]`` for ``lhs = value``.

        ``value`` already has the width of ``lhs``; ``current(name)`` supplies
        the old value for partial updates.
        """
        if isinstance(lhs, A.Ident):
            return [(lhs.name, value)]
        if isinstance(lhs, A.Concat):
            out = []
            pos = value.width
            for p in lhs.parts:
                pw = self.width(p)
                pos -= pw
                out += self.assignments(p, extract(value, pos + pw - 1, pos), current)
            return out
        name = lhs.base.name
        old = current(name)
        if isinstance(lhs, A.BitSelect):
            idx = self._index(lhs.index)
            width, lsb0 = self.signal(name)
            if idx is None:
                ix = self.lower(lhs.index, self.width(lhs.index))
                if lsb0:
                    ix = sub(ix, const_wrap(lsb0, ix.width))
                return [(name, lower_dynamic_bit_assign(old, ix, value))]
            pos = idx - lsb0
            if not 0 <= pos < width:
                raise ElaborationError(f"bit index {idx} out of range for {name}", lhs.loc)
            return [(name, fold(lower_bit_assign(old, pos, pos, value)))]
        if isinstance(lhs, (A.PartSelect, A.IndexedPartSelect)):
            hi, lo = self.slice_bounds(lhs)
            try:
                return [(name, fold(lower_bit_assign(old, hi, lo, value)))]
            except LoweringError as exc:
                raise ElaborationError(str(exc), lhs.loc) from None
        raise SourceError("invalid assignment target", getattr(lhs, "loc", None))

    def lvalue_width(self, lhs) -> int:
        return self.width(lhs)


def read_names(e, loop_env=()) -> set:
    """Identifiers read by an expression (loop variables excluded)."""
    out = set()

    def go(x):
        if isinstance(x, A.Ident):
            if x.name not in loop_env:
                out.add(x.name)
        elif isinstance(x, A.Number) or x is None:
            return
        else:
            for f in ("base", "index", "msb", "lsb", "offset", "size", "arg", "lhs", "rhs",
                      "cond", "then", "other", "count"):
                sub_e = getattr(x, f, None)
                if sub_e is not None and not isinstance(sub_e, (int, str, bool)):
                    go(sub_e)
            for p in getattr(x, "parts", None) or []:
                go(p)
    go(e)
    return out


def lvalue_reads(lhs, loop_env=()) -> set:
    """Names read by the index expressions of an assignment target."""
    out = set()
    if isinstance(lhs, A.Concat):
        for p in lhs.parts:
            out |= lvalue_reads(p, loop_env)
    elif isinstance(lhs, A.BitSelect):
        out |= read_names(lhs.index, loop_env)
    elif isinstance(lhs, A.IndexedPartSelect):
        out |= read_names(lhs.offset, loop_env)
    return out


def is_partial(lhs, signal) -> bool:
    """True when ``lhs`` does not cover every bit of every target."""
    if isinstance(lhs, A.Ident):
        return False
    if isinstance(lhs, A.Concat):
        return any(is_partial(p, signal) for p in lhs.parts)
    return True
