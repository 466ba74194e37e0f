"""Concrete two's-complement evaluation of :class:`BvExpr` trees.

This is the reference semantics used by trace replay and by every oracle in
the test-suite.  Shifts by an amount >= width yield 0.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .expr import BvExpr, mask


class UnboundVariable(KeyError):
    pass


def _to_signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) else v


def evaluate_with(e: BvExpr, lookup: Callable[[BvExpr], int], memo: dict | None = None) -> int:
    if memo is None:
        memo = {}
    return _ev(e, lookup, memo)


def _ev(e: BvExpr, lookup, memo) -> int:
    key = id(e)
    r = memo.get(key)
    if r is not None:
        return r
    op = e.op
    w = e.width
    if op == "const":
        r = e.params[0]
    elif op == "var":
        r = lookup(e)
        if r is None:
            raise UnboundVariable(e.params)
        r &= mask(w)
    elif op == "ite":
        c = _ev(e.args[0], lookup, memo)
        r = _ev(e.args[1] if c else e.args[2], lookup, memo)
    else:
        a = _ev(e.args[0], lookup, memo)
        if op == "not":
            r = ~a & mask(w)
        elif op == "neg":
            r = -a & mask(w)
        elif op == "redor":
            r = int(a != 0)
        elif op == "redand":
            r = int(a == mask(e.args[0].width))
        elif op == "redxor":
            r = bin(a).count("1") & 1
        elif op == "extract":
            hi, lo = e.params
            r = (a >> lo) & mask(hi - lo + 1)
        elif op == "zext":
            r = a
        elif op == "sext":
            aw = e.args[0].width
            r = _to_signed(a, aw) & mask(w)
        else:
            b = _ev(e.args[1], lookup, memo)
            if op == "and":
                r = a & b
            elif op == "or":
                r = a | b
            elif op == "xor":
                r = a ^ b
            elif op == "add":
                r = (a + b) & mask(w)
            elif op == "sub":
                r = (a - b) & mask(w)
            elif op == "mul":
                r = (a * b) & mask(w)
            elif op == "shl":
                r = 0 if b >= w else (a << b) & mask(w)
            elif op == "lshr":
                r = 0 if b >= w else a >> b
            elif op == "eq":
                r = int(a == b)
            elif op == "ult":
                r = int(a < b)
            elif op == "ule":
                r = int(a <= b)
            elif op == "slt":
                aw = e.args[0].width
                r = int(_to_signed(a, aw) < _to_signed(b, aw))
            elif op == "concat":
                r = (a << e.args[1].width) | b
            else:
                raise ValueError(f"unknown operator {op!r}")
    memo[key] = r
    return r


def evaluate(e: BvExpr, env: Mapping[tuple[str, int], int]) -> int:
    """Evaluate ``e`` with variables looked up by ``(name, version)``."""

    def lookup(node: BvExpr) -> int:
        try:
            return env[node.params]
        except KeyError:
            raise UnboundVariable(node.params) from None

    return _ev(e, lookup, {})


def evaluate_by_name(e: BvExpr, env: Mapping[str, int]) -> int:
    """Evaluate ignoring versions; used on unversioned program IR."""

    def lookup(node: BvExpr) -> int:
        try:
            return env[node.params[0]]
        except KeyError:
            raise UnboundVariable(node.params[0]) from None

    return _ev(e, lookup, {})
