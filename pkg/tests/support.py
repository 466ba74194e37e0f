"""Shared helpers for the test suite.

The oracles here are deliberately written without the package's own
evaluator: a numpy evaluator that computes an expression over every
assignment at once, and bit-list reference models of the vector
lowerings.
"""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from coverif import bitvec as B
from coverif.bitvec.expr import BvExpr
from coverif.netlist.ir import Assert, Assign, If
from coverif.sat import BACKENDS

SAT_BACKENDS = sorted(BACKENDS)
GOLDEN = Path(__file__).parent / "golden"


# ---------------------------------------------------------------- numpy oracle

def _m(w: int) -> np.uint64:
    return np.uint64((1 << w) - 1)


def np_eval(e: BvExpr, env: dict) -> np.ndarray:
    """Evaluate ``e`` over arrays of values; ``env`` maps name -> uint64 array."""
    memo: dict = {}

    def go(x: BvExpr) -> np.ndarray:
        k = id(x)
        if k in memo:
            return memo[k]
        op, w = x.op, x.width
        if op == "const":
            r = np.uint64(x.params[0])
        elif op == "var":
            r = env[x.params[0]] & _m(w)
        elif op == "ite":
            r = np.where(go(x.args[0]) != 0, go(x.args[1]), go(x.args[2])).astype(np.uint64)
        else:
            a = go(x.args[0])
            aw = x.args[0].width
            if op == "not":
                r = ~a & _m(w)
            elif op == "neg":
                r = (np.uint64(0) - a) & _m(w)
            elif op == "redor":
                r = (a != 0).astype(np.uint64)
            elif op == "redand":
                r = (a == _m(aw)).astype(np.uint64)
            elif op == "redxor":
                r = np.zeros_like(a + np.uint64(0))
                for i in range(aw):
                    r = r ^ ((a >> np.uint64(i)) & np.uint64(1))
            elif op == "extract":
                hi, lo = x.params
                r = (a >> np.uint64(lo)) & _m(hi - lo + 1)
            elif op == "zext":
                r = a
            elif op == "sext":
                sign = (a >> np.uint64(aw - 1)) & np.uint64(1)
                r = np.where(sign != 0, a | (_m(w) ^ _m(aw)), a).astype(np.uint64)
            else:
                b = go(x.args[1])
                if op == "and":
                    r = a & b
                elif op == "or":
                    r = a | b
                elif op == "xor":
                    r = a ^ b
                elif op == "add":
                    r = (a + b) & _m(w)
                elif op == "sub":
                    r = (a - b) & _m(w)
                elif op == "mul":
                    r = (a * b) & _m(w)
                elif op in ("shl", "lshr"):
                    big = b >= np.uint64(w)
                    amt = np.minimum(b, np.uint64(63))
                    sh = (a << amt) if op == "shl" else (a >> amt)
                    r = np.where(big, np.uint64(0), sh & _m(w)).astype(np.uint64)
                elif op == "eq":
                    r = (a == b).astype(np.uint64)
                elif op == "ult":
                    r = (a < b).astype(np.uint64)
                elif op == "ule":
                    r = (a <= b).astype(np.uint64)
                elif op == "slt":
                    s = np.uint64(1 << (aw - 1))
                    r = ((a ^ s) < (b ^ s)).astype(np.uint64)
                elif op == "concat":
                    r = (a << np.uint64(x.args[1].width)) | b
                else:
                    raise ValueError(op)
        memo[k] = r
        return r

    with np.errstate(over="ignore"):
        return go(e)


def all_assignments(variables: list) -> dict:
    """Arrays enumerating every assignment of ``[(name, width)]``."""
    total = sum(w for _, w in variables)
    idx = np.arange(1 << total, dtype=np.uint64)
    env, shift = {}, 0
    for name, w in variables:
        env[name] = (idx >> np.uint64(shift)) & _m(w)
        shift += w
    return env


def satisfiable_by_enumeration(e: BvExpr, variables: list) -> bool:
    env = all_assignments(variables)
    r = np_eval(e, env)
    return bool(np.any(np.broadcast_to(r, env[variables[0][0]].shape) != 0)) if variables else bool(r)


# ---------------------------------------------------------------- random expressions

_BIN = ["and", "or", "xor", "add", "sub", "mul"]
_CMP = ["eq", "ult", "ule", "slt"]


class ExprGen:
    """Random well-formed expressions over a fixed set of variables."""

    def __init__(self, rng: random.Random, variables: list, max_width: int = 8):
        self.rng = rng
        self.vars = variables
        self.max_width = max_width

    def leaf(self, w: int) -> BvExpr:
        rng = self.rng
        cands = [B.var(n, vw) for n, vw in self.vars]
        if cands and rng.random() < 0.75:
            v = rng.choice(cands)
            return self.fit(v, w)
        return B.const(rng.randrange(1 << w), w)

    def fit(self, e: BvExpr, w: int) -> BvExpr:
        if e.width == w:
            return e
        if e.width < w:
            return B.sext(e, w) if self.rng.random() < 0.3 else B.zext(e, w)
        lo = self.rng.randrange(e.width - w + 1)
        return B.extract(e, lo + w - 1, lo)

    def bool(self, depth: int) -> BvExpr:
        rng = self.rng
        k = rng.random()
        if depth <= 0 or k < 0.15:
            return self.leaf(1)
        if k < 0.55:
            w = rng.randint(1, self.max_width)
            return B.BvExpr(rng.choice(_CMP), (self.bv(w, depth - 1), self.bv(w, depth - 1)), 1)
        if k < 0.65:
            w = rng.randint(1, self.max_width)
            return B.BvExpr(rng.choice(["redor", "redand", "redxor"]), (self.bv(w, depth - 1),), 1)
        if k < 0.75:
            return B.bvnot(self.bool(depth - 1))
        return B.BvExpr(rng.choice(["and", "or", "xor"]), (self.bool(depth - 1), self.bool(depth - 1)), 1)

    def bv(self, w: int, depth: int) -> BvExpr:
        rng = self.rng
        if w == 1 and rng.random() < 0.3:
            return self.bool(depth)
        if depth <= 0:
            return self.leaf(w)
        k = rng.random()
        if k < 0.40:
            return B.BvExpr(rng.choice(_BIN), (self.bv(w, depth - 1), self.bv(w, depth - 1)), w)
        if k < 0.52:
            amt_w = rng.randint(1, 4)
            return B.BvExpr(rng.choice(["shl", "lshr"]), (self.bv(w, depth - 1), self.bv(amt_w, depth - 1)), w)
        if k < 0.62:
            return B.ite(self.bool(depth - 1), self.bv(w, depth - 1), self.bv(w, depth - 1))
        if k < 0.70:
            return B.BvExpr(rng.choice(["not", "neg"]), (self.bv(w, depth - 1),), w)
        if k < 0.80 and w >= 2:
            split = rng.randint(1, w - 1)
            return B.concat(self.bv(w - split, depth - 1), self.bv(split, depth - 1))
        if k < 0.90:
            wider = rng.randint(w, min(self.max_width + 4, w + 4))
            inner = self.bv(wider, depth - 1)
            lo = rng.randrange(wider - w + 1)
            return B.extract(inner, lo + w - 1, lo)
        return self.leaf(w)


def random_vars(rng: random.Random, max_vars: int = 3, max_width: int = 6) -> list:
    n = rng.randint(1, max_vars)
    return [(f"v{i}", rng.randint(1, max_width)) for i in range(n)]


# ---------------------------------------------------------------- bit-list reference

def to_bits(v: int, w: int) -> list:
    return [(v >> i) & 1 for i in range(w)]          # index 0 = least significant


def from_bits(bits: list) -> int:
    return sum(b << i for i, b in enumerate(bits))


def ref_bit_assign(old: int, w: int, hi: int, lo: int, rhs: int, rw: int) -> int:
    bits = to_bits(old, w)
    src = to_bits(rhs, rw)
    for i in range(lo, hi + 1):
        j = i - lo
        bits[i] = src[j] if j < rw else 0
    return from_bits(bits)


def ref_concat(slices: list) -> int:
    """``slices`` is [(value, width, hi, lo)], first slice most significant."""
    out: list = []
    for v, w, hi, lo in reversed(slices):
        out += to_bits(v, w)[lo:hi + 1]
    return from_bits(out)


def ref_part_select(v: int, w: int, lo: int, width: int) -> int:
    return from_bits(to_bits(v, w)[lo:lo + width])


# ---------------------------------------------------------------- the reset/m/t fragment

def fragment(width: int = 8, assertion: BvExpr | None = None, label: str = "ok") -> list:
    """``if (reset) {m=0; t=0;} else if (c > d) m = c+d; else t = (c&3)<<d;``"""
    R, C, D = (B.var(n, width) for n in ("reset", "c", "d"))
    three = B.const(3, width)
    prog = [If(B.ne(R, B.const(0, width)),
               (Assign("m", B.const(0, width)), Assign("t", B.const(0, width))),
               (If(B.ugt(C, D),
                   (Assign("m", B.add(C, D)),),
                   (Assign("t", B.shl(B.bvand(C, three), D)),)),))]
    prog.append(Assert(label, B.TRUE if assertion is None else assertion))
    return prog
