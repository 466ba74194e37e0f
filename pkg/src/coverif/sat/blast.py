"""Tseitin bit-blasting of :class:`BvExpr` constraints into a CDCL instance.

Adders are ripple-carry, multiplication is shift-and-add, shifts are barrel
mux layers, comparisons run a borrow chain.  Gates fold constants and are
structurally hashed, per instance only.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from ..bitvec.expr import BvExpr
from . import make_solver
from .errors import SolverError


class BlastError(SolverError):
    pass


@dataclass
class SatResult:
    sat: bool
    model: dict = field(default_factory=dict)  # (name, version) -> int

    @property
    def status(self) -> str:
        return "sat" if self.sat else "unsat"


def _env_timeout() -> float:
    raw = os.environ.get("COVERIF_SOLVER_TIMEOUT_MS", "0").strip() or "0"
    try:
        ms = int(raw)
    except ValueError:
        raise SolverError(f"COVERIF_SOLVER_TIMEOUT_MS must be an integer, got {raw!r}") from None
    return ms / 1000.0 if ms > 0 else 0.0


class CnfInstance:
    """One incremental SAT instance plus the encoding caches that belong to it."""

    def __init__(self, backend: str | None = None, max_width: int = 64,
                 timeout: float | None = None, record: bool = False):
        self.solver = make_solver(backend)
        self.max_width = max_width
        self.record = record
        self.clause_log: list[list[int]] = []
        self.cache: dict[BvExpr, list[int]] = {}
        self.gates: dict[tuple, int] = {}
        self.var_bits: dict[tuple[str, int], list[int]] = {}
        self.activations: list[int] = []
        self.solve_calls = 0
        self.solve_time = 0.0
        t = _env_timeout() if timeout is None else timeout
        if t:
            self.solver.set_budget(seconds=t)
        self.T = self.solver.new_var()
        self._clause([self.T])

    # -- raw clause plumbing -------------------------------------------
    def _clause(self, lits: list[int]) -> None:
        if self.record:
            self.clause_log.append(list(lits))
        self.solver.add_clause(lits)

    def new_lit(self) -> int:
        return self.solver.new_var()

    def add_clause(self, lits) -> None:
        self._clause(list(lits))

    @property
    def num_vars(self) -> int:
        return self.solver.num_vars()

    # -- gates -----------------------------------------------------------
    def AND(self, a: int, b: int) -> int:
        T = self.T
        if a == -T or b == -T or a == -b:
            return -T
        if a == T:
            return b
        if b == T or a == b:
            return a
        key = ("&", a, b) if a < b else ("&", b, a)
        o = self.gates.get(key)
        if o is None:
            o = self.new_lit()
            self._clause([-o, a])
            self._clause([-o, b])
            self._clause([o, -a, -b])
            self.gates[key] = o
        return o

    def OR(self, a: int, b: int) -> int:
        return -self.AND(-a, -b)

    def ANDN(self, lits: list[int]) -> int:
        T = self.T
        xs = []
        seen = set()
        for x in lits:
            if x == -T or -x in seen:
                return -T
            if x == T or x in seen:
                continue
            seen.add(x)
            xs.append(x)
        if not xs:
            return T
        if len(xs) == 1:
            return xs[0]
        if len(xs) == 2:
            return self.AND(xs[0], xs[1])
        key = ("&n",) + tuple(sorted(xs))
        o = self.gates.get(key)
        if o is None:
            o = self.new_lit()
            for x in xs:
                self._clause([-o, x])
            self._clause([o] + [-x for x in xs])
            self.gates[key] = o
        return o

    def ORN(self, lits: list[int]) -> int:
        return -self.ANDN([-x for x in lits])

    def XOR(self, a: int, b: int) -> int:
        T = self.T
        if a == -T:
            return b
        if b == -T:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return -T
        if a == -b:
            return T
        neg = (a < 0) != (b < 0)
        x, y = abs(a), abs(b)
        key = ("^", x, y) if x < y else ("^", y, x)
        o = self.gates.get(key)
        if o is None:
            o = self.new_lit()
            self._clause([-o, x, y])
            self._clause([-o, -x, -y])
            self._clause([o, -x, y])
            self._clause([o, x, -y])
            self.gates[key] = o
        return -o if neg else o

    def MUX(self, s: int, t: int, e: int) -> int:
        T = self.T
        if s == T or t == e:
            return t
        if s == -T:
            return e
        if s < 0:
            s, t, e = -s, e, t
        if t == T and e == -T:
            return s
        if t == -T and e == T:
            return -s
        if t == T:
            return self.OR(s, e)
        if t == -T:
            return self.AND(-s, e)
        if e == T:
            return self.OR(-s, t)
        if e == -T:
            return self.AND(s, t)
        key = ("?", s, t, e)
        o = self.gates.get(key)
        if o is None:
            o = self.new_lit()
            self._clause([-s, -t, o])
            self._clause([-s, t, -o])
            self._clause([s, -e, o])
            self._clause([s, e, -o])
            self._clause([-t, -e, o])
            self._clause([t, e, -o])
            self.gates[key] = o
        return o

    # -- word-level circuits -------------------------------------------
    def _adder(self, a: list[int], b: list[int], cin: int) -> list[int]:
        out = []
        c = cin
        for x, y in zip(a, b):
            t = self.XOR(x, y)
            out.append(self.XOR(t, c))
            c = self.OR(self.AND(x, y), self.AND(c, t))
        return out

    def _ult(self, a: list[int], b: list[int]) -> int:
        lt = -self.T
        for x, y in zip(a, b):
            # lt_i = (!x & y) | (!(x ^ y) & lt_{i-1})
            lt = self.OR(self.AND(-x, y), self.AND(-self.XOR(x, y), lt))
        return lt

    def _mul(self, a: list[int], b: list[int]) -> list[int]:
        w = len(a)
        F = -self.T
        acc = [F] * w
        for i in range(w):
            if b[i] == F:
                continue
            part = [F] * i + [self.AND(a[j], b[i]) for j in range(w - i)]
            acc = self._adder(acc, part, F)
        return acc

    def _shift(self, a: list[int], s: list[int], left: bool) -> list[int]:
        w = len(a)
        F = -self.T
        cur = list(a)
        overflow = []
        for j, sj in enumerate(s):
            k = 1 << j
            if k >= w:
                overflow.append(sj)
                continue
            if left:
                shifted = [cur[i - k] if i >= k else F for i in range(w)]
            else:
                shifted = [cur[i + k] if i + k < w else F for i in range(w)]
            cur = [self.MUX(sj, shifted[i], cur[i]) for i in range(w)]
        if overflow:
            ov = self.ORN(overflow)
            cur = [self.AND(-ov, x) for x in cur]
        return cur

    def _node(self, e: BvExpr, a: list[list[int]]) -> list[int]:
        op = e.op
        T = self.T
        F = -T
        if op == "const":
            v = e.params[0]
            return [T if (v >> i) & 1 else F for i in range(e.width)]
        if op == "var":
            key = e.params
            bits = self.var_bits.get(key)
            if bits is None:
                bits = [self.new_lit() for _ in range(e.width)]
                self.var_bits[key] = bits
            elif len(bits) != e.width:
                raise BlastError(f"variable {key} used with widths {len(bits)} and {e.width}")
            return bits
        if op == "not":
            return [-x for x in a[0]]
        if op == "and":
            return [self.AND(x, y) for x, y in zip(a[0], a[1])]
        if op == "or":
            return [self.OR(x, y) for x, y in zip(a[0], a[1])]
        if op == "xor":
            return [self.XOR(x, y) for x, y in zip(a[0], a[1])]
        if op == "add":
            return self._adder(a[0], a[1], F)
        if op == "sub":
            return self._adder(a[0], [-y for y in a[1]], T)
        if op == "neg":
            return self._adder([-x for x in a[0]], [F] * e.width, T)
        if op == "mul":
            return self._mul(a[0], a[1])
        if op == "shl":
            return self._shift(a[0], a[1], True)
        if op == "lshr":
            return self._shift(a[0], a[1], False)
        if op == "eq":
            return [self.ANDN([-self.XOR(x, y) for x, y in zip(a[0], a[1])])]
        if op == "ult":
            return [self._ult(a[0], a[1])]
        if op == "ule":
            return [-self._ult(a[1], a[0])]
        if op == "slt":
            x = a[0][:-1] + [-a[0][-1]]
            y = a[1][:-1] + [-a[1][-1]]
            return [self._ult(x, y)]
        if op == "ite":
            s = a[0][0]
            return [self.MUX(s, x, y) for x, y in zip(a[1], a[2])]
        if op == "extract":
            hi, lo = e.params
            return a[0][lo:hi + 1]
        if op == "concat":
            return a[1] + a[0]
        if op == "zext":
            return a[0] + [F] * (e.width - len(a[0]))
        if op == "sext":
            return a[0] + [a[0][-1]] * (e.width - len(a[0]))
        if op == "redor":
            return [self.ORN(a[0])]
        if op == "redand":
            return [self.ANDN(a[0])]
        if op == "redxor":
            acc = F
            for x in a[0]:
                acc = self.XOR(acc, x)
            return [acc]
        raise BlastError(f"unknown operator {op!r}")

    def bits(self, e: BvExpr) -> list[int]:
        cache = self.cache
        hit = cache.get(e)
        if hit is not None:
            return hit
        stack = [(e, False)]
        while stack:
            node, ready = stack.pop()
            if node in cache:
                continue
            if not ready:
                if node.width > self.max_width:
                    raise BlastError(f"width {node.width} exceeds the configured maximum {self.max_width}")
                stack.append((node, True))
                for arg in node.args:
                    if arg not in cache:
                        stack.append((arg, False))
                continue
            cache[node] = self._node(node, [cache[x] for x in node.args])
        return cache[e]

    def lit(self, e: BvExpr) -> int:
        """Literal equivalent to the width-1 expression ``e``."""
        if e.width != 1:
            raise BlastError(f"expected a width-1 expression, got width {e.width}")
        return self.bits(e)[0]

    # -- constraints ---------------------------------------------------
    def add(self, e: BvExpr) -> None:
        self._clause([self.lit(e)])

    def add_guarded(self, guard: int, e: BvExpr) -> None:
        self._clause([-guard, self.lit(e)])

    def new_activation(self) -> int:
        b = self.new_lit()
        self.activations.append(b)
        return b

    def retire(self, activation: int) -> None:
        self._clause([-activation])

    def solve(self, assumptions=()) -> bool:
        self.solve_calls += 1
        t0 = time.perf_counter()
        try:
            return self.solver.solve(list(assumptions))
        finally:
            self.solve_time += time.perf_counter() - t0

    def check(self, exprs=(), assumptions=()) -> SatResult:
        lits = list(assumptions) + [self.lit(x) for x in exprs]
        ok = self.solve(lits)
        return SatResult(ok, self.model() if ok else {})

    # -- models ----------------------------------------------------------
    def model_value_bits(self, bits: list[int]) -> int:
        v = 0
        for i, b in enumerate(bits):
            if self.solver.model_value(b):
                v |= 1 << i
        return v

    def model(self) -> dict:
        return {k: self.model_value_bits(b) for k, b in self.var_bits.items()}

    def value(self, e: BvExpr) -> int:
        return self.model_value_bits(self.bits(e))

    def var_value(self, name: str, version: int, default: int = 0) -> int:
        bits = self.var_bits.get((name, version))
        return default if bits is None else self.model_value_bits(bits)

    # -- export --------------------------------------------------------
    def to_dimacs(self, assumptions=()) -> str:
        if not self.record:
            raise SolverError("instance was created without clause recording")
        clauses = list(self.clause_log) + [[a] for a in assumptions]
        lines = [f"p cnf {self.num_vars} {len(clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in clauses]
        return "\n".join(lines) + "\n"
