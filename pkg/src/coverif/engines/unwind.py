"""Loop unwinding of composed programs.

Firmware variables (names starting with ``fw.``) are propagated as
constants while unwinding, so counting loops unroll to straight-line code
with their conditions specialised.  Hardware values are never propagated:
they change every cycle and belong to the engines.

* A loop whose condition is statically true is unrolled: loops that do not
  advance the clock run to completion (at most ``LOOP_CAP`` iterations);
  loops that do are replicated ``k`` times.
* A loop with a symbolic condition becomes ``k`` nested ``if`` statements.

When a loop is cut at the bound, an unwinding assumption ``assume(!cond)``
follows it so that nothing after the loop is explored on truncated runs.
No unwinding assertion is added: behaviours beyond the bound are simply
not explored.  Cut assumptions with nothing after them are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..bitvec import BvExpr, bvnot, const, fold
from ..netlist.ir import Assert, Assign, Assume, Havoc, If, Loop, asserts_of

log = logging.getLogger(__name__)

LOOP_CAP = 4096
UNWIND_LABEL = "unwind"
FW_PREFIX = "fw."


class UnwindError(RuntimeError):
    pass


@dataclass
class UnwindInfo:
    cut_loops: int = 0
    unrolled_iterations: int = 0


class _Unwinder:
    def __init__(self, k: int):
        self.k = k
        self.info = UnwindInfo()

    def subst(self, e: BvExpr, env: dict) -> BvExpr:
        def fn(v):
            name = v.params[0]
            if name in env:
                return const(env[name], v.width)
            return None
        return fold(e, fn)

    def block(self, stmts, env: dict) -> tuple[list, dict]:
        out: list = []
        for s in stmts:
            part, env = self.stmt(s, env)
            out += part
        return out, env

    @staticmethod
    def _note(env: dict, target: str, value: BvExpr | None) -> dict:
        if not target.startswith(FW_PREFIX):
            return env
        env = dict(env)
        if value is not None and value.op == "const":
            env[target] = value.value
        else:
            env.pop(target, None)
        return env

    @staticmethod
    def _join(a: dict, b: dict) -> dict:
        return {k: v for k, v in a.items() if b.get(k, None) == v}

    def stmt(self, s, env: dict) -> tuple[list, dict]:
        if isinstance(s, Assign):
            e = self.subst(s.expr, env)
            return [Assign(s.target, e)], self._note(env, s.target, e)
        if isinstance(s, Havoc):
            return [s], self._note(env, s.target, None)
        if isinstance(s, Assume):
            return [Assume(self.subst(s.cond, env), s.label)], env
        if isinstance(s, Assert):
            return [Assert(s.label, self.subst(s.cond, env))], env
        if isinstance(s, If):
            c = self.subst(s.cond, env)
            if c.op == "const":
                return self.block(s.then if c.value else s.orelse, env)
            t, et = self.block(s.then, dict(env))
            o, eo = self.block(s.orelse, dict(env))
            return [If(c, tuple(t), tuple(o))], self._join(et, eo)
        if isinstance(s, Loop):
            return self.loop(s, env)
        raise UnwindError(f"unknown statement {s!r}")

    def loop(self, s: Loop, env: dict) -> tuple[list, dict]:
        out: list = []
        limit = self.k if s.cycle else LOOP_CAP
        n = 0
        while True:
            c = self.subst(s.cond, env)
            if c.op == "const" and not c.value:
                return out, env
            if c.op != "const":
                nested, env = self._symbolic(s, env, self.k - n if s.cycle else self.k)
                return out + nested, env
            if n >= limit:
                if not s.cycle:
                    raise UnwindError(f"{s.label or 'loop'} exceeds {LOOP_CAP} iterations without advancing the clock")
                self.info.cut_loops += 1
                out.append(Assume(bvnot(c), UNWIND_LABEL))
                return out, env
            body, env = self.block(s.body, env)
            out += body
            n += 1
            self.info.unrolled_iterations += 1

    def _symbolic(self, s: Loop, env: dict, budget: int) -> tuple[list, dict]:
        """``budget`` nested copies guarded by the loop condition."""
        c = self.subst(s.cond, env)
        if c.op == "const" and not c.value:
            return [], env
        if budget <= 0:
            self.info.cut_loops += 1
            return [Assume(bvnot(c), UNWIND_LABEL)], env
        if c.op == "const":
            body, env2 = self.block(s.body, env)
            rest, env3 = self._symbolic(s, env2, budget - 1)
            return body + rest, env3
        body, env2 = self.block(s.body, dict(env))
        rest, env3 = self._symbolic(s, env2, budget - 1)
        return [If(c, tuple(body + rest), ())], self._join(env3, env)


def _strip_tail(stmts: list) -> list:
    """Remove unwinding assumptions that nothing executes after."""
    out = list(stmts)
    while out:
        last = out[-1]
        if isinstance(last, Assume) and last.label == UNWIND_LABEL:
            out.pop()
            continue
        if isinstance(last, If):
            out[-1] = If(last.cond, tuple(_strip_tail(list(last.then))), tuple(_strip_tail(list(last.orelse))))
        break
    return out


def number_sites(stmts) -> list:
    """Give every havoc a program-unique site id ``h<n>:<target>``."""
    counter = [0]

    def go(xs):
        out = []
        for s in xs:
            if isinstance(s, Havoc):
                out.append(Havoc(s.target, s.width, s.tag, f"h{counter[0]}:{s.target}"))
                counter[0] += 1
            elif isinstance(s, If):
                out.append(If(s.cond, tuple(go(s.then)), tuple(go(s.orelse))))
            elif isinstance(s, Loop):
                out.append(Loop(s.cond, tuple(go(s.body)), s.cycle, s.label))
            else:
                out.append(s)
        return out
    return go(stmts)


def unwind(program, k: int, info: UnwindInfo | None = None) -> list:
    """Acyclic version of ``program`` for unwind bound ``k``."""
    if k < 0:
        raise UnwindError("unwind bound must be non-negative")
    u = _Unwinder(k)
    out, _ = u.block(list(program), {})
    out = _strip_tail(out)
    if k == 0 and any(isinstance(s, Loop) and s.cycle and asserts_of(s.body) for s in program):
        log.warning("unwind bound 0: assertions inside the cycle loop are not checked")
    if info is not None:
        info.cut_loops, info.unrolled_iterations = u.info.cut_loops, u.info.unrolled_iterations
    return number_sites(out)
