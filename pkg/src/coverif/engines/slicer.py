"""Property-driven syntactic slicing of unwound programs.

A backward pass keeps the statements that can influence an assertion:
definitions of relevant variables (data dependence) and branches that
contain kept statements (control dependence).  Assumptions are kept when
they mention a variable that is relevant anywhere in the program, and
their variables become relevant in turn; since that can make earlier
definitions relevant, the pass is repeated until nothing changes.

Three kinds of assumption are always kept: unwinding assumptions (dropping
them would explore runs past the bound), assumptions with no variables,
and environment assumptions written by the user (dropping them could make
a replayed trace vacuous).  Combinational-group assumptions are kept only
when relevant.

Assignments to the cycle counter are kept as well: they are constant
folded by the engines and let counterexamples report cycle numbers.
"""

from __future__ import annotations

import logging

from ..bitvec import var_names
from ..netlist.ir import CYCLE_VAR, Assert, Assign, Assume, Havoc, If, count_stmts

log = logging.getLogger(__name__)


def _always_kept(s: Assume) -> bool:
    return not s.label.startswith("comb:")


class _Slicer:
    def __init__(self, program):
        self.program = program
        self.ever: set = set()      # names relevant somewhere

    def run(self) -> list:
        while True:
            before = set(self.ever)
            kept, _ = self.block(self.program, set())
            if self.ever == before:
                return kept

    def block(self, stmts, live: set) -> tuple[list, set]:
        out: list = []
        for s in reversed(stmts):
            keep, live = self.stmt(s, live)
            if keep is not None:
                out.append(keep)
        out.reverse()
        return out, live

    def stmt(self, s, live: set):
        if isinstance(s, Assert):
            names = var_names(s.cond)
            self.ever |= names
            return s, live | names
        if isinstance(s, Assign):
            if s.target in live or s.target == CYCLE_VAR:
                names = var_names(s.expr)
                self.ever |= names
                return s, (live - {s.target}) | names
            return None, live
        if isinstance(s, Havoc):
            if s.target in live:
                return s, live - {s.target}
            return None, live
        if isinstance(s, Assume):
            names = var_names(s.cond)
            if _always_kept(s) or not names or names & (self.ever | live):
                self.ever |= names
                return s, live | names
            return None, live
        if isinstance(s, If):
            t, lt = self.block(s.then, set(live))
            o, lo = self.block(s.orelse, set(live))
            if t or o:
                names = var_names(s.cond)
                self.ever |= names
                return If(s.cond, tuple(t), tuple(o)), lt | lo | names
            return None, lt | lo
        raise TypeError(f"cannot slice {s!r}")


def slice_program(program) -> list:
    """Statements of the unwound ``program`` that can affect an assertion."""
    program = list(program)
    if not any(isinstance(s, Assert) for s in _walk(program)):
        log.warning("no assertions registered; slicing is the identity")
        return program
    return _Slicer(program).run()


def _walk(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from _walk(s.then)
            yield from _walk(s.orelse)


def slice_stats(original, sliced) -> dict:
    return {"original_statements": count_stmts(original), "sliced_statements": count_stmts(sliced)}
