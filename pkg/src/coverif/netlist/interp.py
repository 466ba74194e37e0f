"""Concrete execution of IR statements over integer environments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..bitvec import conjuncts, evaluate_by_name, var_names
from .ir import Assert, Assign, Assume, Havoc, If, Loop

LOOP_LIMIT = 1 << 16


class InterpError(RuntimeError):
    pass


class AssumeFailed(Exception):
    """An assume evaluated to false: the run is vacuous from here on."""

    def __init__(self, label: str):
        super().__init__(label)
        self.label = label


class AssertFailed(Exception):
    def __init__(self, label: str):
        super().__init__(label)
        self.label = label


@dataclass
class Interpreter:
    """Run statements against ``env`` (name -> int).

    ``havoc(stmt)`` supplies the value of every non-combinational havoc.
    Combinational groups (havocs tagged ``comb`` followed by an assume) are
    resolved by evaluating the defining equalities in dependency order, so
    the interpreter needs no solver; a group whose equalities are mutually
    dependent is reported as unsupported.  ``comb_values`` may override the
    computed values (used when replaying a model that fixed them).
    """
    havoc: Callable
    env: dict = field(default_factory=dict)
    comb_values: Optional[Callable] = None
    on_assign: Optional[Callable] = None
    stop_on_assert: bool = True
    failed_asserts: list = field(default_factory=list)

    def value(self, e) -> int:
        return evaluate_by_name(e, self.env)

    def run(self, stmts) -> None:
        pending: list = []
        for s in stmts:
            if isinstance(s, Havoc) and s.tag == "comb":
                pending.append(s)
                continue
            if pending:
                if not isinstance(s, Assume):
                    raise InterpError("combinational havoc without a following assume")
                self._solve_group(pending, s)
                pending = []
            self.exec(s)
        if pending:
            raise InterpError("combinational havoc without a following assume")

    def _solve_group(self, havocs: list, assume: Assume) -> None:
        members = {h.target: h for h in havocs}
        if self.comb_values is not None:
            got = {h.target: self.comb_values(h) for h in havocs}
            if all(v is not None for v in got.values()):
                self.env.update(got)
                return
        defs = {}
        for c in conjuncts(assume.cond):
            if c.op == "eq" and c.args[0].op == "var" and c.args[0].params[0] in members:
                defs.setdefault(c.args[0].params[0], c.args[1])
        missing = set(members) - set(defs)
        if missing:
            raise InterpError(f"no defining equality for {sorted(missing)[0]}")
        todo = dict(defs)
        for m in members:
            self.env.pop(m, None)
        while todo:
            ready = [t for t, e in todo.items() if not (var_names(e) & set(todo))]
            if not ready:
                raise InterpError("combinational group with cyclic equalities is not supported "
                                  "by the concrete interpreter")
            for t in ready:
                self.env[t] = self.value(todo.pop(t))

    def exec(self, s) -> None:
        if isinstance(s, Assign):
            self.env[s.target] = self.value(s.expr)
            if self.on_assign is not None:
                self.on_assign(s, self.env)
        elif isinstance(s, Havoc):
            v = self.havoc(s)
            if v is None:
                raise InterpError(f"no value for havoc of {s.target} at site {s.site or '?'}")
            self.env[s.target] = v & ((1 << s.width) - 1)
        elif isinstance(s, Assume):
            if not self.value(s.cond):
                raise AssumeFailed(s.label)
        elif isinstance(s, Assert):
            if not self.value(s.cond):
                self.failed_asserts.append(s.label)
                if self.stop_on_assert:
                    raise AssertFailed(s.label)
        elif isinstance(s, If):
            self.run(s.then if self.value(s.cond) else s.orelse)
        elif isinstance(s, Loop):
            n = 0
            while self.value(s.cond):
                n += 1
                if n > LOOP_LIMIT:
                    raise InterpError("loop iteration limit exceeded")
                self.run(s.body)
        else:
            raise InterpError(f"unknown statement {s!r}")
