"""Concrete replay of traces and the exhaustive enumeration oracle.

Both execute the unwound, unsliced program with the concrete interpreter.
Combinational groups are evaluated from their defining equalities, so only
primary-input and nondet havocs need values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from ..engines.common import SAFE, UNSAFE, Trace
from ..netlist.interp import AssertFailed, AssumeFailed, Interpreter
from ..netlist.ir import Havoc, walk


class ReplayError(RuntimeError):
    pass


@dataclass
class SimResult:
    violated: Optional[str] = None     # label of the first failing assert
    vacuous: Optional[str] = None      # label of an assume that failed first
    env: dict = field(default_factory=dict)
    defaulted: list = field(default_factory=list)   # sites without a value (given 0)

    @property
    def ok(self) -> bool:
        return self.violated is None


def input_sites(stmts) -> list[Havoc]:
    """Non-combinational havocs of an unwound program, in program order."""
    return [s for s in walk(stmts) if isinstance(s, Havoc) and s.tag != "comb"]


def simulate(stmts, inputs, strict: bool = False, initial: dict | None = None) -> SimResult:
    """Run ``stmts`` with havoc values from ``inputs``.

    ``inputs`` is a :class:`Trace`, a mapping from havoc site to value, or a
    list of values consumed in execution order.
    """
    res = SimResult()
    if isinstance(inputs, Trace):
        inputs = inputs.site_values()
    if isinstance(inputs, dict):
        def havoc(s):
            if s.site in inputs:
                return inputs[s.site]
            if strict:
                raise ReplayError(f"no value for havoc site {s.site}")
            res.defaulted.append(s.site)
            return 0
    else:
        seq = iter(list(inputs))

        def havoc(s):
            try:
                return next(seq)
            except StopIteration:
                raise ReplayError("input list is shorter than the number of havocs executed") from None
    it = Interpreter(havoc, dict(initial or {}))
    try:
        it.run(stmts)
    except AssertFailed as exc:
        res.violated = exc.label
    except AssumeFailed as exc:
        res.vacuous = exc.label
    res.env = it.env
    return res


@dataclass
class EnumerationResult:
    status: str
    runs: int
    vacuous_runs: int
    violated: Optional[str] = None
    witness: Optional[dict] = None       # site -> value of the first violating run


def enumerate_verdict(stmts, max_bits: int = 16) -> EnumerationResult:
    """Decide the bounded program by running every input valuation."""
    sites = input_sites(stmts)
    bits = sum(s.width for s in sites)
    if bits > max_bits:
        raise ReplayError(f"{bits} nondeterministic bits exceed the enumeration limit {max_bits}")
    runs = vac = 0
    for values in itertools.product(*[range(1 << s.width) for s in sites]):
        assign = {s.site: v for s, v in zip(sites, values)}
        r = simulate(stmts, assign, strict=True)
        runs += 1
        if r.vacuous is not None:
            vac += 1
        elif r.violated is not None:
            return EnumerationResult(UNSAFE, runs, vac, r.violated, assign)
    return EnumerationResult(SAFE, runs, vac)


def nondet_bits(stmts) -> int:
    return sum(s.width for s in input_sites(stmts))
