"""Statement-level intermediate representation of the software netlist and of
the composed firmware/hardware program.

Variables are referred to by (hierarchical) name.  Expressions inside the IR
always use version 0; the engines introduce their own SSA versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..bitvec import BvExpr, TRUE, land, var


@dataclass(frozen=True)
class Assign:
    target: str
    expr: BvExpr

    @property
    def width(self) -> int:
        return self.expr.width


@dataclass(frozen=True)
class Havoc:
    """Give ``target`` an unconstrained value.

    ``tag`` says where the nondeterminism comes from: ``input`` (unpinned
    primary input), ``comb`` (member of a combinational group resolved by a
    following assume) or ``nondet`` (firmware ``nondet()``).  ``site`` is a
    program-unique id once the program has been unwound.
    """
    target: str
    width: int
    tag: str = "input"
    site: str = ""


@dataclass(frozen=True)
class Assume:
    cond: BvExpr
    label: str = ""


@dataclass(frozen=True)
class Assert:
    label: str
    cond: BvExpr


@dataclass(frozen=True)
class If:
    cond: BvExpr
    then: tuple = ()
    orelse: tuple = ()


@dataclass(frozen=True)
class Loop:
    """``while (cond) body`` as written in the firmware.

    ``cycle`` is set when the body advances the hardware clock; such loops
    are bounded by the unwind bound, all others are unrolled completely.
    """
    cond: BvExpr
    body: tuple
    cycle: bool = False
    label: str = ""


Stmt = object  # Assign | Havoc | Assume | Assert | If | Loop

CYCLE_VAR = "__cycle"
CYCLE_WIDTH = 32


def cycle_marker() -> Assign:
    from ..bitvec import add, const
    return Assign(CYCLE_VAR, add(var(CYCLE_VAR, CYCLE_WIDTH), const(1, CYCLE_WIDTH)))


def is_cycle_marker(s) -> bool:
    return isinstance(s, Assign) and s.target == CYCLE_VAR


@dataclass
class CombGroup:
    """Combinational signals resolved together by havoc + assume."""
    name: str
    members: list                       # [(name, width)]
    equalities: list                    # [(target name, BvExpr value)]

    def constraint(self) -> BvExpr:
        from ..bitvec import eq
        return land(*[eq(var(t, v.width), v) for t, v in self.equalities]) if self.equalities else TRUE


@dataclass
class SwNetlistProgram:
    top: str
    clock: Optional[str]
    state_vars: list                    # [(name, width)] registers
    inputs: list                        # [(name, width)] primary inputs without the clock
    outputs: list                       # [(name, width)] primary outputs
    signals: dict                       # every variable used by init/step -> width
    init: list
    step: list
    comb_groups: list = field(default_factory=list)
    asserts: list = field(default_factory=list)     # [(label, BvExpr)]
    reg_init: dict = field(default_factory=dict)    # register -> initial value
    shadows: dict = field(default_factory=dict)     # register -> shadow variable

    @property
    def comb_constraint(self) -> Optional[BvExpr]:
        if not self.comb_groups:
            return None
        return land(*[g.constraint() for g in self.comb_groups])

    @property
    def sequential(self) -> bool:
        return bool(self.state_vars)

    def width(self, name: str) -> int:
        return self.signals[name]


# ---------------------------------------------------------------- traversal

def walk(stmts) -> Iterator:
    """Pre-order over statements, descending into If and Loop bodies."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.orelse)
        elif isinstance(s, Loop):
            yield from walk(s.body)


def count_stmts(stmts) -> int:
    return sum(1 for _ in walk(stmts))


def defined_vars(stmts) -> set:
    out = set()
    for s in walk(stmts):
        if isinstance(s, (Assign, Havoc)):
            out.add(s.target)
    return out


def collect_widths(stmts, into: dict | None = None) -> dict:
    """Map every variable mentioned in ``stmts`` to its width."""
    from ..bitvec import iter_nodes
    out = {} if into is None else into

    def note_expr(e):
        for n in iter_nodes(e):
            if n.op == "var":
                w = out.setdefault(n.params[0], n.width)
                if w != n.width:
                    raise ValueError(f"variable {n.params[0]} used with widths {w} and {n.width}")

    for s in walk(stmts):
        if isinstance(s, Assign):
            w = out.setdefault(s.target, s.expr.width)
            if w != s.expr.width:
                raise ValueError(f"variable {s.target} assigned with widths {w} and {s.expr.width}")
            note_expr(s.expr)
        elif isinstance(s, Havoc):
            out.setdefault(s.target, s.width)
        elif isinstance(s, (Assume, If, Loop)):
            note_expr(s.cond)
        elif isinstance(s, Assert):
            note_expr(s.cond)
    return out


def asserts_of(stmts) -> list:
    return [s for s in walk(stmts) if isinstance(s, Assert)]
