"""Abstract syntax for the supported Verilog subset.

Nodes are plain dataclasses.  Source locations and inferred widths are kept
out of structural equality, so a pretty-print/re-parse round trip compares
equal.  ``width`` is ``None`` straight out of the parser when it depends on a
parameter; elaboration fills it in on a specialised copy of the module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..diagnostics import NOLOC, Loc


def _loc():
    return field(default=NOLOC, compare=False, repr=False)


def _width():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- expressions

@dataclass
class Ident:
    name: str
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Number:
    value: int
    size: Optional[int] = None   # None: unsized literal (32-bit, context sized)
    base: str = "d"              # spelling only: 'b', 'o', 'd', 'h'
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class BitSelect:
    base: "Expr"
    index: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class PartSelect:
    base: "Expr"
    msb: "Expr"
    lsb: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class IndexedPartSelect:
    base: "Expr"
    offset: "Expr"
    size: "Expr"
    down: bool = False   # '-:' instead of '+:'
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Concat:
    parts: list
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Repeat:
    count: "Expr"
    parts: list
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Unary:
    op: str          # '~', '!', '-', '+'
    arg: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Reduction:
    op: str          # '&', '|', '^', '~&', '~|', '~^'
    arg: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


@dataclass
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    loc: Loc = _loc()
    width: Optional[int] = _width()


Expr = Union[Ident, Number, BitSelect, PartSelect, IndexedPartSelect, Concat,
             Repeat, Unary, Reduction, Binary, Ternary]

ARITH_OPS = ("+", "-", "*")
BITWISE_OPS = ("&", "|", "^", "~^", "^~")
SHIFT_OPS = ("<<", ">>", "<<<", ">>>")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=", "===", "!==")
LOGICAL_OPS = ("&&", "||")


# ---------------------------------------------------------------- statements

@dataclass
class Block:
    stmts: list
    loc: Loc = _loc()


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"] = None
    loc: Loc = _loc()


@dataclass
class ProcAssign:
    lhs: Expr          # Ident / BitSelect / PartSelect / IndexedPartSelect / Concat
    rhs: Expr
    blocking: bool
    loc: Loc = _loc()


@dataclass
class For:
    init: ProcAssign
    cond: Expr
    step: ProcAssign
    body: "Stmt"
    loc: Loc = _loc()


Stmt = Union[Block, If, ProcAssign, For]


# ---------------------------------------------------------------- module items

@dataclass
class Range:
    msb: Expr
    lsb: Expr


@dataclass
class Port:
    name: str
    direction: str                 # 'input' | 'output' | 'inout'
    width: Optional[int] = None
    range: Optional[Range] = None
    is_reg: bool = False
    loc: Loc = _loc()


@dataclass
class Net:
    name: str
    kind: str                      # 'wire' | 'reg' | 'integer'
    width: Optional[int] = None
    range: Optional[Range] = None
    loc: Loc = _loc()


@dataclass
class ContAssign:
    lhs: Expr
    rhs: Expr
    loc: Loc = _loc()


@dataclass
class Always:
    clock: Optional[str]           # posedge signal name, or None for @(*)
    body: Stmt
    loc: Loc = _loc()


@dataclass
class Initial:
    body: Stmt
    loc: Loc = _loc()


@dataclass
class Instance:
    module: str
    name: str
    params: dict                   # name -> Expr (named) ; positional overrides use '#0', '#1', ...
    bindings: dict                 # formal -> Expr | None   (named binding)
    positional: Optional[list] = None   # actual expressions, when bound by position
    loc: Loc = _loc()


@dataclass
class ModuleAst:
    name: str
    ports: list = field(default_factory=list)          # list[Port], in header order
    nets: list = field(default_factory=list)           # list[Net]
    continuous_assigns: list = field(default_factory=list)
    always_blocks: list = field(default_factory=list)
    initial_blocks: list = field(default_factory=list)
    instances: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)     # name -> Expr (default value)
    localparams: dict = field(default_factory=dict)
    header_params: list = field(default_factory=list)  # names declared in #( ... ), in order
    loc: Loc = _loc()

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def net(self, name: str) -> Optional[Net]:
        for n in self.nets:
            if n.name == name:
                return n
        return None

    def param_order(self) -> list:
        return list(self.header_params) + [p for p in self.parameters if p not in self.header_params]
