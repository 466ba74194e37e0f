"""Parser for the firmware language: a small, closed subset of C.

Supported:

* scalar types ``_Bool``/``bool`` (1 bit), ``char`` and ``unsigned char``
  (8), ``int``/``unsigned``/``unsigned int``/``unsigned long`` (32), and
  ``uN``/``_uN`` for any width N from 1 to 64; all values are unsigned;
* one-dimensional arrays of constant size, initialised from a brace list
  or a string literal;
* functions (inlined at every call site) with at most one ``return`` that
  must be the last statement of the body;
* ``if``/``else``, ``while``, ``for``, blocks, ``break`` is not supported;
* assignments ``=``, compound assignments and ``++``/``--`` statements;
* the intrinsics ``nondet(w)``, ``nondet_uN()``, ``nondet_bool()``,
  ``assume(e)``, ``assert(e)``/``assert(e, "label")``, ``step()``,
  ``set_input(name, e)``, ``release_input(name)`` and ``read_output(name)``;
* ``hw.name`` as shorthand: reading it is ``read_output(name)``, assigning
  it is ``set_input(name, e)``.

Preprocessor lines are limited to ``#define NAME <integer>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..diagnostics import Loc, SourceError, TokenStream, Tokenizer, UnsupportedConstruct

# ---------------------------------------------------------------- AST


@dataclass
class Num:
    value: int
    width: Optional[int] = None      # None: unsized literal
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Str:
    text: str
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Name:
    name: str
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class HwRef:
    name: str
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Index:
    name: str
    index: "Expr"
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Unary:
    op: str
    arg: "Expr"
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Cond:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Call:
    name: str
    args: list
    loc: Loc = field(default_factory=Loc, compare=False)


Expr = Union[Num, Str, Name, HwRef, Index, Unary, Binary, Cond, Call]


@dataclass
class Decl:
    width: int
    name: str
    size: Optional[int] = None        # arrays
    init: object = None               # Expr, list of Expr, or Str for arrays
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class AssignStmt:
    target: Union[Name, Index, HwRef]
    value: Expr
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class ExprStmt:
    expr: Expr
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class IfStmt:
    cond: Expr
    then: list
    orelse: list
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class WhileStmt:
    cond: Expr
    body: list
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class ForStmt:
    init: list
    cond: Optional[Expr]
    update: list
    body: list
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class BlockStmt:
    body: list
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class ReturnStmt:
    value: Optional[Expr]
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class Function:
    name: str
    ret_width: Optional[int]          # None for void
    params: list                      # [(width, name)]
    body: list
    loc: Loc = field(default_factory=Loc, compare=False)


@dataclass
class FirmwareProgram:
    globals: list = field(default_factory=list)      # [Decl]
    functions: dict = field(default_factory=dict)    # name -> Function
    filename: str = "<firmware>"

    @property
    def entry(self) -> Function:
        if "main" not in self.functions:
            raise SourceError("firmware has no main function", Loc(self.filename, 1, 1))
        return self.functions["main"]


# ---------------------------------------------------------------- lexing

KEYWORDS = {
    "if", "else", "while", "for", "return", "void", "unsigned", "signed", "char",
    "int", "long", "short", "_Bool", "bool", "const", "static", "volatile",
    "break", "continue", "switch", "do", "goto", "struct", "typedef", "true", "false",
}

_TOKENIZER = Tokenizer([
    (None, r"[ \t\r\n]+"),
    (None, r"//[^\n]*"),
    (None, r"/\*.*?\*/"),
    ("pp", r"\#[^\n]*"),
    ("num", r"0[xX][0-9a-fA-F]+[uUlL]*|0[bB][01]+|[0-9]+[uUlL]*"),
    ("chr", r"'(?:\\.|[^'\\])'"),
    ("str", r'"(?:\\.|[^"\\])*"'),
    ("id", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("op", r"<<=|>>=|\+\+|--|\+=|-=|\*=|&=|\|=|\^=|<<|>>|<=|>=|==|!=|&&|\|\||->"
           r"|[-+*/%&|^~!<>=?:;,.(){}\[\]]"),
], KEYWORDS)

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34}
_UTYPE = re.compile(r"_?u(\d+)$")


def _unescape(body: str, loc: Loc) -> list[int]:
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            if i >= len(body) or body[i] not in _ESCAPES:
                raise SourceError("unsupported escape sequence", loc)
            out.append(_ESCAPES[body[i]])
        else:
            out.append(ord(ch))
        i += 1
    return out


def _parse_int(text: str) -> int:
    t = text.rstrip("uUlL")
    if t[:2] in ("0x", "0X"):
        return int(t[2:], 16)
    if t[:2] in ("0b", "0B"):
        return int(t[2:], 2)
    if len(t) > 1 and t.startswith("0"):
        return int(t, 8)
    return int(t)


# ---------------------------------------------------------------- parsing

_BINARY = [
    ("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
    ("<", "<=", ">", ">="), ("<<", ">>"), ("+", "-"), ("*", "/", "%"),
]
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "&=": "&", "|=": "|", "^=": "^",
             "<<=": "<<", ">>=": ">>"}


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.defines: dict[str, int] = {}
        toks = []
        for t in _TOKENIZER.tokenize(text, filename):
            if t.kind == "pp":
                self._directive(t)
            else:
                toks.append(t)
        self.ts = TokenStream(toks)

    def _directive(self, t) -> None:
        m = re.match(r"#\s*define\s+([A-Za-z_]\w*)\s+(\S+)\s*$", t.text)
        if m:
            try:
                self.defines[m.group(1)] = _parse_int(m.group(2))
                return
            except ValueError:
                pass
        if re.match(r"#\s*include\b", t.text):
            return
        raise UnsupportedConstruct("preprocessor directive", t.loc, t.text.strip())

    # -- types
    def at_type(self) -> bool:
        t = self.ts.tok
        if t.kind == "kw" and t.text in ("void", "unsigned", "signed", "char", "int", "long",
                                         "short", "_Bool", "bool", "const", "static", "volatile"):
            return True
        return t.kind == "id" and bool(_UTYPE.match(t.text)) and self.ts.peek().kind == "id"

    def parse_type(self) -> Optional[int]:
        ts = self.ts
        while ts.accept("const", "static", "volatile"):
            pass
        t = ts.tok
        if ts.accept("void"):
            return None
        if ts.accept("_Bool", "bool"):
            return 1
        if t.kind == "id":
            m = _UTYPE.match(t.text)
            if m:
                ts.next()
                w = int(m.group(1))
                if not 1 <= w <= 64:
                    raise SourceError(f"width {w} out of range 1..64", t.loc)
                return w
        if ts.accept("signed"):
            raise UnsupportedConstruct("signed integer type", t.loc)
        ts.accept("unsigned")
        if ts.accept("char"):
            return 8
        if ts.accept("short"):
            ts.accept("int")
            return 16
        if ts.accept("long"):
            ts.accept("long")
            ts.accept("int")
            return 32
        ts.accept("int")
        return 32

    # -- top level
    def program(self) -> FirmwareProgram:
        prog = FirmwareProgram(filename=self.filename)
        ts = self.ts
        while not ts.at_kind("eof"):
            if ts.at("typedef", "struct"):
                raise UnsupportedConstruct(ts.tok.text, ts.tok.loc)
            loc = ts.tok.loc
            w = self.parse_type()
            name = ts.expect_kind("id", "identifier").text
            if ts.at("("):
                fn = self.function(w, name, loc)
                if fn.name in prog.functions:
                    raise SourceError(f"function {fn.name} redefined", loc)
                prog.functions[fn.name] = fn
            else:
                if w is None:
                    raise SourceError("variable of type void", loc)
                prog.globals += self.declarators(w, name, loc)
        return prog

    def function(self, w, name, loc) -> Function:
        ts = self.ts
        ts.expect("(")
        params = []
        if ts.at("void") and ts.peek().text == ")":
            ts.next()
        while not ts.at(")"):
            pw = self.parse_type()
            if pw is None:
                raise SourceError("parameter of type void", ts.tok.loc)
            pname = ts.expect_kind("id", "parameter name").text
            params.append((pw, pname))
            if not ts.accept(","):
                break
        ts.expect(")")
        body = self.block()
        return Function(name, w, params, body, loc)

    def declarators(self, w: int, name: str, loc, terminated: bool = True) -> list:
        ts = self.ts
        out = []
        while True:
            size = None
            init = None
            if ts.accept("["):
                if ts.at("]"):
                    size = -1
                else:
                    size = self.const_int(self.expr())
                ts.expect("]")
            if ts.accept("="):
                if size is not None and ts.accept("{"):
                    items = []
                    while not ts.at("}"):
                        items.append(self.expr())
                        if not ts.accept(","):
                            break
                    ts.expect("}")
                    init = items
                elif size is not None and ts.at_kind("str"):
                    t = ts.next()
                    init = Str(bytes(_unescape(t.text[1:-1], t.loc)).decode("latin-1"), t.loc)
                else:
                    init = self.expr()
            if size == -1:
                if isinstance(init, list):
                    size = len(init)
                elif isinstance(init, Str):
                    size = len(init.text) + 1
                else:
                    raise SourceError(f"array {name} needs a size", loc)
            if size is not None and size <= 0:
                raise SourceError(f"array {name} must have positive size", loc)
            out.append(Decl(w, name, size, init, loc))
            if not ts.accept(","):
                break
            loc = ts.tok.loc
            name = ts.expect_kind("id", "identifier").text
        if terminated:
            ts.expect(";")
        return out

    def const_int(self, e) -> int:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Name) and e.name in self.defines:
            return self.defines[e.name]
        raise SourceError("expected a constant", getattr(e, "loc", None))

    # -- statements
    def block(self) -> list:
        ts = self.ts
        ts.expect("{")
        out = []
        while not ts.accept("}"):
            if ts.at_kind("eof"):
                ts.error("unterminated block")
            out += self.statement()
        return out

    def body(self) -> list:
        if self.ts.at("{"):
            return self.block()
        return self.statement()

    def statement(self) -> list:
        ts = self.ts
        t = ts.tok
        loc = t.loc
        if ts.at("{"):
            return [BlockStmt(self.block(), loc)]
        if ts.accept(";"):
            return []
        if ts.accept("if"):
            ts.expect("(")
            c = self.expr()
            ts.expect(")")
            then = self.body()
            orelse = self.body() if ts.accept("else") else []
            return [IfStmt(c, then, orelse, loc)]
        if ts.accept("while"):
            ts.expect("(")
            c = self.expr()
            ts.expect(")")
            return [WhileStmt(c, self.body(), loc)]
        if ts.accept("for"):
            ts.expect("(")
            init = [] if ts.at(";") else self.simple()
            ts.expect(";")
            cond = None if ts.at(";") else self.expr()
            ts.expect(";")
            update = [] if ts.at(")") else self.simple()
            ts.expect(")")
            return [BlockStmt([ForStmt(init, cond, update, self.body(), loc)], loc)]
        if ts.accept("return"):
            v = None if ts.at(";") else self.expr()
            ts.expect(";")
            return [ReturnStmt(v, loc)]
        if t.kind == "kw" and t.text in ("break", "continue", "switch", "do", "goto"):
            raise UnsupportedConstruct(t.text, loc)
        out = self.simple()
        ts.expect(";")
        return out

    def simple(self) -> list:
        """Declaration, assignment, increment or call (no trailing ';')."""
        ts = self.ts
        loc = ts.tok.loc
        if self.at_type():
            w = self.parse_type()
            if w is None:
                raise SourceError("variable of type void", loc)
            name = ts.expect_kind("id", "identifier").text
            return self.declarators(w, name, loc, terminated=False)
        if ts.at("++", "--"):
            op = ts.next().text
            target = self.lvalue(self.unary())
            return [AssignStmt(target, Binary("+" if op == "++" else "-", target, Num(1), loc), loc)]
        lhs = self.expr()
        if ts.at("="):
            ts.next()
            return [AssignStmt(self.lvalue(lhs), self.expr(), loc)]
        if ts.tok.text in _COMPOUND and ts.tok.kind == "op":
            op = _COMPOUND[ts.next().text]
            target = self.lvalue(lhs)
            return [AssignStmt(target, Binary(op, target, self.expr(), loc), loc)]
        if ts.at("++", "--"):
            op = ts.next().text
            target = self.lvalue(lhs)
            return [AssignStmt(target, Binary("+" if op == "++" else "-", target, Num(1), loc), loc)]
        if isinstance(lhs, Call):
            return [ExprStmt(lhs, loc)]
        raise SourceError("expression statement has no effect", loc)

    def lvalue(self, e):
        if isinstance(e, (Name, Index, HwRef)):
            if isinstance(e, Name) and e.name in self.defines:
                raise SourceError(f"cannot assign to constant {e.name}", e.loc)
            return e
        if isinstance(e, Unary) and e.op == "*":
            raise UnsupportedConstruct("pointer dereference", e.loc)
        raise SourceError("not assignable", getattr(e, "loc", None))

    # -- expressions
    def expr(self):
        c = self.binary(0)
        if self.ts.at("?"):
            loc = self.ts.next().loc
            a = self.expr()
            self.ts.expect(":")
            b = self.expr()
            return Cond(c, a, b, loc)
        return c

    def binary(self, level: int):
        if level == len(_BINARY):
            return self.unary()
        left = self.binary(level + 1)
        while self.ts.tok.kind == "op" and self.ts.tok.text in _BINARY[level]:
            t = self.ts.next()
            right = self.binary(level + 1)
            left = Binary(t.text, left, right, t.loc)
        return left

    def unary(self):
        ts = self.ts
        t = ts.tok
        if t.kind == "op" and t.text in ("!", "~", "-", "+"):
            ts.next()
            a = self.unary()
            return a if t.text == "+" else Unary(t.text, a, t.loc)
        if t.kind == "op" and t.text in ("*", "&"):
            raise UnsupportedConstruct("pointers", t.loc)
        if ts.at("(") and self._cast_ahead():
            ts.next()
            w = self.parse_type()
            ts.expect(")")
            return Call("__cast", [Num(w), self.unary()], t.loc)
        return self.primary()

    def _cast_ahead(self) -> bool:
        ts = self.ts
        save = ts.i
        ts.next()
        ok = self.at_type() or (ts.tok.kind == "id" and bool(_UTYPE.match(ts.tok.text))
                                and ts.peek().text == ")")
        ts.i = save
        return ok

    def primary(self):
        ts = self.ts
        t = ts.tok
        if t.kind == "num":
            ts.next()
            return Num(_parse_int(t.text), None, t.loc)
        if t.kind == "chr":
            ts.next()
            vals = _unescape(t.text[1:-1], t.loc)
            return Num(vals[0], 8, t.loc)
        if t.kind == "str":
            ts.next()
            return Str(bytes(_unescape(t.text[1:-1], t.loc)).decode("latin-1"), t.loc)
        if ts.accept("true"):
            return Num(1, 1, t.loc)
        if ts.accept("false"):
            return Num(0, 1, t.loc)
        if ts.accept("("):
            e = self.expr()
            ts.expect(")")
            return e
        if t.kind == "id":
            ts.next()
            if t.text == "hw" and ts.accept("."):
                parts = [ts.expect_kind("id", "signal name").text]
                while ts.accept("."):
                    parts.append(ts.expect_kind("id", "signal name").text)
                return HwRef(".".join(parts), t.loc)
            if ts.at("."):
                # firmware has no structs, so a dotted name is a hierarchical signal
                parts = [t.text]
                while ts.accept("."):
                    parts.append(ts.expect_kind("id", "signal name").text)
                return HwRef(".".join(parts), t.loc)
            if ts.accept("("):
                args = []
                while not ts.at(")"):
                    args.append(self.expr())
                    if not ts.accept(","):
                        break
                ts.expect(")")
                return Call(t.text, args, t.loc)
            if ts.accept("["):
                idx = self.expr()
                ts.expect("]")
                return Index(t.text, idx, t.loc)
            if t.text in self.defines:
                return Num(self.defines[t.text], None, t.loc)
            return Name(t.text, t.loc)
        ts.error("expected an expression")


def parse_firmware(text: str, filename: str = "<firmware>") -> FirmwareProgram:
    return _Parser(text, filename).program()


def parse_fw_statements(text: str, filename: str = "<firmware>") -> list:
    """Parse a bare statement list (used for generated harness fragments)."""
    p = _Parser("{" + text + "}", filename)
    return p.block()


def parse_fw_expr(text: str, filename: str = "<expr>"):
    p = _Parser(text, filename)
    e = p.expr()
    if not p.ts.at_kind("eof"):
        p.ts.error("unexpected trailing input")
    return e
