"""Recursive-descent parser for the synthesizable Verilog subset."""

from __future__ import annotations

from ..diagnostics import Loc, SourceError, Tokenizer, TokenStream, UnsupportedConstruct
from . import ast as A

KEYWORDS = {
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "integer",
    "assign", "always", "initial", "begin", "end", "if", "else", "for",
    "posedge", "negedge", "or", "parameter", "localparam", "signed",
    # recognised only to be rejected with a clear message
    "case", "casez", "casex", "endcase", "function", "endfunction", "task",
    "endtask", "generate", "endgenerate", "genvar", "fork", "join", "real",
    "realtime", "time", "while", "repeat", "forever", "tri", "supply0",
    "supply1", "wand", "wor", "always_ff", "always_comb", "logic", "default",
}

_OPS = [
    "<<<", ">>>", "===", "!==", "<=", ">=", "==", "!=", "&&", "||", "<<", ">>",
    "~&", "~|", "~^", "^~", "+:", "-:", "**",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "?", ":", ";",
    ",", ".", "(", ")", "[", "]", "{", "}", "=", "@", "#",
]


def _rx_escape(op: str) -> str:
    return "".join("\\" + c if c in r".^$*+?{}[]\|()" else c for c in op)


_TOKENIZER = Tokenizer(
    [
        (None, r"\s+"),
        (None, r"//[^\n]*"),
        (None, r"/\*.*?\*/"),
        ("directive", r"`[A-Za-z_][A-Za-z0-9_]*"),
        ("num", r"(?:[0-9][0-9_]*)?\s*'[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ?_]+|[0-9][0-9_]*"),
        ("str", r'"(?:[^"\\\n]|\\.)*"'),
        ("sys", r"\$[A-Za-z_][A-Za-z0-9_$]*"),
        ("id", r"[A-Za-z_][A-Za-z0-9_$]*"),
        ("op", "|".join(_rx_escape(o) for o in _OPS)),
    ],
    KEYWORDS,
)

_UNSUPPORTED_ITEMS = {
    "function": "function declaration", "task": "task declaration",
    "generate": "generate block", "genvar": "genvar declaration",
    "real": "real type", "realtime": "real type", "time": "time type",
    "tri": "tri-state net", "supply0": "supply net", "supply1": "supply net",
    "wand": "wired net", "wor": "wired net", "always_ff": "SystemVerilog always_ff",
    "always_comb": "SystemVerilog always_comb", "logic": "SystemVerilog logic type",
}

_UNSUPPORTED_STMTS = {
    "case": "case statement", "casez": "casez statement", "casex": "casex statement",
    "fork": "fork/join", "while": "while loop", "repeat": "repeat loop",
    "forever": "forever loop",
}


def parse_number(text: str, loc: Loc) -> A.Number:
    t = text.replace("_", "").replace(" ", "").replace("\t", "")
    if "'" not in t:
        return A.Number(int(t), None, "d", loc=loc)
    size_s, rest = t.split("'", 1)
    if rest[:1] in "sS":
        rest = rest[1:]
    base = rest[0].lower()
    digits = rest[1:]
    if any(c in "xXzZ?" for c in digits):
        raise UnsupportedConstruct("x/z literal", loc, "only two-valued logic is supported")
    radix = {"b": 2, "o": 8, "d": 10, "h": 16}[base]
    try:
        value = int(digits, radix)
    except ValueError:
        raise SourceError(f"malformed number {text!r}", loc) from None
    size = int(size_s) if size_s else None
    if size is not None:
        if size < 1:
            raise SourceError(f"literal size must be positive in {text!r}", loc)
        value &= (1 << size) - 1
    return A.Number(value, size, base, loc=loc)


def _const_width(rng: A.Range | None) -> int | None:
    if rng is None:
        return 1
    if isinstance(rng.msb, A.Number) and isinstance(rng.lsb, A.Number):
        return abs(rng.msb.value - rng.lsb.value) + 1
    return None


class Parser:
    def __init__(self, text: str, filename: str = "<input>"):
        self.filename = filename
        self.ts = TokenStream(_TOKENIZER.tokenize(text, filename))

    # ------------------------------------------------------------ top level
    def parse(self) -> list[A.ModuleAst]:
        ts = self.ts
        mods: list[A.ModuleAst] = []
        seen: dict[str, A.ModuleAst] = {}
        while not ts.at_kind("eof"):
            if ts.at_kind("directive"):
                t = ts.tok
                raise UnsupportedConstruct(f"compiler directive {t.text}", t.loc, "no preprocessor")
            if not ts.at("module"):
                ts.error("expected 'module'")
            m = self.module()
            if m.name in seen:
                raise SourceError(f"duplicate module {m.name}", m.loc)
            seen[m.name] = m
            mods.append(m)
        return mods

    def module(self) -> A.ModuleAst:
        ts = self.ts
        start = ts.expect("module")
        name = ts.expect_kind("id", "module name").text
        m = A.ModuleAst(name, loc=start.loc)
        if ts.accept("#"):
            ts.expect("(")
            while True:
                ts.accept("parameter")
                self._skip_param_type()
                pname = ts.expect_kind("id", "parameter name").text
                ts.expect("=")
                m.parameters[pname] = self.expr()
                m.header_params.append(pname)
                if not ts.accept(","):
                    break
            ts.expect(")")
        if ts.accept("("):
            if not ts.at(")"):
                if ts.at("input", "output", "inout"):
                    self._ansi_ports(m)
                else:
                    while True:
                        t = ts.expect_kind("id", "port name")
                        m.ports.append(A.Port(t.text, "", None, loc=t.loc))
                        if not ts.accept(","):
                            break
            ts.expect(")")
        ts.expect(";")
        while not ts.at("endmodule"):
            if ts.at_kind("eof"):
                ts.error("expected 'endmodule'")
            self.item(m)
        ts.expect("endmodule")
        for p in m.ports:
            if not p.direction:
                raise SourceError(f"port {p.name} of module {m.name} has no direction declaration", p.loc)
        return m

    def _skip_param_type(self) -> None:
        ts = self.ts
        if ts.accept("signed"):
            pass
        if ts.at("integer"):
            ts.next()
        if ts.at("["):
            self.range()

    def _ansi_ports(self, m: A.ModuleAst) -> None:
        ts = self.ts
        direction, is_reg, rng = None, False, None
        while True:
            if ts.at("input", "output", "inout"):
                direction = ts.next().text
                is_reg = False
                if ts.accept("reg"):
                    is_reg = True
                else:
                    ts.accept("wire")
                ts.accept("signed")
                rng = self.range() if ts.at("[") else None
            elif direction is None:
                ts.error("expected port direction")
            t = ts.expect_kind("id", "port name")
            m.ports.append(A.Port(t.text, direction, _const_width(rng), rng, is_reg, loc=t.loc))
            if is_reg:
                m.nets.append(A.Net(t.text, "reg", _const_width(rng), rng, loc=t.loc))
            if not ts.accept(","):
                break

    def range(self) -> A.Range:
        ts = self.ts
        ts.expect("[")
        msb = self.expr()
        ts.expect(":")
        lsb = self.expr()
        ts.expect("]")
        return A.Range(msb, lsb)

    def _id_list(self) -> list:
        ts = self.ts
        out = [ts.expect_kind("id", "identifier")]
        while ts.accept(","):
            out.append(ts.expect_kind("id", "identifier"))
        return out

    # ------------------------------------------------------------ items
    def item(self, m: A.ModuleAst) -> None:
        ts = self.ts
        t = ts.tok
        if t.kind == "kw" and t.text in _UNSUPPORTED_ITEMS:
            raise UnsupportedConstruct(_UNSUPPORTED_ITEMS[t.text], t.loc)
        if t.kind == "directive":
            raise UnsupportedConstruct(f"compiler directive {t.text}", t.loc, "no preprocessor")
        if ts.at("input", "output", "inout"):
            self._port_decl(m)
        elif ts.at("wire", "reg"):
            self._net_decl(m)
        elif ts.at("integer"):
            ts.next()
            for tok in self._id_list():
                m.nets.append(A.Net(tok.text, "integer", 32, None, loc=tok.loc))
            ts.expect(";")
        elif ts.at("parameter", "localparam"):
            local = ts.next().text == "localparam"
            self._skip_param_type()
            while True:
                pname = ts.expect_kind("id", "parameter name").text
                ts.expect("=")
                (m.localparams if local else m.parameters)[pname] = self.expr()
                if not ts.accept(","):
                    break
            ts.expect(";")
        elif ts.at("assign"):
            ts.next()
            while True:
                loc = ts.tok.loc
                lhs = self.lvalue()
                ts.expect("=")
                m.continuous_assigns.append(A.ContAssign(lhs, self.expr(), loc=loc))
                if not ts.accept(","):
                    break
            ts.expect(";")
        elif ts.at("always"):
            m.always_blocks.append(self._always())
        elif ts.at("initial"):
            tok = ts.next()
            m.initial_blocks.append(A.Initial(self.stmt(), loc=tok.loc))
        elif t.kind == "id":
            self._instances(m)
        elif ts.accept(";"):
            pass
        else:
            ts.error("expected a module item")

    def _port_decl(self, m: A.ModuleAst) -> None:
        ts = self.ts
        direction = ts.next().text
        is_reg = False
        if ts.accept("reg"):
            is_reg = True
        else:
            ts.accept("wire")
        ts.accept("signed")
        rng = self.range() if ts.at("[") else None
        for tok in self._id_list():
            p = m.port(tok.text)
            if p is None:
                raise SourceError(f"{tok.text} is not in the port list of module {m.name}", tok.loc)
            if p.direction:
                raise SourceError(f"port {tok.text} declared twice", tok.loc)
            p.direction = direction
            p.range = rng
            p.width = _const_width(rng)
            p.is_reg = is_reg
            if is_reg:
                m.nets.append(A.Net(tok.text, "reg", p.width, rng, loc=tok.loc))
        ts.expect(";")

    def _net_decl(self, m: A.ModuleAst) -> None:
        ts = self.ts
        kind = ts.next().text
        ts.accept("signed")
        rng = self.range() if ts.at("[") else None
        while True:
            tok = ts.expect_kind("id", "net name")
            if ts.at("["):
                raise UnsupportedConstruct("memory array", ts.tok.loc, f"{tok.text} is declared with an unpacked dimension")
            existing = m.net(tok.text)
            port = m.port(tok.text)
            if existing is not None:
                if existing.kind == "reg" and kind == "reg" and port is not None:
                    pass  # 'output reg q' followed by 'reg q' is tolerated
                else:
                    raise SourceError(f"net {tok.text} declared twice", tok.loc)
            elif port is not None:
                # 'output q; reg q;' (non-ANSI) or 'input x; wire x;'
                if port.range is None and rng is not None:
                    port.range, port.width = rng, _const_width(rng)
                if kind == "reg":
                    port.is_reg = True
                    m.nets.append(A.Net(tok.text, "reg", port.width, port.range, loc=tok.loc))
            else:
                m.nets.append(A.Net(tok.text, kind, _const_width(rng), rng, loc=tok.loc))
            if ts.accept("="):
                loc = ts.tok.loc
                rhs = self.expr()
                if kind == "wire":
                    m.continuous_assigns.append(A.ContAssign(A.Ident(tok.text, loc=tok.loc), rhs, loc=loc))
                else:
                    m.initial_blocks.append(A.Initial(
                        A.ProcAssign(A.Ident(tok.text, loc=tok.loc), rhs, True, loc=loc), loc=loc))
            if not ts.accept(","):
                break
        ts.expect(";")

    def _always(self) -> A.Always:
        ts = self.ts
        start = ts.expect("always")
        ts.expect("@")
        clock = None
        if ts.accept("*"):
            pass
        else:
            ts.expect("(")
            if ts.accept("*"):
                pass
            elif ts.at("posedge"):
                ts.next()
                clock = ts.expect_kind("id", "clock signal").text
                if ts.at("or", ","):
                    raise UnsupportedConstruct("multiple edge events", ts.tok.loc,
                                               "asynchronous resets are not supported")
            elif ts.at("negedge"):
                raise UnsupportedConstruct("negedge trigger", ts.tok.loc, "single posedge clock only")
            else:
                raise UnsupportedConstruct("explicit sensitivity list", ts.tok.loc, "use always @(*)")
            ts.expect(")")
        return A.Always(clock, self.stmt(), loc=start.loc)

    def _instances(self, m: A.ModuleAst) -> None:
        ts = self.ts
        mod_tok = ts.next()
        params: dict = {}
        if ts.accept("#"):
            ts.expect("(")
            k = 0
            while not ts.at(")"):
                if ts.accept("."):
                    pname = ts.expect_kind("id", "parameter name").text
                    ts.expect("(")
                    params[pname] = self.expr()
                    ts.expect(")")
                else:
                    params[f"#{k}"] = self.expr()
                    k += 1
                if not ts.accept(","):
                    break
            ts.expect(")")
        while True:
            name_tok = ts.expect_kind("id", "instance name")
            if ts.at("["):
                raise UnsupportedConstruct("instance array", ts.tok.loc)
            ts.expect("(")
            bindings: dict = {}
            positional = None
            if ts.at("."):
                while True:
                    ts.expect(".")
                    formal = ts.expect_kind("id", "port name")
                    if formal.text in bindings:
                        raise SourceError(f"port {formal.text} bound twice", formal.loc)
                    ts.expect("(")
                    bindings[formal.text] = None if ts.at(")") else self.expr()
                    ts.expect(")")
                    if not ts.accept(","):
                        break
            elif not ts.at(")"):
                positional = [self.expr()]
                while ts.accept(","):
                    positional.append(self.expr())
            ts.expect(")")
            m.instances.append(A.Instance(mod_tok.text, name_tok.text, dict(params), bindings,
                                          positional, loc=name_tok.loc))
            if not ts.accept(","):
                break
        ts.expect(";")

    # ------------------------------------------------------------ statements
    def stmt(self):
        ts = self.ts
        t = ts.tok
        if t.kind == "kw" and t.text in _UNSUPPORTED_STMTS:
            raise UnsupportedConstruct(_UNSUPPORTED_STMTS[t.text], t.loc)
        if t.kind == "sys":
            raise UnsupportedConstruct(f"system task {t.text}", t.loc)
        if ts.at("#"):
            raise UnsupportedConstruct("delay control", t.loc)
        if ts.accept("begin"):
            if ts.accept(":"):
                ts.expect_kind("id", "block label")
            stmts = []
            while not ts.accept("end"):
                if ts.at_kind("eof"):
                    ts.error("expected 'end'")
                stmts.append(self.stmt())
            return A.Block(stmts, loc=t.loc)
        if ts.accept("if"):
            ts.expect("(")
            cond = self.expr()
            ts.expect(")")
            then = self.stmt()
            other = self.stmt() if ts.accept("else") else None
            return A.If(cond, then, other, loc=t.loc)
        if ts.accept("for"):
            ts.expect("(")
            init = self._proc_assign(require_blocking=True)
            ts.expect(";")
            cond = self.expr()
            ts.expect(";")
            step = self._proc_assign(require_blocking=True)
            ts.expect(")")
            return A.For(init, cond, step, self.stmt(), loc=t.loc)
        if ts.accept(";"):
            return A.Block([], loc=t.loc)
        s = self._proc_assign()
        ts.expect(";")
        return s

    def _proc_assign(self, require_blocking: bool = False) -> A.ProcAssign:
        ts = self.ts
        loc = ts.tok.loc
        lhs = self.lvalue()
        if ts.accept("="):
            blocking = True
        elif ts.accept("<="):
            blocking = False
            if require_blocking:
                raise SourceError("loop control must use a blocking assignment", loc)
        else:
            ts.error("expected '=' or '<='")
        if ts.at("#"):
            raise UnsupportedConstruct("intra-assignment delay", ts.tok.loc)
        return A.ProcAssign(lhs, self.expr(), blocking, loc=loc)

    def lvalue(self):
        ts = self.ts
        if ts.at("{"):
            t = ts.next()
            parts = [self.lvalue()]
            while ts.accept(","):
                parts.append(self.lvalue())
            ts.expect("}")
            return A.Concat(parts, loc=t.loc)
        t = ts.expect_kind("id", "assignment target")
        return self._selects(A.Ident(t.text, loc=t.loc))

    # ------------------------------------------------------------ expressions
    _BINARY_LEVELS = [
        ("||",), ("&&",), ("|",), ("^", "~^", "^~"), ("&",),
        ("==", "!=", "===", "!=="), ("<", "<=", ">", ">="),
        ("<<", ">>", "<<<", ">>>"), ("+", "-"), ("*", "/", "%"),
    ]

    def expr(self):
        ts = self.ts
        cond = self._binary(0)
        if ts.at("?"):
            t = ts.next()
            a = self.expr()
            ts.expect(":")
            b = self.expr()
            return A.Ternary(cond, a, b, loc=t.loc)
        return cond

    def _binary(self, level: int):
        if level == len(self._BINARY_LEVELS):
            return self._unary()
        ts = self.ts
        ops = self._BINARY_LEVELS[level]
        lhs = self._binary(level + 1)
        while ts.at(*ops):
            t = ts.next()
            if t.text in ("/", "%"):
                raise UnsupportedConstruct("division" if t.text == "/" else "modulo", t.loc,
                                           "division and modulo are outside the subset")
            if t.text in ("===", "!=="):
                raise UnsupportedConstruct("case equality", t.loc, "two-valued logic only")
            rhs = self._binary(level + 1)
            lhs = A.Binary(t.text, lhs, rhs, loc=t.loc)
        if ts.at("**"):
            raise UnsupportedConstruct("power operator", ts.tok.loc)
        return lhs

    def _unary(self):
        ts = self.ts
        t = ts.tok
        if ts.at("~", "!", "-", "+"):
            ts.next()
            return A.Unary(t.text, self._unary(), loc=t.loc)
        if ts.at("&", "|", "^", "~&", "~|", "~^", "^~"):
            ts.next()
            op = "~^" if t.text == "^~" else t.text
            return A.Reduction(op, self._unary(), loc=t.loc)
        return self._primary()

    def _primary(self):
        ts = self.ts
        t = ts.tok
        if t.kind == "num":
            ts.next()
            return parse_number(t.text, t.loc)
        if t.kind == "id":
            ts.next()
            if ts.at("("):
                raise UnsupportedConstruct("function call", t.loc)
            return self._selects(A.Ident(t.text, loc=t.loc))
        if t.kind == "sys":
            raise UnsupportedConstruct(f"system function {t.text}", t.loc)
        if t.kind == "str":
            raise UnsupportedConstruct("string literal", t.loc)
        if ts.accept("("):
            e = self.expr()
            ts.expect(")")
            return e
        if ts.accept("{"):
            first = self.expr()
            if ts.at("{"):
                ts.next()
                parts = [self.expr()]
                while ts.accept(","):
                    parts.append(self.expr())
                ts.expect("}")
                ts.expect("}")
                return A.Repeat(first, parts, loc=t.loc)
            parts = [first]
            while ts.accept(","):
                parts.append(self.expr())
            ts.expect("}")
            return A.Concat(parts, loc=t.loc)
        ts.error("expected an expression")

    def _selects(self, base):
        ts = self.ts
        while ts.at("["):
            t = ts.next()
            first = self.expr()
            if ts.accept(":"):
                second = self.expr()
                ts.expect("]")
                base = A.PartSelect(base, first, second, loc=t.loc)
            elif ts.at("+:", "-:"):
                down = ts.next().text == "-:"
                size = self.expr()
                ts.expect("]")
                base = A.IndexedPartSelect(base, first, size, down, loc=t.loc)
            else:
                ts.expect("]")
                base = A.BitSelect(base, first, loc=t.loc)
            if not isinstance(base.base, A.Ident):
                raise UnsupportedConstruct("nested select", t.loc)
        return base


def parse_source(text: str, filename: str = "<input>") -> list[A.ModuleAst]:
    """Parse Verilog text into one ModuleAst per module declaration."""
    return Parser(text, filename).parse()


def parse_files(paths) -> list[A.ModuleAst]:
    mods: list[A.ModuleAst] = []
    names: dict[str, str] = {}
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            text = fh.read()
        for m in parse_source(text, str(p)):
            if m.name in names:
                raise SourceError(f"duplicate module {m.name} (first declared in {names[m.name]})", m.loc)
            names[m.name] = str(p)
            mods.append(m)
    return mods
