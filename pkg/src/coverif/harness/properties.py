"""Simple temporal properties and their lowering to firmware asserts.

Accepted forms (expressions use firmware syntax):

    cond
    ante |-> cons
    ante |-> ##N later
    ante |-> (cons && ##N later)
    ante |=> later                 (same as ante |-> ##1 later)

A property is checked from the cycle in which it is evaluated: the
immediate part becomes ``assert(!ante || cons)``, then ``N`` steps are
taken and the delayed part is asserted.  The delayed assert is guarded by
the antecedent as sampled before the steps, so it is only required when
the property was actually triggered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..diagnostics import SourceError, UnsupportedConstruct
from . import firmware as F

_UNSUPPORTED = [
    (r"##\s*\[", "cycle delay range"), (r"\[\*", "consecutive repetition"),
    (r"\[->", "goto repetition"), (r"\[=", "non-consecutive repetition"),
    (r"\beventually\b|\bs_eventually\b", "eventually"), (r"\buntil\b|\bs_until\b", "until"),
    (r"\$past\b|\$rose\b|\$fell\b|\$stable\b", "sampled-value function"),
    (r"\bthroughout\b|\bwithin\b|\bintersect\b", "sequence operator"),
]


@dataclass
class PropertySpec:
    antecedent: Optional[object]      # firmware expression; None means true
    consequent: Optional[object]      # checked in the triggering cycle
    delay: int = 0
    delayed: Optional[object] = None  # checked ``delay`` cycles later
    label: str = "property"
    text: str = ""

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("property delay must be non-negative")


def _strip_parens(s: str) -> str:
    s = s.strip()
    while s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and i != len(s) - 1:
                return s
        s = s[1:-1].strip()
    return s


def _split_top(s: str, sep: str) -> list[str]:
    """Split ``s`` on ``sep`` occurring outside parentheses."""
    out, depth, start, i = [], 0, 0, 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and s.startswith(sep, i):
            out.append(s[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    out.append(s[start:])
    return out


def parse_property(text: str, label: str = "property") -> PropertySpec:
    for rx, what in _UNSUPPORTED:
        if re.search(rx, text):
            raise UnsupportedConstruct(f"temporal operator: {what}", None, text)
    body = text.strip()
    ante = None
    extra = 0
    for arrow, d in (("|->", 0), ("|=>", 1)):
        parts = _split_top(body, arrow)
        if len(parts) == 2:
            ante, body, extra = parts[0], parts[1], d
            break
        if len(parts) > 2:
            raise UnsupportedConstruct("nested implication", None, text)
    body = _strip_parens(body)
    now, later, delay = body, None, 0
    for i, part in enumerate(_split_top(body, "&&")):
        m = re.match(r"\s*##\s*(\d+)\s*(.*)$", part, re.S)
        if m:
            pieces = _split_top(body, "&&")
            if i != len(pieces) - 1:
                raise UnsupportedConstruct("delayed term must come last", None, text)
            delay = int(m.group(1))
            later = "&&".join([m.group(2)] + pieces[i + 1:])
            now = "&&".join(pieces[:i]) or None
            break
    if "##" in (now or "") or "##" in (later or ""):
        raise UnsupportedConstruct("multiple cycle delays", None, text)
    if extra:
        if later is not None:
            raise UnsupportedConstruct("'|=>' combined with '##'", None, text)
        later, delay, now = now, 1, None

    def parse(x):
        if x is None or not x.strip():
            return None
        try:
            return F.parse_fw_expr(x.strip(), "<property>")
        except SourceError as exc:
            raise SourceError(f"in property {text!r}: {exc.message}") from exc
    if now is not None and later is None and delay == 0:
        return PropertySpec(parse(ante), parse(now), 0, None, label, text)
    return PropertySpec(parse(ante), parse(now), delay, parse(later), label, text)


def lower_property(p: PropertySpec, tag: int = 0) -> list:
    """Firmware statements checking ``p`` from the current cycle."""
    loc = F.Loc("<property>", 1, 1)
    out: list = []

    def implied(cond):
        if p.antecedent is None:
            return cond
        return F.Binary("||", F.Unary("!", p.antecedent, loc), cond, loc)

    def check(cond):
        return F.ExprStmt(F.Call("assert", [cond, F.Str(p.label, loc)], loc), loc)

    trigger = None
    if p.delayed is not None and p.delay > 0 and p.antecedent is not None:
        trigger = f"__trig{tag}"
        out.append(F.Decl(1, trigger, None, p.antecedent, loc))
    if p.consequent is not None:
        out.append(check(implied(p.consequent)))
    if p.delayed is not None:
        out += [F.ExprStmt(F.Call("step", [], loc), loc) for _ in range(p.delay)]
        cond = p.delayed
        if trigger is not None:
            cond = F.Binary("||", F.Unary("!", F.Name(trigger, loc), loc), cond, loc)
        elif p.delay == 0:
            cond = implied(cond)
        out.append(check(cond))
    return [F.BlockStmt(out, loc)]


# -- rendering (for diagnostics and the translate command)

_PREC = {"||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6, "<": 7, "<=": 7,
         ">": 7, ">=": 7, "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10}


def render_expr(e, parent: int = 0) -> str:
    if isinstance(e, F.Num):
        return str(e.value)
    if isinstance(e, F.Name):
        return e.name
    if isinstance(e, F.HwRef):
        return f"hw.{e.name}"
    if isinstance(e, F.Str):
        return '"' + e.text + '"'
    if isinstance(e, F.Index):
        return f"{e.name}[{render_expr(e.index)}]"
    if isinstance(e, F.Unary):
        return e.op + render_expr(e.arg, 11)
    if isinstance(e, F.Binary):
        p = _PREC[e.op]
        s = f"{render_expr(e.left, p)}{e.op}{render_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    if isinstance(e, F.Cond):
        s = f"{render_expr(e.cond, 1)}?{render_expr(e.then)}:{render_expr(e.orelse)}"
        return f"({s})" if parent else s
    if isinstance(e, F.Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    raise TypeError(f"cannot render {e!r}")


def render_statements(stmts) -> str:
    out = []
    for s in stmts:
        if isinstance(s, F.BlockStmt):
            out.append(render_statements(s.body))
        elif isinstance(s, F.Decl):
            out.append(f"_Bool {s.name} = {render_expr(s.init)};")
        elif isinstance(s, F.ExprStmt):
            c = s.expr
            if c.name == "assert":
                out.append(f"assert({render_expr(c.args[0])});")
            else:
                out.append(f"{render_expr(c)};")
        else:
            raise TypeError(f"cannot render {s!r}")
    return " ".join(x for x in out if x)
