"""Pretty-printer producing source that re-parses to an equal ModuleAst."""

from __future__ import annotations

from . import ast as A


def expr_str(e) -> str:
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.Number):
        if e.size is None and e.base == "d":
            return str(e.value)
        digits = {"b": format(e.value, "b"), "o": format(e.value, "o"),
                  "d": str(e.value), "h": format(e.value, "x")}[e.base]
        return f"{e.size if e.size is not None else ''}'{e.base}{digits}"
    if isinstance(e, A.BitSelect):
        return f"{expr_str(e.base)}[{expr_str(e.index)}]"
    if isinstance(e, A.PartSelect):
        return f"{expr_str(e.base)}[{expr_str(e.msb)}:{expr_str(e.lsb)}]"
    if isinstance(e, A.IndexedPartSelect):
        op = "-:" if e.down else "+:"
        return f"{expr_str(e.base)}[{expr_str(e.offset)} {op} {expr_str(e.size)}]"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(expr_str(p) for p in e.parts) + "}"
    if isinstance(e, A.Repeat):
        return "{" + expr_str(e.count) + "{" + ", ".join(expr_str(p) for p in e.parts) + "}}"
    if isinstance(e, (A.Unary, A.Reduction)):
        return f"({e.op}{expr_str(e.arg)})"
    if isinstance(e, A.Binary):
        return f"({expr_str(e.lhs)} {e.op} {expr_str(e.rhs)})"
    if isinstance(e, A.Ternary):
        return f"({expr_str(e.cond)} ? {expr_str(e.then)} : {expr_str(e.other)})"
    raise TypeError(f"not an expression: {e!r}")


def _range(r) -> str:
    return "" if r is None else f"[{expr_str(r.msb)}:{expr_str(r.lsb)}] "


def stmt_lines(s, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, A.Block):
        return [pad + "begin"] + [ln for x in s.stmts for ln in stmt_lines(x, indent + 1)] + [pad + "end"]
    if isinstance(s, A.If):
        out = [pad + f"if ({expr_str(s.cond)})"] + stmt_lines(s.then, indent + 1)
        if s.other is not None:
            out += [pad + "else"] + stmt_lines(s.other, indent + 1)
        return out
    if isinstance(s, A.ProcAssign):
        return [pad + _assign(s) + ";"]
    if isinstance(s, A.For):
        head = f"for ({_assign(s.init)}; {expr_str(s.cond)}; {_assign(s.step)})"
        return [pad + head] + stmt_lines(s.body, indent + 1)
    raise TypeError(f"not a statement: {s!r}")


def _assign(s: A.ProcAssign) -> str:
    return f"{expr_str(s.lhs)} {'=' if s.blocking else '<='} {expr_str(s.rhs)}"


def module_str(m: A.ModuleAst) -> str:
    lines = []
    head = f"module {m.name}"
    if m.header_params:
        head += " #(" + ", ".join(f"parameter {p} = {expr_str(m.parameters[p])}"
                                  for p in m.header_params) + ")"
    head += "(" + ", ".join(p.name for p in m.ports) + ");"
    lines.append(head)
    reg_ports = {p.name: p for p in m.ports if p.is_reg}
    for p in m.ports:
        if not p.is_reg:
            lines.append(f"  {p.direction} {_range(p.range)}{p.name};")
    for n in m.nets:
        if n.name in reg_ports:
            p = reg_ports[n.name]
            lines.append(f"  {p.direction} reg {_range(p.range)}{p.name};")
        elif n.kind == "integer":
            lines.append(f"  integer {n.name};")
        else:
            lines.append(f"  {n.kind} {_range(n.range)}{n.name};")
    for k, v in m.parameters.items():
        if k not in m.header_params:
            lines.append(f"  parameter {k} = {expr_str(v)};")
    for k, v in m.localparams.items():
        lines.append(f"  localparam {k} = {expr_str(v)};")
    for a in m.continuous_assigns:
        lines.append(f"  assign {expr_str(a.lhs)} = {expr_str(a.rhs)};")
    for blk in m.always_blocks:
        trig = "@(*)" if blk.clock is None else f"@(posedge {blk.clock})"
        lines.append(f"  always {trig}")
        lines += stmt_lines(blk.body, 2)
    for ini in m.initial_blocks:
        lines.append("  initial")
        lines += stmt_lines(ini.body, 2)
    for inst in m.instances:
        s = f"  {inst.module} "
        if inst.params:
            named = [f".{k}({expr_str(v)})" for k, v in inst.params.items() if not k.startswith("#")]
            pos = [expr_str(v) for k, v in inst.params.items() if k.startswith("#")]
            s += "#(" + ", ".join(pos + named) + ") "
        s += inst.name + "("
        if inst.positional is not None:
            s += ", ".join(expr_str(x) for x in inst.positional)
        else:
            s += ", ".join(f".{k}({'' if v is None else expr_str(v)})" for k, v in inst.bindings.items())
        lines.append(s + ");")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def source_str(mods) -> str:
    return "\n".join(module_str(m) for m in mods)
