"""Human-readable infix rendering of bit-vector expressions."""

from __future__ import annotations

from .expr import BvExpr

_INFIX = {
    "and": "&", "or": "|", "xor": "^", "add": "+", "sub": "-", "mul": "*",
    "shl": "<<", "lshr": ">>", "eq": "==", "ult": "<", "ule": "<=",
}


def _hex(v: int) -> str:
    return str(v) if v < 10 else hex(v)


def pretty(e: BvExpr, versions: bool = True) -> str:
    op = e.op
    if op == "var":
        name, ver = e.params
        return f"{name}_{ver}" if versions and ver else name
    if op == "const":
        return _hex(e.params[0])
    a = [pretty(x, versions) for x in e.args]
    if op in _INFIX:
        return f"({a[0]} {_INFIX[op]} {a[1]})"
    if op == "not":
        return f"!{a[0]}" if e.width == 1 else f"~{a[0]}"
    if op == "neg":
        return f"-{a[0]}"
    if op == "slt":
        return f"({a[0]} <s {a[1]})"
    if op == "ite":
        return f"({a[0]} ? {a[1]} : {a[2]})"
    if op == "extract":
        hi, lo = e.params
        return f"{a[0]}[{hi}:{lo}]" if hi != lo else f"{a[0]}[{hi}]"
    if op == "concat":
        return f"{{{a[0]}, {a[1]}}}"
    if op in ("zext", "sext"):
        return f"{op}{e.width}({a[0]})"
    return f"{op}({a[0]})"
