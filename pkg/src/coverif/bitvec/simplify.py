"""Constant folding and a handful of local rewrites.

Only rewrites that hold at every width are applied; the result is always
equivalent to the input under :func:`evaluate`.
"""

from __future__ import annotations

from typing import Callable, Optional

from .evaluate import evaluate_with
from .expr import BvExpr, const, mask


def _all_const(args) -> bool:
    for a in args:
        if a.op != "const":
            return False
    return True


def _is(e: BvExpr, v: int) -> bool:
    return e.op == "const" and e.params[0] == v


def _rebuild(node: BvExpr, args: tuple) -> BvExpr:
    op, w = node.op, node.width
    if _all_const(args):
        tmp = BvExpr(op, args, w, node.params)
        return const(evaluate_with(tmp, lambda n: None), w)
    if op == "ite":
        c, a, b = args
        if c.op == "const":
            return a if c.params[0] else b
        if a == b:
            return a
        if w == 1 and _is(a, 1) and _is(b, 0):
            return c
    elif op in ("and", "or", "xor", "add", "mul"):
        a, b = args
        if a.op == "const" and b.op != "const":
            a, b = b, a  # constant on the right
        if op == "and":
            if _is(b, 0):
                return b
            if _is(b, mask(w)) or a == b:
                return a
        elif op == "or":
            if _is(b, 0) or a == b:
                return a
            if _is(b, mask(w)):
                return b
        elif op == "xor":
            if _is(b, 0):
                return a
            if a == b:
                return const(0, w)
        elif op == "add":
            if _is(b, 0):
                return a
        elif op == "mul":
            if _is(b, 1):
                return a
            if _is(b, 0):
                return b
        args = (a, b)
    elif op == "sub":
        if _is(args[1], 0):
            return args[0]
        if args[0] == args[1]:
            return const(0, w)
    elif op in ("shl", "lshr"):
        if _is(args[1], 0):
            return args[0]
        if _is(args[0], 0):
            return args[0]
        if args[1].op == "const" and args[1].params[0] >= w:
            return const(0, w)
    elif op == "eq":
        if args[0] == args[1]:
            return const(1, 1)
    elif op == "ule":
        if args[0] == args[1] or _is(args[0], 0):
            return const(1, 1)
    elif op == "ult":
        if args[0] == args[1] or _is(args[1], 0):
            return const(0, 1)
    elif op == "not":
        if args[0].op == "not":
            return args[0].args[0]
    elif op == "extract":
        hi, lo = node.params
        a = args[0]
        if lo == 0 and hi == a.width - 1:
            return a
        if a.op == "zext" and hi < a.args[0].width:
            return _rebuild(node, (a.args[0],))
        if a.op == "extract":
            return _rebuild(BvExpr("extract", (a.args[0],), w, (hi + a.params[1], lo + a.params[1])),
                            (a.args[0],))
    elif op in ("zext", "sext"):
        if args[0].width == w:
            return args[0]
    elif op in ("redor", "redxor", "redand"):
        if args[0].width == 1:
            return args[0]
    if all(x is y for x, y in zip(args, node.args)):
        return node
    return BvExpr(op, args, w, node.params)


def fold(e: BvExpr, var_fn: Optional[Callable[[BvExpr], Optional[BvExpr]]] = None) -> BvExpr:
    """Fold constants in ``e``.

    ``var_fn`` may map a variable node to a replacement (typically a known
    constant or a renamed variable); returning ``None`` keeps the node.
    """
    memo: dict[int, BvExpr] = {}
    return _fold(e, var_fn, memo)


def _fold(e: BvExpr, var_fn, memo) -> BvExpr:
    r = memo.get(id(e))
    if r is not None:
        return r
    if e.op == "var":
        r = var_fn(e) if var_fn is not None else None
        if r is None:
            r = e
    elif e.op == "const":
        r = e
    else:
        r = _rebuild(e, tuple(_fold(a, var_fn, memo) for a in e.args))
    memo[id(e)] = r
    return r
