"""Width-annotated bit-vector expressions.

Every node is immutable and hashable, so expressions can be shared freely
between engines, used as cache keys by the bit-blaster, and handed across
threads.
"""

from __future__ import annotations

from typing import Iterable, Iterator

MAX_WIDTH = 4096

UNARY = frozenset({"not", "neg", "redor", "redand", "redxor"})
BINARY = frozenset(
    {"and", "or", "xor", "add", "sub", "mul", "shl", "lshr",
     "eq", "ult", "ule", "slt", "concat"}
)
PREDICATES = frozenset({"eq", "ult", "ule", "slt", "redor", "redand", "redxor"})
OPS = UNARY | BINARY | frozenset({"var", "const", "ite", "extract", "zext", "sext"})


class WidthError(ValueError):
    """Raised when an expression would be ill-formed."""


class BvExpr:
    __slots__ = ("op", "args", "width", "params", "_hash")

    def __init__(self, op: str, args: tuple = (), width: int = 1, params: tuple = ()):
        self.op = op
        self.args = args
        self.width = width
        self.params = params
        self._hash = hash((op, args, width, params))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, BvExpr) or self._hash != other._hash:
            return False
        return (self.op == other.op and self.width == other.width
                and self.params == other.params and self.args == other.args)

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __setattr__(self, key, value):
        if hasattr(self, "_hash"):
            raise AttributeError("BvExpr is immutable")
        object.__setattr__(self, key, value)

    def __reduce__(self):
        return (BvExpr, (self.op, self.args, self.width, self.params))

    # -- convenience accessors
    @property
    def name(self) -> str:
        return self.params[0]

    @property
    def version(self) -> int:
        return self.params[1]

    @property
    def value(self) -> int:
        return self.params[0]

    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self) -> str:
        from .pretty import pretty
        return f"BvExpr<{pretty(self)}:{self.width}>"


def mask(width: int) -> int:
    return (1 << width) - 1


def _check_width(w: int) -> None:
    if not isinstance(w, int) or w < 1 or w > MAX_WIDTH:
        raise WidthError(f"invalid width {w!r}")


def _same(op: str, a: BvExpr, b: BvExpr) -> None:
    if a.width != b.width:
        raise WidthError(f"{op}: operand widths differ ({a.width} vs {b.width})")


# -- leaves

def var(name: str, width: int, version: int = 0) -> BvExpr:
    _check_width(width)
    return BvExpr("var", (), width, (name, version))


def const(value: int, width: int) -> BvExpr:
    _check_width(width)
    if value < 0 or value >> width:
        raise WidthError(f"constant {value} does not fit in {width} bits")
    return BvExpr("const", (), width, (value,))


def const_wrap(value: int, width: int) -> BvExpr:
    """Constant reduced modulo 2**width (accepts negative values)."""
    return const(value & mask(width), width)


TRUE = const(1, 1)
FALSE = const(0, 1)


def boolconst(b: bool) -> BvExpr:
    return TRUE if b else FALSE


# -- operators

def bvnot(a: BvExpr) -> BvExpr:
    return BvExpr("not", (a,), a.width)


def neg(a: BvExpr) -> BvExpr:
    return BvExpr("neg", (a,), a.width)


def _binop(op: str, a: BvExpr, b: BvExpr) -> BvExpr:
    _same(op, a, b)
    return BvExpr(op, (a, b), a.width)


def bvand(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("and", a, b)


def bvor(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("or", a, b)


def bvxor(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("xor", a, b)


def add(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("add", a, b)


def sub(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("sub", a, b)


def mul(a: BvExpr, b: BvExpr) -> BvExpr:
    return _binop("mul", a, b)


def shl(a: BvExpr, amount: BvExpr) -> BvExpr:
    # the shift amount may have any width; the result keeps the width of a
    return BvExpr("shl", (a, amount), a.width)


def lshr(a: BvExpr, amount: BvExpr) -> BvExpr:
    return BvExpr("lshr", (a, amount), a.width)


def _pred(op: str, a: BvExpr, b: BvExpr) -> BvExpr:
    _same(op, a, b)
    return BvExpr(op, (a, b), 1)


def eq(a: BvExpr, b: BvExpr) -> BvExpr:
    return _pred("eq", a, b)


def ne(a: BvExpr, b: BvExpr) -> BvExpr:
    return bvnot(eq(a, b))


def ult(a: BvExpr, b: BvExpr) -> BvExpr:
    return _pred("ult", a, b)


def ule(a: BvExpr, b: BvExpr) -> BvExpr:
    return _pred("ule", a, b)


def ugt(a: BvExpr, b: BvExpr) -> BvExpr:
    return ult(b, a)


def uge(a: BvExpr, b: BvExpr) -> BvExpr:
    return ule(b, a)


def slt(a: BvExpr, b: BvExpr) -> BvExpr:
    return _pred("slt", a, b)


def ite(c: BvExpr, a: BvExpr, b: BvExpr) -> BvExpr:
    if c.width != 1:
        raise WidthError("ite condition must have width 1")
    _same("ite", a, b)
    return BvExpr("ite", (c, a, b), a.width)


def extract(a: BvExpr, hi: int, lo: int) -> BvExpr:
    if not (0 <= lo <= hi < a.width):
        raise WidthError(f"extract [{hi}:{lo}] out of range for width {a.width}")
    return BvExpr("extract", (a,), hi - lo + 1, (hi, lo))


def concat(a: BvExpr, b: BvExpr) -> BvExpr:
    """``a`` occupies the most significant bits."""
    w = a.width + b.width
    _check_width(w)
    return BvExpr("concat", (a, b), w)


def concat_all(parts: Iterable[BvExpr]) -> BvExpr:
    parts = list(parts)
    if not parts:
        raise WidthError("empty concatenation")
    out = parts[0]
    for p in parts[1:]:
        out = concat(out, p)
    return out


def zext(a: BvExpr, width: int) -> BvExpr:
    _check_width(width)
    if width < a.width:
        raise WidthError(f"zext to {width} narrower than {a.width}")
    return BvExpr("zext", (a,), width, (width,))


def sext(a: BvExpr, width: int) -> BvExpr:
    _check_width(width)
    if width < a.width:
        raise WidthError(f"sext to {width} narrower than {a.width}")
    return BvExpr("sext", (a,), width, (width,))


def redor(a: BvExpr) -> BvExpr:
    return BvExpr("redor", (a,), 1)


def redand(a: BvExpr) -> BvExpr:
    return BvExpr("redand", (a,), 1)


def redxor(a: BvExpr) -> BvExpr:
    return BvExpr("redxor", (a,), 1)


# -- width adaptation helpers used by the front ends

def resize(a: BvExpr, width: int) -> BvExpr:
    """Zero-extend or truncate to ``width``; identity when already there."""
    if a.width == width:
        return a
    if a.width < width:
        if a.op == "const":
            return const(a.value, width)
        return zext(a, width)
    if a.op == "const":
        return const(a.value & mask(width), width)
    return extract(a, width - 1, 0)


def truthy(a: BvExpr) -> BvExpr:
    """C/Verilog truth value of a vector as a width-1 expression."""
    if a.width == 1:
        return a
    if a.op == "const":
        return boolconst(a.value != 0)
    return redor(a)


def land(*xs: BvExpr) -> BvExpr:
    xs = [x for x in xs if not (x.op == "const" and x.value == 1)]
    if not xs:
        return TRUE
    out = xs[0]
    for x in xs[1:]:
        out = bvand(out, x)
    return out


def lor(*xs: BvExpr) -> BvExpr:
    xs = [x for x in xs if not (x.op == "const" and x.value == 0)]
    if not xs:
        return FALSE
    out = xs[0]
    for x in xs[1:]:
        out = bvor(out, x)
    return out


def implies(a: BvExpr, b: BvExpr) -> BvExpr:
    return bvor(bvnot(a), b)


# -- traversal

def iter_nodes(e: BvExpr) -> Iterator[BvExpr]:
    """Post-order, each distinct node once."""
    seen = set()
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))


def variables(e: BvExpr) -> set[tuple[str, int]]:
    return {n.params for n in iter_nodes(e) if n.op == "var"}


def var_names(e: BvExpr) -> set[str]:
    return {n.params[0] for n in iter_nodes(e) if n.op == "var"}


def var_nodes(e: BvExpr) -> list[BvExpr]:
    return [n for n in iter_nodes(e) if n.op == "var"]


def substitute(e: BvExpr, fn) -> BvExpr:
    """Rebuild ``e`` replacing each variable node ``v`` with ``fn(v)``.

    ``fn`` returns a replacement of the same width, or ``None`` to keep ``v``.
    """
    memo: dict[int, BvExpr] = {}
    for node in iter_nodes(e):
        if node.op == "var":
            r = fn(node)
            if r is not None and r.width != node.width:
                raise WidthError(f"substitution for {node.params} changes width")
            memo[id(node)] = node if r is None else r
        elif node.args:
            new_args = tuple(memo[id(a)] for a in node.args)
            if all(x is y for x, y in zip(new_args, node.args)):
                memo[id(node)] = node
            else:
                memo[id(node)] = BvExpr(node.op, new_args, node.width, node.params)
        else:
            memo[id(node)] = node
    return memo[id(e)]


def conjuncts(e: BvExpr) -> list[BvExpr]:
    """Flatten a tree of width-1 ``and`` nodes."""
    out, stack = [], [e]
    while stack:
        n = stack.pop()
        if n.op == "and" and n.width == 1:
            stack.extend(reversed(n.args))
        else:
            out.append(n)
    return out


def size(e: BvExpr) -> int:
    return sum(1 for _ in iter_nodes(e))
