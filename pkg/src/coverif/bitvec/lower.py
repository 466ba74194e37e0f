"""Mask/shift lowering of Verilog vector operations.

These produce the word-level read-modify-write forms a C back end needs:
bit and part selects on the left of an assignment, concatenation of slices,
and indexed part selects whose offset becomes constant after unrolling.
"""

from __future__ import annotations

from .expr import (
    BvExpr, WidthError, bvand, bvnot, bvor, const, extract, lshr, mask, resize, shl,
)
from .simplify import fold


class LoweringError(ValueError):
    pass


def _amount(n: int, w: int) -> BvExpr:
    return const(n, max(w, n.bit_length(), 1))


def _upper_bound(e: BvExpr) -> int:
    """A cheap upper bound on the unsigned value of ``e``."""
    if e.op == "const":
        return e.value
    if e.op == "and":
        return min(_upper_bound(e.args[0]), _upper_bound(e.args[1]))
    if e.op == "lshr" and e.args[1].op == "const":
        return _upper_bound(e.args[0]) >> e.args[1].value
    if e.op in ("zext", "extract"):
        return min(mask(e.width), _upper_bound(e.args[0]))
    return mask(e.width)


def lower_part_select(base: BvExpr, hi: int, lo: int) -> BvExpr:
    """``base[hi:lo]`` as ``(base & m) >> lo`` at the width of ``base``."""
    if not (0 <= lo <= hi < base.width):
        raise LoweringError(f"select [{hi}:{lo}] out of range for width {base.width}")
    w = base.width
    m = mask(hi + 1) & ~mask(lo)
    out = base if m == mask(w) else bvand(base, const(m, w))
    if lo:
        out = lshr(out, _amount(lo, w))
    return out


def lower_bit_assign(lhs_base: BvExpr, hi: int, lo: int, rhs: BvExpr) -> BvExpr:
    """Full-width value of ``lhs_base`` after ``lhs_base[hi:lo] = rhs``."""
    w = lhs_base.width
    if not (0 <= lo <= hi < w):
        raise LoweringError(f"assignment to [{hi}:{lo}] out of range for width {w}")
    field = mask(hi - lo + 1)
    keep = mask(w) & ~(field << lo)
    value = resize(rhs, w) if rhs.width <= w else extract(rhs, w - 1, 0)
    if keep == 0:
        return value
    if hi != w - 1 and _upper_bound(value) > field:
        value = bvand(value, const(field, w))
    if lo:
        value = shl(value, _amount(lo, w))
    return bvor(bvand(lhs_base, const(keep, w)), value)


def lower_concat(operands: list[tuple[BvExpr, int, int]]) -> BvExpr:
    """Concatenate slices ``(expr, hi, lo)``; the first lands in the top bits."""
    if not operands:
        raise LoweringError("empty concatenation")
    for e, hi, lo in operands:
        if not (0 <= lo <= hi < e.width):
            raise LoweringError(f"slice [{hi}:{lo}] out of range for width {e.width}")
    if len(operands) == 1:
        e, hi, lo = operands[0]
        if lo == 0 and hi == e.width - 1:
            return e
    total = sum(hi - lo + 1 for _, hi, lo in operands)
    pos = total
    out = None
    for e, hi, lo in operands:
        sw = hi - lo + 1
        pos -= sw
        t = e
        if lo:
            t = lshr(t, _amount(lo, e.width))
        if hi < e.width - 1:
            t = bvand(t, const(mask(sw), e.width))
        t = resize(t, total)
        if pos:
            t = shl(t, _amount(pos, total))
        out = t if out is None else bvor(out, t)
    return out


def lower_indexed_part_select(base: BvExpr, offset: BvExpr, w: int) -> BvExpr:
    """``base[offset +: w]`` with an offset that folds to a constant."""
    off = fold(offset)
    if off.op != "const":
        raise LoweringError("indexed part-select offset is not constant after unrolling")
    lo = off.value
    hi = lo + w - 1
    if w < 1 or hi >= base.width:
        raise LoweringError(f"indexed part-select [{lo} +: {w}] out of range for width {base.width}")
    if lo == 0 and w == base.width:
        return base
    try:
        return extract(base, hi, lo)
    except WidthError as exc:  # pragma: no cover - guarded above
        raise LoweringError(str(exc)) from exc


def lower_dynamic_select(base: BvExpr, index: BvExpr) -> BvExpr:
    """Single bit ``base[index]`` for a run-time index (0 when out of range)."""
    return extract(lshr(base, index), 0, 0)


def lower_dynamic_bit_assign(base: BvExpr, index: BvExpr, bit: BvExpr) -> BvExpr:
    """``base[index] = bit`` for a run-time index; out-of-range writes are dropped."""
    w = base.width
    one = shl(const(1, w), index)
    value = shl(resize(resize(bit, 1), w), index)
    return bvor(bvand(base, bvnot(one)), value)
