import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coverif import bitvec as B
from coverif.bitvec.expr import WidthError, mask
from coverif.bitvec.lower import (
    LoweringError, lower_bit_assign, lower_concat, lower_dynamic_bit_assign, lower_dynamic_select,
    lower_indexed_part_select, lower_part_select,
)

from support import ExprGen, np_eval, ref_bit_assign, ref_concat, ref_part_select, random_vars

WIDTHS = [1, 3, 8, 32]


def ev(e, **env):
    return B.evaluate_by_name(e, env)


# -- construction invariants

def test_width_rules():
    x, y = B.var("x", 4), B.var("y", 4)
    assert B.eq(x, y).width == 1
    assert B.ult(x, y).width == 1
    assert B.concat(x, B.var("z", 3)).width == 7
    assert B.extract(x, 2, 1).width == 2
    assert B.redxor(x).width == 1
    with pytest.raises(WidthError):
        B.add(x, B.var("z", 3))
    with pytest.raises(WidthError):
        B.extract(x, 4, 0)
    with pytest.raises(WidthError):
        B.ite(x, x, y)
    with pytest.raises(WidthError):
        B.const(16, 4)


def test_expressions_are_immutable_and_hash_consed():
    a = B.add(B.var("x", 8), B.const(1, 8))
    b = B.add(B.var("x", 8), B.const(1, 8))
    assert a == b and hash(a) == hash(b)
    with pytest.raises(AttributeError):
        a.width = 3


# -- evaluation examples

def test_eval_ite_of_shadows():
    c = B.ite(B.var("e_old", 1), B.const(0, 1), B.var("d_old", 1))
    assert ev(c, e_old=1, d_old=1) == 0
    assert ev(c, e_old=0, d_old=1) == 1


@pytest.mark.parametrize("w", WIDTHS)
def test_and_zero_annihilates(w):
    x = B.var("x", w)
    for v in (0, 1, mask(w), mask(w) // 3):
        assert ev(B.bvand(x, B.const(0, w)), x=v) == 0


def test_eval_shift_example():
    c, d = B.var("c", 32), B.var("d", 32)
    e = B.shl(B.bvand(c, B.const(3, 32)), d)
    assert ev(e, c=7, d=2) == 12
    for cv in range(16):
        for dv in range(40):
            want = ((cv & 3) << dv) % (1 << 32) if dv < 32 else 0
            assert ev(e, c=cv, d=dv) == want


def test_shift_beyond_width_is_zero():
    x = B.var("x", 8)
    assert ev(B.shl(x, B.const(8, 4)), x=0xff) == 0
    assert ev(B.lshr(x, B.const(9, 4)), x=0xff) == 0
    assert ev(B.lshr(x, B.const(7, 4)), x=0xff) == 1


def test_unbound_variable():
    with pytest.raises(B.UnboundVariable):
        ev(B.var("nope", 3))


def test_signed_ops():
    a, b = B.var("a", 4), B.var("b", 4)
    assert ev(B.slt(a, b), a=0xF, b=0) == 1          # -1 < 0
    assert ev(B.sext(a, 8), a=0x8) == 0xF8


# -- algebraic identities

@pytest.mark.parametrize("w", WIDTHS)
@given(data=st.data())
def test_identities(w, data):
    xv = data.draw(st.integers(0, mask(w)))
    yv = data.draw(st.integers(0, mask(w)))
    zv = data.draw(st.integers(0, mask(w)))
    x, y, z = B.var("x", w), B.var("y", w), B.var("z", w)
    env = dict(x=xv, y=yv, z=zv)
    assert ev(B.bvxor(x, x), **env) == 0
    assert ev(B.add(B.add(x, y), z), **env) == ev(B.add(x, B.add(y, z)), **env)
    cat = B.concat(x, y)
    assert ev(B.extract(cat, 2 * w - 1, w), **env) == xv
    assert ev(B.extract(cat, w - 1, 0), **env) == yv
    assert ev(B.extract(B.zext(x, w + 5), w - 1, 0), **env) == xv
    assert ev(B.sub(x, y), **env) == ev(B.add(x, B.neg(y)), **env)


@given(seed=st.integers(0, 2**32 - 1))
def test_eval_fits_width_and_matches_vector_oracle(seed):
    rng = random.Random(seed)
    variables = random_vars(rng, 3, 10)
    e = ExprGen(rng, variables, 10).bv(rng.randint(1, 12), 3)
    env = {n: rng.randrange(1 << w) for n, w in variables}
    got = ev(e, **env)
    assert 0 <= got < (1 << e.width)
    arrays = {n: np.array([v], dtype=np.uint64) for n, v in env.items()}
    assert int(np.broadcast_to(np_eval(e, arrays), (1,))[0]) == got


@given(seed=st.integers(0, 2**32 - 1))
def test_fold_preserves_value(seed):
    rng = random.Random(seed)
    variables = random_vars(rng, 2, 6)
    e = ExprGen(rng, variables, 6).bv(rng.randint(1, 8), 4)
    folded = B.fold(e)
    assert folded.width == e.width
    for _ in range(8):
        env = {n: rng.randrange(1 << w) for n, w in variables}
        assert ev(folded, **env) == ev(e, **env)


def test_fold_constants():
    assert B.fold(B.add(B.const(3, 4), B.const(15, 4))) == B.const(2, 4)
    x = B.var("x", 4)
    assert B.fold(B.bvand(x, B.const(0, 4))) == B.const(0, 4)


# -- lowering rules

def test_bit_assign_figure_pattern():
    out1, in1 = B.var("out1", 8), B.var("in1", 8)
    e = lower_bit_assign(out1, 7, 5, lower_part_select(in1, 4, 2))
    assert B.pretty(e, versions=False) == "((out1 & 0x1f) | (((in1 & 0x1c) >> 2) << 5))"
    assert ev(e, out1=0x00, in1=0x14) == 0xA0


def test_bit_assign_whole_vector():
    out, rhs = B.var("out", 8), B.var("rhs", 8)
    assert lower_bit_assign(out, 7, 0, rhs) == rhs


def test_bit_assign_range_errors():
    with pytest.raises(LoweringError):
        lower_bit_assign(B.var("o", 8), 8, 0, B.var("r", 8))
    with pytest.raises(LoweringError):
        lower_part_select(B.var("o", 8), 2, 3)


def test_concat_figure_pattern():
    in1, in2 = B.var("in1", 8), B.var("in2", 8)
    e = lower_concat([(in2, 5, 2), (in1, 6, 1)])
    assert e.width == 10
    assert B.pretty(e, versions=False) == \
        "((zext10(((in2 >> 2) & 0xf)) << 6) | zext10(((in1 >> 1) & 0x3f)))"
    assert ev(e, in2=0xFF, in1=0x00) == 0x3C0


def test_concat_single_operand_is_identity():
    x = B.var("x", 5)
    assert lower_concat([(x, 4, 0)]) == x
    with pytest.raises(LoweringError):
        lower_concat([])


def test_indexed_part_select():
    src = B.var("in", 32)
    i = B.const(2, 32)
    e = lower_indexed_part_select(src, B.mul(B.const(8, 32), i), 8)
    assert e == B.extract(src, 23, 16)
    assert lower_indexed_part_select(src, B.const(0, 32), 32) == src
    with pytest.raises(LoweringError):
        lower_indexed_part_select(src, B.var("i", 32), 8)
    with pytest.raises(LoweringError):
        lower_indexed_part_select(src, B.const(28, 32), 8)


def test_bytewise_copy_loop():
    src = B.var("in", 32)
    rng = random.Random(5)
    for _ in range(256):
        out = B.const(0, 32)
        for i in range(4):
            byte = lower_indexed_part_select(src, B.const(8 * i, 32), 8)
            out = lower_bit_assign(out, 8 * i + 7, 8 * i, byte)
        v = rng.randrange(1 << 32)
        assert ev(out, **{"in": v}) == v


@given(w=st.integers(1, 16), data=st.data())
def test_bit_assign_matches_bit_reference(w, data):
    lo = data.draw(st.integers(0, w - 1))
    hi = data.draw(st.integers(lo, w - 1))
    rw = data.draw(st.integers(hi - lo + 1, 20))
    old = data.draw(st.integers(0, mask(w)))
    rhs = data.draw(st.integers(0, mask(rw)))
    e = lower_bit_assign(B.var("o", w), hi, lo, B.var("r", rw))
    assert ev(e, o=old, r=rhs) == ref_bit_assign(old, w, hi, lo, rhs, rw)


@given(data=st.data())
def test_concat_matches_bit_reference(data):
    n = data.draw(st.integers(1, 4))
    slices, ops, env = [], [], {}
    for k in range(n):
        w = data.draw(st.integers(1, 12))
        lo = data.draw(st.integers(0, w - 1))
        hi = data.draw(st.integers(lo, w - 1))
        v = data.draw(st.integers(0, mask(w)))
        env[f"x{k}"] = v
        ops.append((B.var(f"x{k}", w), hi, lo))
        slices.append((v, w, hi, lo))
    assert ev(lower_concat(ops), **env) == ref_concat(slices)


@given(w=st.integers(1, 24), data=st.data())
def test_part_select_matches_bit_reference(w, data):
    lo = data.draw(st.integers(0, w - 1))
    width = data.draw(st.integers(1, w - lo))
    v = data.draw(st.integers(0, mask(w)))
    e = lower_indexed_part_select(B.var("x", w), B.const(lo, 8), width)
    assert ev(e, x=v) == ref_part_select(v, w, lo, width)
    assert ev(lower_part_select(B.var("x", w), lo + width - 1, lo), x=v) == ref_part_select(v, w, lo, width)


@given(w=st.integers(1, 12), v=st.integers(0, 4095), idx=st.integers(0, 20), bit=st.integers(0, 1))
def test_dynamic_bit_access(w, v, idx, bit):
    v &= mask(w)
    x, i = B.var("x", w), B.var("i", 5)
    assert ev(lower_dynamic_select(x, i), x=v, i=idx) == ((v >> idx) & 1 if idx < w else 0)
    want = v if idx >= w else (v & ~(1 << idx)) | (bit << idx)
    assert ev(lower_dynamic_bit_assign(x, i, B.var("b", 1)), x=v, i=idx, b=bit) == want


def test_pretty_versions():
    e = B.add(B.var("c", 8, 1), B.var("d", 8, 1))
    assert B.pretty(e) == "(c_1 + d_1)"
    assert B.pretty(e, versions=False) == "(c + d)"
