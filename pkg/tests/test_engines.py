import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from coverif import bitvec as B
from coverif.engines import SAFE, UNKNOWN, UNSAFE, bmc, slice_program, unwind
from coverif.engines.bmc import encode_ssa
from coverif.engines.slicer import slice_stats
from coverif.engines.symex import SymbolicExecutor, SymexConfig, SymState
from coverif.engines.unwind import LOOP_CAP, UnwindError, UnwindInfo
from coverif.harness.catalog import get
from coverif.harness.pipeline import ScenarioConfig, build_job
from coverif.harness.replay import enumerate_verdict
from coverif.netlist.ir import Assert, Assign, Assume, Havoc, If, Loop, count_stmts, cycle_marker, walk

from support import fragment


def fw(name, w=32):
    return B.var("fw." + name, w)


def c32(n):
    return B.const(n, 32)


def counted(body, n, name="i", cycle=False):
    """``for (i = 0; i < n; i++) body`` as IR."""
    i = fw(name)
    return [Assign(i.params[0], c32(0)),
            Loop(B.ult(i, c32(n)), tuple(body) + (Assign(i.params[0], B.add(i, c32(1))),), cycle=cycle)]


def paths_text(ex):
    return [[B.pretty(c) for c in p] for p in ex.paths]


# -- unwinding

def test_cycle_loop_unwound_k_times():
    x = B.var("x", 4)
    prog = [Assign("x", B.const(0, 4)),
            Loop(B.TRUE, (cycle_marker(), Havoc("a", 4), Assign("x", B.add(x, B.var("a", 4))),
                          Assert("x_small", B.ult(x, B.const(15, 4)))), cycle=True)]
    info = UnwindInfo()
    out = unwind(prog, 2, info)
    assert not any(isinstance(s, Loop) for s in walk(out))
    assert sum(isinstance(s, Assert) for s in walk(out)) == 2
    assert info.unrolled_iterations == 2
    # the cut assumption at the very end constrains nothing and is dropped
    assert not isinstance(out[-1], Assume)


def test_long_firmware_loop_cut_at_bound():
    step = (cycle_marker(), Havoc("a", 1))
    info = UnwindInfo()
    out = unwind(counted(step, 1990, cycle=True), 16, info)
    assert info.unrolled_iterations == 16 and info.cut_loops == 1
    assert sum(isinstance(s, Havoc) for s in walk(out)) == 16


def test_nested_clock_free_loops_are_unrolled_completely():
    inner = counted([Assign("y", B.var("y", 4))], 2, name="j")
    out = unwind(counted(inner, 4, name="i"), 1)
    assert sum(1 for s in walk(out) if isinstance(s, Assign) and s.target == "y") == 8


def test_loop_cap():
    with pytest.raises(UnwindError, match=str(LOOP_CAP)):
        unwind(counted([Assign("y", B.var("y", 4))], LOOP_CAP + 1), 1)


def test_negative_bound():
    with pytest.raises(UnwindError):
        unwind([], -1)


def test_zero_bound_warns(caplog):
    prog = [Loop(B.TRUE, (cycle_marker(), Assert("a", B.TRUE)), cycle=True)]
    with caplog.at_level(logging.WARNING):
        out = unwind(prog, 0)
    assert "not checked" in caplog.text
    assert not any(isinstance(s, Assert) for s in walk(out))


def test_havoc_sites_are_unique():
    prog = [Loop(B.TRUE, (cycle_marker(), Havoc("a", 1), Havoc("b", 2)), cycle=True)]
    out = unwind(prog, 5)
    sites = [s.site for s in walk(out) if isinstance(s, Havoc)]
    assert len(sites) == 10 and len(set(sites)) == 10


def test_symbolic_cycle_loop_is_guarded():
    flag = B.var("flag", 1)
    prog = [Havoc("flag", 1),
            Loop(flag, (cycle_marker(), Havoc("flag", 1), Assert("a", B.TRUE)), cycle=True),
            Assert("after", B.TRUE)]
    info = UnwindInfo()
    out = unwind(prog, 3, info)
    assert info.cut_loops == 1
    assert any(isinstance(s, Assume) and s.label == "unwind" for s in walk(out))


# -- slicing

def test_slice_keeps_only_m():
    m = B.var("m", 8)
    prog = fragment(assertion=B.uge(m, B.const(0, 8)))
    sliced = slice_program(prog)
    targets = {s.target for s in walk(sliced) if isinstance(s, Assign)}
    assert targets == {"m"}
    assert sum(isinstance(s, If) for s in walk(sliced)) == 2


def test_slice_keeps_everything_relevant():
    prog = fragment(assertion=B.eq(B.var("m", 8), B.var("t", 8)))
    assert slice_program(prog) == prog


def test_slice_without_assertions_is_identity(caplog):
    prog = fragment()[:-1]
    with caplog.at_level(logging.WARNING):
        assert slice_program(prog) == prog
    assert "no assertions" in caplog.text


def test_slice_keeps_plain_assumes():
    prog = [Havoc("a", 4), Assume(B.ult(B.var("a", 4), B.const(3, 4))), Havoc("z", 4),
            Assert("t", B.TRUE)]
    sliced = slice_program(prog)
    assert any(isinstance(s, Assume) for s in sliced)
    assert all(not (isinstance(s, Havoc) and s.target == "z") for s in sliced)


def test_uart_slice_retains_data_path():
    job = build_job(get("uart_loopback").design(), get("uart_loopback").firmware(),
                    ScenarioConfig(unwind=16))
    kept = {s.target for s in walk(job.program) if isinstance(s, (Assign, Havoc))}
    # the transmitter, the loopback wire and the receiver all feed the data check
    assert {"uart_top.tx.sh", "uart_top.rx_i", "uart_top.rx.sh", "uart_top.rx.data"} <= kept
    st_ = slice_stats(job.unwound, job.program)
    assert st_["sliced_statements"] <= st_["original_statements"]


def random_program(rng, depth=2, n=6):
    names = ["a", "b", "c", "d"]

    def expr():
        x = B.var(rng.choice(names), 4)
        k = rng.random()
        if k < 0.3:
            return B.add(x, B.var(rng.choice(names), 4))
        if k < 0.5:
            return B.const(rng.randrange(16), 4)
        if k < 0.7:
            return B.bvxor(x, B.const(rng.randrange(16), 4))
        return x

    def cond():
        return B.ult(B.var(rng.choice(names), 4), expr())

    def block(d, size):
        out = []
        for _ in range(size):
            k = rng.random()
            if k < 0.45:
                out.append(Assign(rng.choice(names), expr()))
            elif k < 0.6:
                out.append(Havoc(rng.choice(names), 4))
            elif k < 0.7:
                out.append(Assume(cond()))
            elif k < 0.82:
                out.append(Assert(f"a{len(out)}", cond()))
            elif d > 0:
                out.append(If(cond(), tuple(block(d - 1, 2)), tuple(block(d - 1, 2))))
        return out

    prog = [Havoc(n_, 4) for n_ in names] + block(depth, n)
    return _renumber(prog)


def _renumber(stmts, counter=None):
    counter = counter if counter is not None else [0]
    out = []
    for s in stmts:
        if isinstance(s, Havoc):
            counter[0] += 1
            out.append(Havoc(s.target, s.width, s.tag, f"s{counter[0]}"))
        elif isinstance(s, If):
            out.append(If(s.cond, tuple(_renumber(s.then, counter)), tuple(_renumber(s.orelse, counter))))
        else:
            out.append(s)
    return out


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1))
def test_slicing_properties(seed):
    rng = random.Random(seed)
    prog = random_program(rng)
    once = slice_program(prog)
    assert slice_program(once) == once                      # idempotent
    assert count_stmts(once) <= count_stmts(prog)           # never grows
    full = bmc.run(prog).verdict.status
    assert bmc.run(once).verdict.status == full              # sound
    assert symex_status(once) == full


def symex_status(prog, **kw):
    return SymbolicExecutor(prog, SymexConfig(**kw)).run().status


# -- symbolic execution

@pytest.mark.parametrize("mode", ["pi", "fi"])
def test_fragment_paths(mode):
    ex = SymbolicExecutor(fragment(), SymexConfig(mode=mode, record_paths=True))
    v = ex.run()
    assert v.status == SAFE and v.stats.completed_paths == 3
    assert paths_text(ex) == [
        ["!(reset_1 == 0)", "(m_2 == 0)", "(t_2 == 0)"],
        ["(reset_1 == 0)", "(d_1 < c_1)", "(m_3 == (c_1 + d_1))"],
        ["(reset_1 == 0)", "!(d_1 < c_1)", "(t_3 == ((c_1 & 3) << d_1))"],
    ]
    if mode == "fi":
        assert v.stats.solver_instances == 1
    else:
        assert v.stats.solver_instances >= 2


def test_assert_false_is_unsafe():
    v = SymbolicExecutor([Assert("boom", B.FALSE)]).run()
    assert v.status == UNSAFE and v.trace.violated == "boom"


def test_fragment_unsafe_assertion_on_shift_branch():
    t = B.var("t", 8)
    prog = fragment(assertion=B.ne(t, B.const(12, 8)), label="t12")
    for mode in ("pi", "fi"):
        v = SymbolicExecutor(prog, SymexConfig(mode=mode)).run()
        assert v.status == UNSAFE
        # the initial values alone determine the run; t starts unconstrained
        init = v.trace.initial
        r, c, d, t0 = (init.get(n, 0) for n in ("reset", "c", "d", "t"))
        t_final = 0 if r else (t0 if d < c else ((c & 3) << d) % 256 if d < 8 else 0)
        assert t_final == 12


def test_is_feasible_examples():
    ex = SymbolicExecutor([])
    reset = B.var("reset", 8, 1)
    st_ = SymState(constraints=[B.ne(reset, B.const(0, 8))])
    assert not ex.is_feasible(st_, B.eq(reset, B.const(0, 8)))
    assert ex.is_feasible(st_, B.eq(reset, B.const(7, 8)))
    c, d = B.var("c", 8, 1), B.var("d", 8, 1)
    st2 = SymState(constraints=[B.ult(d, c)])
    assert not ex.is_feasible(st2, B.ult(c, d))
    assert not ex.is_feasible(SymState(), B.FALSE)


def test_symex_assign_versions():
    ex = SymbolicExecutor([])
    st_ = SymState()
    st_ = ex.symex_assign(st_, "m", B.add(B.var("c", 8), B.var("d", 8)))
    assert st_.version("m") == 2
    assert B.pretty(st_.constraints[-1]) == "(m_2 == (c_1 + d_1))"
    st_ = ex.symex_assign(st_, "m", B.add(B.var("m", 8), B.const(1, 8)))
    assert B.pretty(st_.constraints[-1]) == "(m_3 == (m_2 + 1))"


def test_exploration_is_deterministic():
    prog = fragment(assertion=B.ne(B.var("m", 8), B.const(200, 8)))
    a = SymbolicExecutor(prog).run()
    b = SymbolicExecutor(prog).run()
    assert a.status == b.status == UNSAFE
    assert a.trace.model == b.trace.model
    assert a.stats.branch_attempts == b.stats.branch_attempts


# -- pruning

def dead_branch_program():
    x = B.var("x", 8)
    heavy = tuple(Assign(f"y{i}", B.add(x, B.const(i, 8))) for i in range(20)) + (Assert("dead", B.FALSE),)
    return [Havoc("x", 8, site="h1"), Assume(B.ult(x, B.const(4, 8))),
            If(B.ult(B.const(10, 8), x), heavy, (Assert("live", B.ult(x, B.const(4, 8))),))]


def test_infeasible_branch_is_never_entered():
    prog = dead_branch_program()
    pruned = SymbolicExecutor(prog).run()
    full = SymbolicExecutor(prog, SymexConfig(prune=False)).run()
    assert pruned.status == full.status == SAFE
    assert pruned.stats.pruned == 1
    # the 21 statements under the dead branch are only executed without pruning
    assert full.stats.statements - pruned.stats.statements == 21
    assert full.stats.pruned == 0 and full.stats.completed_paths == 2


def test_budget_gives_unknown():
    prog = dead_branch_program()
    v = SymbolicExecutor(prog, SymexConfig(prune=False, max_branch_attempts=1)).run()
    assert v.status == UNKNOWN and v.stats.budget_exhausted


# -- monolithic encoding

def test_fragment_ssa_shape():
    ssa = encode_ssa(fragment())
    assert [v for v, _ in ssa.guards] == [1, 2]
    assert [B.pretty(c) for _, c in ssa.guards] == ["!(reset_1 == 0)", "(d_1 < c_1)"]
    assert len(ssa.equalities) == 8 and len(ssa.merges) == 4
    merged = {n for n, _, _ in ssa.merges}
    assert merged == {"m", "t"}
    final = {n: v for n, v, _ in ssa.equalities}
    assert final == {"m": 5, "t": 5}


def test_straight_line_has_no_guards():
    prog = [Assign("a", B.var("b", 4)), Assign("b", B.add(B.var("a", 4), B.const(1, 4))),
            Assert("x", B.TRUE)]
    ssa = encode_ssa(prog)
    assert ssa.guards == [] and ssa.merges == [] and len(ssa.equalities) == 2


def test_branch_only_merges_written_variables():
    m, c = B.var("m", 4), B.var("c", 4)
    prog = [If(B.ult(c, B.const(3, 4)), (Assign("m", B.const(0, 4)),), ()),
            Assert("x", B.ule(m, B.var("t", 4)))]
    ssa = encode_ssa(prog)
    assert [n for n, _, _ in ssa.merges] == ["m"]


def test_mono_fragment_verdicts():
    m = B.var("m", 8)
    assert bmc.run(fragment(assertion=B.uge(m, B.const(0, 8)))).verdict.status == SAFE
    r = bmc.run(fragment(assertion=B.ne(B.var("t", 8), B.const(12, 8))))
    assert r.verdict.status == UNSAFE and r.verdict.trace.violated == "ok"


def test_mono_dimacs():
    r = bmc.run(fragment(assertion=B.ne(B.var("m", 8), B.const(1, 8))), dump_dimacs=True)
    assert r.dimacs.startswith("p cnf")


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1))
def test_fragment_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    w = 4
    target = rng.choice(["m", "t"])
    k = rng.randrange(16)
    prog = [Havoc(n, w, site=f"h{i}") for i, n in enumerate(("reset", "c", "d", "m", "t"))]
    prog += fragment(w, B.ne(B.var(target, w), B.const(k, w)))
    want = enumerate_verdict(prog, max_bits=20).status
    assert bmc.run(prog).verdict.status == want
    assert symex_status(prog) == want
    assert symex_status(prog, mode="fi") == want


def test_encoding_grows_linearly():
    def chain(n):
        prog = []
        for i in range(n):
            x = B.var("x", 8)
            prog.append(If(B.ult(x, B.const(i, 8)), (Assign("x", B.add(x, B.const(1, 8))),),
                           (Assign("y", x),)))
        return prog + [Assert("a", B.TRUE)]

    sizes = [encode_ssa(chain(n)).size() for n in (10, 20, 40)]
    assert sizes[1] - sizes[0] == (sizes[2] - sizes[1]) // 2
