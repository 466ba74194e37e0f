"""Acceptance gate: one check per criterion, each printed as a PASS/FAIL line.

Run under pytest (the lines appear in the terminal summary) or directly:

    python tests/test_acceptance.py

Each criterion is computed once and cached, so the pytest tests and the
summary share the work.
"""

from __future__ import annotations

import random
import re
import sys
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest  # noqa: E402

from coverif import bitvec as B  # noqa: E402
from coverif.bitvec.expr import mask  # noqa: E402
from coverif.bitvec.lower import (  # noqa: E402
    lower_bit_assign, lower_concat, lower_dynamic_bit_assign, lower_dynamic_select,
    lower_indexed_part_select, lower_part_select,
)
from coverif.engines.bmc import encode_ssa  # noqa: E402
from coverif.engines.symex import SymbolicExecutor, SymexConfig  # noqa: E402
from coverif.harness.catalog import BENCHMARKS, benchmark_path  # noqa: E402
from coverif.harness.pipeline import ScenarioConfig, build_job, run_job  # noqa: E402
from coverif.harness.replay import enumerate_verdict, nondet_bits, simulate  # noqa: E402
from coverif.netlist import synthesize  # noqa: E402
from coverif.netlist.emit_c import emit_c  # noqa: E402
from coverif.netlist.ir import count_stmts  # noqa: E402
from coverif.sat import CnfInstance  # noqa: E402
from coverif.verilog.elaborate import elaborate  # noqa: E402
from coverif.verilog.parser import parse_source  # noqa: E402

from support import (  # noqa: E402
    ExprGen, GOLDEN, fragment, random_vars, ref_bit_assign, ref_concat, ref_part_select,
    satisfiable_by_enumeration,
)

# pinned tolerances
LOWERING_CASES = 10_000
SOLVER_CASES = 10_000
PRUNING_MIN = 90.0
PRUNING_MEASURED = 100.0          # first measurement on the bundled driver, 465 of 465 branches
UART_BOUND = 16
MAX_EQUALITIES = 12
SUITE_BUDGET_S = 600


@dataclass
class Result:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


_results: dict = {}


def criterion(name):
    def wrap(fn):
        def run() -> Result:
            if name not in _results:
                t0 = time.perf_counter()
                ok, detail = fn()
                _results[name] = Result(name, ok, detail, time.perf_counter() - t0)
            return _results[name]
        run.criterion = name
        return run
    return wrap


def summary_lines() -> list:
    return [r.line() for r in _results.values()]


# ---------------------------------------------------------------- shared benchmark matrix

ENGINES = [("symex", "pi"), ("symex", "fi"), ("mono", "pi")]


@lru_cache(maxsize=None)
def matrix() -> dict:
    """(benchmark, engine, mode, sliced) -> (status, replay label or None, trace label, sizes)."""
    out = {}
    for name, b in sorted(BENCHMARKS.items()):
        hw, fw = b.design(), b.firmware()
        for sliced in (True, False):
            job = None
            for engine, mode in ENGINES:
                cfg = ScenarioConfig(unwind=b.unwind, engine=engine, mode=mode, slice=sliced)
                job = build_job(hw, fw, cfg)
                v = run_job(job).verdict
                replayed = None
                if v.unsafe:
                    r = simulate(job.unwound, v.trace, strict=True)
                    replayed = r.violated if r.vacuous is None else None
                out[name, engine, mode, sliced] = (v.status, replayed, v.trace.violated if v.trace else None,
                                                   (count_stmts(job.unwound), count_stmts(job.program)))
    return out


# ---------------------------------------------------------------- criteria

@criterion("1 cross-validation")
def crit_cross_validation():
    m = matrix()
    checked, bad = 0, []
    for name, b in sorted(BENCHMARKS.items()):
        if b.unwind > 4:
            continue
        job = build_job(b.design(), b.firmware(), ScenarioConfig(unwind=b.unwind, slice=False))
        if nondet_bits(job.unwound) > 16:
            continue
        enum = enumerate_verdict(job.unwound).status
        verdicts = {m[name, e, md, s][0] for e, md in ENGINES for s in (True, False)}
        checked += 1
        if verdicts != {enum}:
            bad.append(f"{name}: engines {sorted(verdicts)} vs enumeration {enum}")
    ok = checked > 0 and not bad
    return ok, f"{checked} benchmarks, symex-pi/symex-fi/mono/enumeration agree" if ok else "; ".join(bad)


def _design(f, top):
    return elaborate(parse_source(benchmark_path(f).read_text(), f), top)


@criterion("2 translation goldens")
def crit_translation():
    problems = []
    text = emit_c(synthesize(_design("ex1.v", "top")))
    struct = text.split("struct state_elements_top {")[1].split("};")[0]
    if re.findall(r"_Bool (\w+);", struct) != ["b", "d", "e"]:
        problems.append("state struct members")
    if sum(f"_Bool {r}_old = u1.{r};" in text for r in "bde") != 3:
        problems.append("shadow captures")
    if "c = (e_old ? 0 : d_old);" not in text:
        problems.append("ite for c")
    if text != (GOLDEN / "ex1.c").read_text():
        problems.append("ex1.c golden")
    hw = synthesize(_design("feedback.v", "top"))
    got = {frozenset((t, v.params[0])) for g in hw.comb_groups for t, v in g.equalities}
    want = {frozenset(p) for p in [
        ("top.a.foo", "top.a.x"), ("top.a.y", "top.a.bar"), ("top.a.x", "top.x"),
        ("top.a.foo", "top.foo"), ("top.a.bar", "top.bar"), ("top.a.y", "top.y"),
        ("top.b.bar", "top.b.foo"), ("top.b.foo", "top.foo"), ("top.b.bar", "top.bar"),
        ("top.msg", "top.a.msg"), ("top.a.q", "top.a.msg")]}
    if got != want:
        problems.append(f"feedback equalities differ: {sorted(map(sorted, got ^ want))}")
    comb = emit_c(hw).split("void top_comb")[1].split("\n}\n")[0]
    if comb.count("assume(") != 1:
        problems.append("feedback assume is not a single conjunction")
    return not problems, "ex1 struct/shadows/ite and 11 feedback equalities match" if not problems \
        else "; ".join(problems)


def _lowering_cases(rng: random.Random):
    """Yield (rule, got, want) for every rule."""
    ev = B.evaluate_by_name
    for _ in range(LOWERING_CASES):
        w = rng.randint(1, 32)
        lo = rng.randrange(w)
        hi = rng.randint(lo, w - 1)
        rw = rng.randint(hi - lo + 1, 40)
        old, rhs = rng.randrange(1 << w), rng.randrange(1 << rw)
        e = lower_bit_assign(B.var("o", w), hi, lo, B.var("r", rw))
        yield "bit-assign", ev(e, {"o": old, "r": rhs}), ref_bit_assign(old, w, hi, lo, rhs, rw)
    for _ in range(LOWERING_CASES):
        w = rng.randint(1, 32)
        lo = rng.randrange(w)
        hi = rng.randint(lo, w - 1)
        v = rng.randrange(1 << w)
        yield "part-select", ev(lower_part_select(B.var("x", w), hi, lo), {"x": v}), \
            ref_part_select(v, w, lo, hi - lo + 1)
    for _ in range(LOWERING_CASES):
        w = rng.randint(1, 32)
        lo = rng.randrange(w)
        width = rng.randint(1, w - lo)
        v = rng.randrange(1 << w)
        e = lower_indexed_part_select(B.var("x", w), B.const(lo, 8), width)
        yield "indexed-part-select", ev(e, {"x": v}), ref_part_select(v, w, lo, width)
    for _ in range(LOWERING_CASES):
        ops, slices, env = [], [], {}
        for k in range(rng.randint(1, 4)):
            w = rng.randint(1, 16)
            lo = rng.randrange(w)
            hi = rng.randint(lo, w - 1)
            v = rng.randrange(1 << w)
            env[f"x{k}"] = v
            ops.append((B.var(f"x{k}", w), hi, lo))
            slices.append((v, w, hi, lo))
        yield "concat", ev(lower_concat(ops), env), ref_concat(slices)
    for _ in range(LOWERING_CASES):
        w = rng.randint(1, 16)
        v, idx, bit = rng.randrange(1 << w), rng.randrange(24), rng.randrange(2)
        x, i = B.var("x", w), B.var("i", 5)
        yield "dynamic-select", ev(lower_dynamic_select(x, i), {"x": v, "i": idx}), \
            (v >> idx) & 1 if idx < w else 0
        want = v if idx >= w else (v & ~(1 << idx)) | (bit << idx)
        yield "dynamic-bit-assign", ev(lower_dynamic_bit_assign(x, i, B.var("b", 1)),
                                        {"x": v, "i": idx, "b": bit}), want


def _figure_patterns() -> list:
    bad = []
    out1, in1, in2 = B.var("out1", 8), B.var("in1", 8), B.var("in2", 8)
    e = lower_bit_assign(out1, 7, 5, lower_part_select(in1, 4, 2))
    if B.pretty(e, versions=False) != "((out1 & 0x1f) | (((in1 & 0x1c) >> 2) << 5))":
        bad.append("bit-select/part-select pattern")
    e = lower_concat([(in2, 5, 2), (in1, 6, 1)])
    if B.pretty(e, versions=False) != "((zext10(((in2 >> 2) & 0xf)) << 6) | zext10(((in1 >> 1) & 0x3f)))":
        bad.append("concatenation pattern")
    src = B.var("in", 32)
    for i in range(4):
        if lower_indexed_part_select(src, B.mul(B.const(8, 32), B.const(i, 32)), 8) != \
                B.extract(src, 8 * i + 7, 8 * i):
            bad.append("indexed part-select pattern")
            break
    return bad


@criterion("3 bit-lowering equivalence")
def crit_lowering():
    counts: dict = {}
    bad: dict = {}
    for rule, got, want in _lowering_cases(random.Random(20240601)):
        counts[rule] = counts.get(rule, 0) + 1
        if got != want:
            bad[rule] = bad.get(rule, 0) + 1
    fig = _figure_patterns()
    ok = not bad and not fig and all(n >= LOWERING_CASES for n in counts.values())
    detail = f"{len(counts)} rules x {LOWERING_CASES} cases, 3 literal patterns exact"
    if not ok:
        detail = f"mismatches {bad}, pattern failures {fig}"
    return ok, detail


def _normalize(texts: list) -> list:
    """Renumber the versions of every variable in order of first appearance."""
    seen: dict = {}

    def sub(m):
        key = (m.group(1), m.group(2))
        if key not in seen:
            seen[key] = sum(1 for k in seen if k[0] == m.group(1)) + 1
        return f"{m.group(1)}_{seen[key]}"
    return [re.sub(r"([A-Za-z]\w*?)_(\d+)\b", sub, t) for t in texts]


def _equivalent(a: list, b: list) -> bool:
    inst = CnfInstance()
    return not inst.check([B.bvxor(B.land(*a), B.land(*b))]).sat


@criterion("4 monolithic encoding shape")
def crit_monolithic():
    problems = []
    ssa = encode_ssa(fragment())
    if len(ssa.guards) != 2:
        problems.append(f"{len(ssa.guards)} guards")
    if len(ssa.equalities) > MAX_EQUALITIES:
        problems.append(f"{len(ssa.equalities)} equalities")
    merged = sorted(n for n, _, e in ssa.merges if e.op == "ite")
    if merged != ["m", "m", "t", "t"]:
        problems.append(f"merges {merged}")
    g1 = B.pretty(ssa.guards[0][1])
    if g1 != "!(reset_1 == 0)":
        problems.append(f"guard1 = {g1}")
    outer = {n: B.pretty(e) for n, v, e in ssa.merges[-2:]}
    if not (outer.get("m", "").startswith("(guard_1 ?") and outer.get("t", "").startswith("(guard_1 ?")):
        problems.append(f"outer merges {outer}")
    ex = SymbolicExecutor(fragment(), SymexConfig(record_paths=True))
    if not ex.run().safe:
        problems.append("fragment not Safe")
    w = 8
    reset, c, d = B.var("reset", w, 1), B.var("c", w, 1), B.var("d", w, 1)
    zero = B.const(0, w)
    # the constraints as written in the reference column
    reference = [
        [B.ne(reset, zero), B.eq(B.var("m", w, 2), zero), B.eq(B.var("t", w, 2), zero)],
        [B.eq(reset, zero), B.bvnot(B.uge(d, c)), B.eq(B.var("m", w, 3), B.add(c, d))],
        [B.eq(reset, zero), B.uge(d, c), B.eq(B.var("t", w, 3), B.shl(B.bvand(c, B.const(3, w)), d))],
    ]
    if len(ex.paths) != 3:
        problems.append(f"{len(ex.paths)} paths")
    else:
        for i, (ours, ref) in enumerate(zip(ex.paths, reference), 1):
            a = _normalize([B.pretty(x) for x in ours])
            b = _normalize([B.pretty(x) for x in ref])
            if [set(re.findall(r"[a-z]+_\d+", x)) for x in a] != [set(re.findall(r"[a-z]+_\d+", x)) for x in b]:
                problems.append(f"C{i} variables differ")
            elif not _equivalent(list(ours), ref):
                problems.append(f"C{i} not equivalent")
    return not problems, (f"{len(ssa.guards)} guards, ite merges for m and t, {len(ssa.equalities)} "
                          f"equalities (<= {MAX_EQUALITIES}); C1-C3 match") if not problems \
        else "; ".join(problems)


@criterion("5 pruning effect")
def crit_pruning():
    b = BENCHMARKS["uart_loopback"]
    hw, fw = b.design(), b.firmware()
    pruned = run_job(build_job(hw, fw, ScenarioConfig(unwind=UART_BOUND))).verdict
    s = pruned.stats
    # without pruning the deterministic driver forks at every branch; a budget of
    # twice the pruned-mode attempts is enough to show the difference
    limit = 2 * s.branch_attempts
    full = run_job(build_job(hw, fw, ScenarioConfig(unwind=UART_BOUND, mode="fi", prune=False,
                                                    max_branch_attempts=limit))).verdict
    ok = (pruned.safe and s.pruning_percent >= PRUNING_MIN and s.pruning_percent == PRUNING_MEASURED
          and full.stats.branch_attempts > s.branch_attempts)
    return ok, (f"pruned {s.pruned}/{s.branch_attempts} = {s.pruning_percent:.2f}% (>= {PRUNING_MIN}); "
                f"no-prune reached {full.stats.branch_attempts} attempts ({full.status})")


@criterion("6 trace replay")
def crit_replay():
    m = matrix()
    unsafe = [(k, v) for k, v in m.items() if v[0] == "Unsafe"]
    confirmed = [k for k, v in unsafe if v[1] is not None and v[1] == v[2]]
    ok = bool(unsafe) and len(confirmed) == len(unsafe)
    return ok, f"{len(confirmed)}/{len(unsafe)} Unsafe verdicts confirmed by simulate"


@criterion("7 slicing soundness")
def crit_slicing():
    m = matrix()
    bad = []
    for name in sorted(BENCHMARKS):
        for e, md in ENGINES:
            on, off = m[name, e, md, True], m[name, e, md, False]
            if on[0] != off[0]:
                bad.append(f"{name}/{e}-{md}: {on[0]} vs {off[0]}")
            if on[3][1] > on[3][0]:
                bad.append(f"{name}: slice grew")
    total = sum(m[n, "symex", "pi", True][3][0] for n in BENCHMARKS)
    kept = sum(m[n, "symex", "pi", True][3][1] for n in BENCHMARKS)
    return not bad, (f"{len(BENCHMARKS)} benchmarks x {len(ENGINES)} engines identical; "
                     f"{kept}/{total} statements kept") if not bad else "; ".join(bad)


@criterion("8 solver soundness")
def crit_solver():
    rng = random.Random(7)
    wrong = unsound_models = sats = 0
    for i in range(SOLVER_CASES):
        variables = random_vars(rng, 3, 6)
        gen = ExprGen(rng, variables, 6)
        e = gen.bool(4) if i % 2 else B.land(gen.bool(3), gen.bool(3))
        inst = CnfInstance()
        for n, w in variables:
            inst.bits(B.var(n, w))
        r = inst.check([e])
        if r.sat != satisfiable_by_enumeration(e, variables):
            wrong += 1
        if r.sat:
            sats += 1
            env = {n: r.model.get((n, 0), 0) & mask(w) for n, w in variables}
            if B.evaluate_by_name(e, env) != 1:
                unsound_models += 1
    ok = wrong == 0 and unsound_models == 0
    return ok, (f"{SOLVER_CASES} formulas ({sats} sat, {SOLVER_CASES - sats} unsat); "
                f"{wrong} verdict mismatches, {unsound_models} bad models")


CRITERIA = [crit_cross_validation, crit_translation, crit_lowering, crit_monolithic,
            crit_pruning, crit_replay, crit_slicing, crit_solver]


@pytest.mark.parametrize("check", CRITERIA, ids=[c.criterion for c in CRITERIA])
def test_criterion(check):
    r = check()
    print(r.line())
    assert r.ok, r.detail


def main() -> int:
    t0 = time.perf_counter()
    for c in CRITERIA:
        print(c().line(), flush=True)
    print(f"total {time.perf_counter() - t0:.1f}s (suite budget {SUITE_BUDGET_S}s)")
    return 0 if all(r.ok for r in _results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
