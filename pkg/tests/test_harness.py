import logging
import random

import pytest

from coverif import bitvec as B
from coverif.diagnostics import SourceError, UnsupportedConstruct
from coverif.engines import unwind
from coverif.harness import firmware as F
from coverif.harness.catalog import BENCHMARKS, benchmark_path, get
from coverif.harness.compose import CompositionError, ComposeInfo, compose, compose_statements
from coverif.harness.pipeline import ScenarioConfig, build_job, default_harness, load_design, verify
from coverif.harness.properties import lower_property, parse_property, render_statements
from coverif.harness.replay import ReplayError, enumerate_verdict, input_sites, simulate
from coverif.netlist.ir import Assert, Havoc, walk
from coverif.netlist.refsim import ReferenceSimulator
from coverif.verilog.elaborate import elaborate
from coverif.verilog.parser import parse_source


def ex1():
    return load_design([benchmark_path("ex1.v")], "top")


def uart(bug=0):
    return load_design([benchmark_path("mini_uart.v")], "uart_top", {"W": 4, "BUG": bug})


def run_fw(hw, text, k=8, inputs=()):
    prog = unwind(compose_statements(F.parse_fw_statements(text), hw), k)
    return simulate(prog, list(inputs))


# -- firmware front end

def test_parse_bundled_driver():
    fw = F.parse_firmware(benchmark_path("uart_loopback.fw").read_text(), "uart_loopback.fw")
    assert {"wb_idle", "wb_reset", "wb_write", "wb_read", "main"} <= set(fw.functions)
    assert fw.functions["wb_write"].params == [(2, "addr"), (4, "b")]
    assert fw.functions["wb_read"].ret_width == 4
    tx = next(g for g in fw.globals if g.name == "tx_b")
    assert tx.size == 2 and tx.width == 4


def test_firmware_syntax_error_has_location():
    with pytest.raises(SourceError) as exc:
        F.parse_firmware("int main() {\n  u4 x = ;\n}", "bad.fw")
    assert "bad.fw:2" in str(exc.value)


def test_missing_main():
    with pytest.raises(SourceError, match="main"):
        F.parse_firmware("void f() { step(); }").entry


def test_dotted_name_is_a_hardware_reference():
    e = F.parse_fw_expr("a.msg != 3")
    assert isinstance(e.left, F.HwRef) and e.left.name == "a.msg"


# -- composition

WB = """
void wb_write(u2 addr, u4 b) {
  set_input(adr_i, addr); set_input(dat_i, b); set_input(we_i, 1);
  set_input(cyc_i, 1); set_input(stb_i, 1);
  step();
  set_input(we_i, 0); set_input(cyc_i, 0); set_input(stb_i, 0);
}
int main() { wb_write(2, 1); return 0; }
"""


def test_pinned_inputs_are_not_havocked():
    prog = compose(F.parse_firmware(WB), uart())
    havocked = {s.target.split(".")[-1] for s in walk(prog) if isinstance(s, Havoc) and s.tag == "input"}
    assert havocked == {"rst_i", "rx_i"}


def test_assert_without_step():
    info = ComposeInfo()
    prog = compose_statements(F.parse_fw_statements("assert(1);"), ex1(), info)
    assert sum(isinstance(s, Assert) for s in walk(prog)) == 1
    assert info.steps == 0 and any("step()" in w for w in info.warnings)


def test_no_step_warning_is_logged(caplog):
    with caplog.at_level(logging.WARNING):
        compose_statements(F.parse_fw_statements("assert(hw.b == 0);"), ex1())
    assert "never calls step()" in caplog.text


@pytest.mark.parametrize("text", ["set_input(nosuch, 1); step();", "assert(hw.nosuch == 0);"])
def test_unknown_signal(text):
    with pytest.raises(CompositionError, match="nosuch"):
        compose_statements(F.parse_fw_statements(text), ex1())


def test_set_input_on_a_register_is_rejected():
    with pytest.raises(CompositionError):
        compose_statements(F.parse_fw_statements("set_input(b, 1); step();"), ex1())


def test_nondet_sites_are_counted():
    info = ComposeInfo()
    compose_statements(F.parse_fw_statements("u4 x = nondet(4); u4 y = nondet(4); assert(x != y);"),
                       ex1(), info)
    assert info.nondet_sites == 2


# -- temporal properties

@pytest.mark.parametrize("text, delay, has_now, has_later", [
    ("a", 0, True, False),
    ("a |-> b", 0, True, False),
    ("a |=> b", 1, False, True),
    ("a |-> ##2 b", 2, False, True),
    ("a |-> (b && ##1 c)", 1, True, True),
])
def test_parse_property_forms(text, delay, has_now, has_later):
    p = parse_property(text)
    assert p.delay == delay
    assert (p.consequent is not None) == has_now
    assert (p.delayed is not None) == has_later


@pytest.mark.parametrize("text", ["a |-> ##[1:3] b", "a[*2] |-> b", "$rose(a) |-> b", "a |-> eventually b",
                                  "a |-> b |-> c"])
def test_unsupported_property(text):
    with pytest.raises(UnsupportedConstruct):
        parse_property(text)


def test_lowering_shapes():
    assert render_statements(lower_property(parse_property("a |-> b"))) == "assert(!a||b);"
    text = render_statements(lower_property(parse_property("a |=> b")))
    assert text == "_Bool __trig0 = a; step(); assert(!__trig0||b);"
    text = render_statements(lower_property(parse_property("req |-> (ack && ##2 done)"), tag=3))
    assert text == "_Bool __trig3 = req; assert(!req||ack); step(); step(); assert(!__trig3||done);"


def test_property_mixing_firmware_and_hardware():
    """A delayed property whose antecedent is a firmware variable."""
    hw = ex1()
    prop = parse_property("armed |=> hw.b", label="mixed")
    main = F.parse_firmware("int main() { u1 armed = 0; set_input(a, 1); step(); armed = 1; return 0; }")
    body = main.functions["main"].body
    body[-1:-1] = lower_property(prop)
    prog = unwind(compose(main, hw), 4)
    assert simulate(prog, []).ok
    main2 = F.parse_firmware("int main() { u1 armed = 1; set_input(a, 0); step(); return 0; }")
    body = main2.functions["main"].body
    body[-1:-1] = lower_property(prop)
    r = simulate(unwind(compose(main2, hw), 4), [])
    assert r.violated == "mixed"


# -- concrete simulation

def test_ex1_two_cycles():
    text = """set_input(a, 1);
      step(); assert(hw.b == 1 && hw.e == 0 && hw.d == 0, "c1");
      step(); assert(hw.b == 1 && hw.e == 1 && hw.d == 0, "c2");"""
    r = run_fw(ex1(), text)
    assert r.ok and r.vacuous is None
    assert (r.env["top.b"], r.env["top.e"], r.env["top.d"]) == (1, 1, 0)


def test_simulate_reports_first_violation():
    r = run_fw(ex1(), 'set_input(a, 1); step(); step(); assert(hw.e == 0, "e_low"); assert(0, "never");')
    assert r.violated == "e_low"


def test_simulate_input_list_too_short():
    with pytest.raises(ReplayError):
        run_fw(ex1(), "step(); step();", inputs=[1])


def test_loopback_receives_what_was_sent():
    b = get("uart_loopback")
    job = build_job(b.design(), b.firmware(), ScenarioConfig(unwind=b.unwind, slice=False))
    assert input_sites(job.unwound) == []
    r = simulate(job.unwound, [])
    assert r.ok
    assert [r.env["fw.rx_b[0]"], r.env["fw.rx_b[1]"]] == [5, 10]


@pytest.mark.parametrize("bug, status", [(1, "Unsafe"), (2, "Unsafe")])
def test_buggy_uart_fails_concretely(bug, status):
    b = get("uart_loopback_offbyone" if bug == 1 else "uart_loopback_stuck")
    job = build_job(b.design(), b.firmware(), ScenarioConfig(unwind=b.unwind, slice=False))
    assert simulate(job.unwound, []).violated == "loopback"


def test_enumeration_oracle():
    b = get("feedback_unsafe")
    job = build_job(b.design(), b.firmware(), ScenarioConfig(unwind=3, slice=False))
    res = enumerate_verdict(job.unwound)
    assert res.status == "Unsafe" and res.violated == "a.msg != 5"
    assert simulate(job.unwound, res.witness).violated == res.violated


# -- composed program against the reference simulator

def pinned_schedule(hw, rng, cycles):
    names = [(n, n.split(".", 1)[1], w) for n, w in hw.inputs]
    sched = [{full: rng.randrange(1 << w) for full, _, w in names} for _ in range(cycles)]
    lines = []
    for cyc in sched:
        for full, short, w in names:
            lines.append(f"set_input({short}, {cyc[full]});")
        lines.append("step();")
    return sched, "\n".join(lines)


@pytest.mark.parametrize("key", ["ex1", "feedback", "uart"])
def test_composition_matches_reference_simulator(key):
    files = {"ex1": ("ex1.v", "top", {}), "feedback": ("feedback.v", "top", {}),
             "uart": ("mini_uart.v", "uart_top", {"W": 4})}
    f, top, params = files[key]
    design = elaborate(parse_source(benchmark_path(f).read_text(), f), top, params)
    hw = load_design([benchmark_path(f)], top, params)
    rng = random.Random(key)
    regs = [n for n, _ in hw.state_vars]
    for _ in range(40):
        sched, text = pinned_schedule(hw, rng, rng.randint(1, 10))
        r = run_fw(hw, text, k=16)
        rs = ReferenceSimulator(design)
        for cyc in sched:
            rs.step(cyc)
        assert rs.registers(regs) == {n: r.env[n] for n in regs}


# -- end to end

def test_verify_default_harness_on_ex1():
    out = verify(ex1(), default_harness(["e == 0"]), ScenarioConfig(unwind=3))
    assert out.verdict.status == "Unsafe"
    out = verify(ex1(), default_harness(["e == 0"]), ScenarioConfig(unwind=1))
    assert out.verdict.status == "Safe"


def test_scenario_assumption_restricts_inputs():
    out = verify(ex1(), default_harness(["e == 0"]), ScenarioConfig(unwind=4, assumptions=["a == 0"]))
    assert out.verdict.status == "Safe"


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(engine="bdd")
    with pytest.raises(ValueError):
        ScenarioConfig(mode="xx")
    with pytest.raises(ValueError):
        ScenarioConfig(unwind=-1)


def test_catalog():
    assert len(BENCHMARKS) == 12
    with pytest.raises(KeyError, match="available"):
        get("nope")
