import json
import subprocess
import sys

import pytest

from coverif.harness.catalog import benchmark_path
from coverif.harness.cli import EXIT_ERROR, EXIT_SAFE, EXIT_UNKNOWN, EXIT_UNSAFE, main

from support import GOLDEN


def cli(*args):
    return main([str(a) for a in args])


@pytest.fixture
def comb_design(tmp_path):
    p = tmp_path / "comb.v"
    p.write_text("module P(i, o); input [3:0] i; output [3:0] o; assign o = i ^ 4'hf; endmodule\n")
    return p


def test_list(capsys):
    assert cli("list") == EXIT_SAFE
    out = capsys.readouterr().out
    assert "uart_loopback" in out and "ex1_safe" in out


def test_translate_stdout_matches_golden(capsys):
    assert cli("translate", benchmark_path("ex1.v"), "--top", "top") == EXIT_SAFE
    assert capsys.readouterr().out == (GOLDEN / "ex1.c").read_text()


def test_translate_files(tmp_path):
    c, ir = tmp_path / "m.c", tmp_path / "m.json"
    assert cli("translate", "--benchmark", "feedback_safe", "--emit-c", c, "--emit-ir", ir) == EXIT_SAFE
    assert c.read_text() == (GOLDEN / "feedback.c").read_text()
    assert json.loads(ir.read_text())["top"] == "top"


def test_param_override(capsys):
    assert cli("translate", benchmark_path("mini_uart.v"), "--top", "uart_top", "--param", "W=4") == 0
    assert capsys.readouterr().out == (GOLDEN / "mini_uart_w4.c").read_text()


@pytest.mark.parametrize("engine", ["symex", "mono"])
def test_comb_design_assert_true_is_safe(comb_design, engine, capsys):
    rc = cli("verify", comb_design, "--top", "P", "--assert", "1", "--engine", engine, "--unwind", 1)
    assert rc == EXIT_SAFE
    assert capsys.readouterr().out.startswith("Safe")


def test_comb_design_violation(comb_design):
    assert cli("verify", comb_design, "--top", "P", "--assert", "o != 0", "--unwind", 1) == EXIT_UNSAFE


@pytest.mark.parametrize("args, rc", [
    (["--benchmark", "ex1_safe"], EXIT_SAFE),
    (["--benchmark", "ex1_unsafe"], EXIT_UNSAFE),
    (["--benchmark", "ex1_unsafe", "--engine", "mono"], EXIT_UNSAFE),
    (["--benchmark", "ex1_unsafe", "--mode", "fi", "--no-slice"], EXIT_UNSAFE),
    (["--benchmark", "ex1_unsafe", "--unwind", 1], EXIT_SAFE),
    (["--benchmark", "ex1_prop_unsafe"], EXIT_UNSAFE),
    (["--benchmark", "ex1_unsafe", "--assume", "a == 0"], EXIT_SAFE),
])
def test_verify_exit_codes(args, rc):
    assert cli("verify", *args) == rc


def test_budget_gives_unknown(capsys):
    rc = cli("verify", "--benchmark", "uart_nondet", "--no-prune", "--max-branch-attempts", 5)
    assert rc == EXIT_UNKNOWN
    assert capsys.readouterr().out.startswith("Unknown")


@pytest.mark.parametrize("args", [
    ["verify", "--benchmark", "nope"],
    ["verify", benchmark_path("ex1.v")],                           # no --top
    ["verify", benchmark_path("ex1.v"), "--top", "top"],           # no driver or assertion
    ["verify", benchmark_path("ex1.v"), "--top", "nosuch", "--assert", "1"],
    ["verify", "--benchmark", "ex1_safe", "--assert", "zz == 1"],
    ["verify", "--benchmark", "ex1_safe", "--engine", "bdd"],
    ["translate", "--param", "W"],
    ["verify", "--benchmark", "ex1_safe", "--property", "a |-> ##[1:2] b"],
])
def test_errors_exit_one(args, capsys):
    try:
        rc = cli(*args)
    except SystemExit as exc:          # argparse rejects the command line itself
        rc = exc.code
    assert rc == EXIT_ERROR
    assert "error" in capsys.readouterr().err


def test_trace_stats_and_replay(tmp_path, capsys):
    trace, stats = tmp_path / "t.json", tmp_path / "s.json"
    rc = cli("verify", "--benchmark", "uart_nondet_offbyone", "--trace", trace, "--stats", stats)
    assert rc == EXIT_UNSAFE
    t = json.loads(trace.read_text())
    assert t["violated_assert"] == "loopback"
    assert {"violated_assert", "cycles", "havocs", "initial"} <= set(t)
    assert all({"site", "name", "cycle", "tag", "value"} <= set(h) for h in t["havocs"])
    s = json.loads(stats.read_text())
    assert s["status"] == "Unsafe" and s["branch_attempts"] > 0 and "pruning_percent" in s
    capsys.readouterr()
    assert cli("simulate", "--benchmark", "uart_nondet_offbyone", "--trace", trace) == EXIT_UNSAFE
    assert "violated: loopback" in capsys.readouterr().out
    # the same inputs do not break the correct design
    assert cli("simulate", "--benchmark", "uart_nondet", "--trace", trace) == EXIT_SAFE


def test_mono_dimacs(tmp_path):
    cnf = tmp_path / "f.cnf"
    assert cli("verify", "--benchmark", "ex1_unsafe", "--engine", "mono", "--dump-dimacs", cnf) == EXIT_UNSAFE
    head = cnf.read_text().splitlines()[0].split()
    assert head[:2] == ["p", "cnf"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "coverif", "verify", "--benchmark", "feedback_unsafe"],
                       capture_output=True, text=True)
    assert r.returncode == EXIT_UNSAFE, r.stderr
    assert "violated: a.msg != 5" in r.stdout
