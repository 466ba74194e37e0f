"""Bundled benchmarks."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from ..netlist.ir import SwNetlistProgram
from . import firmware as F
from .pipeline import default_harness, load_design

_DIR = resources.files("coverif.harness") / "benchmarks"


def benchmark_path(name: str) -> Path:
    return Path(str(_DIR / name))


@dataclass
class Benchmark:
    name: str
    verilog: list
    top: str
    params: dict = field(default_factory=dict)
    fw: Optional[str] = None            # bundled firmware file
    asserts: list = field(default_factory=list)
    properties: list = field(default_factory=list)
    unwind: int = 4
    expect: Optional[str] = None        # verdict at the default bound
    description: str = ""

    def design(self) -> SwNetlistProgram:
        return load_design([benchmark_path(v) for v in self.verilog], self.top, self.params)

    def firmware(self) -> F.FirmwareProgram:
        if self.fw is None:
            return default_harness(self.asserts, self.properties)
        p = benchmark_path(self.fw)
        return F.parse_firmware(p.read_text(), self.fw)


def _uart(name, fw, bug, expect, desc):
    return Benchmark(name, ["mini_uart.v"], "uart_top", {"W": 4, "BUG": bug}, fw=fw,
                     unwind=16, expect=expect, description=desc)


BENCHMARKS = {b.name: b for b in [
    Benchmark("ex1_safe", ["ex1.v"], "top", asserts=["!e || b"], expect="Safe",
              description="registers b,d,e: e is only set while b is set"),
    Benchmark("ex1_unsafe", ["ex1.v"], "top", asserts=["e == 0"], expect="Unsafe",
              description="e becomes 1 after input a is held for two cycles"),
    Benchmark("ex1_prop_safe", ["ex1.v"], "top", properties=["a |-> b"], expect="Safe",
              description="b captures a at every edge"),
    Benchmark("ex1_prop_unsafe", ["ex1.v"], "top", properties=["a |=> b"], expect="Unsafe",
              description="one-cycle delayed version of ex1_prop_safe does not hold"),
    Benchmark("feedback_safe", ["feedback.v"], "top", asserts=["a.msg != 3"], expect="Safe",
              description="combinational exchange between instances a and b; q is 0, 2 or 5"),
    Benchmark("feedback_unsafe", ["feedback.v"], "top", asserts=["a.msg != 5"], expect="Unsafe",
              description="q becomes 5 when x is low"),
    _uart("uart_loopback", "uart_loopback.fw", 0, "Safe",
          "deterministic loopback driver, correct UART"),
    _uart("uart_loopback_offbyone", "uart_loopback.fw", 1, "Unsafe",
          "receiver counts one data bit too few"),
    _uart("uart_loopback_stuck", "uart_loopback.fw", 2, "Unsafe",
          "reading the receive register never acknowledges the word"),
    _uart("uart_nondet", "uart_loopback_nondet.fw", 0, "Safe",
          "loopback with two nondeterministic 4-bit words"),
    _uart("uart_nondet_offbyone", "uart_loopback_nondet.fw", 1, "Unsafe",
          "nondeterministic data, off-by-one receiver"),
    _uart("uart_nondet_stuck", "uart_loopback_nondet.fw", 2, "Unsafe",
          "nondeterministic data, stuck acknowledge"),
]}


def get(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(BENCHMARKS)}") from None
