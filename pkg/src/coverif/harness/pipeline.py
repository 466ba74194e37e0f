"""End-to-end flow shared by the CLI and the tests.

    Verilog --elaborate/synthesize--> software netlist
    firmware (or a generated harness) --compose--> one IR program
    --unwind k--> acyclic program --slice (optional)--> engine
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..engines import bmc, symex
from ..engines.common import Verdict
from ..engines.slicer import slice_program
from ..engines.unwind import UnwindInfo, unwind
from ..netlist import synthesize
from ..netlist.ir import SwNetlistProgram, count_stmts
from ..verilog.elaborate import elaborate
from ..verilog.parser import parse_source
from . import firmware as F
from .compose import ComposeInfo, compose
from .properties import lower_property, parse_property

log = logging.getLogger(__name__)

ENGINES = ("symex", "mono")
MODES = ("pi", "fi")


@dataclass
class ScenarioConfig:
    unwind: int = 4
    engine: str = "symex"
    mode: str = "pi"
    slice: bool = True
    prune: bool = True
    backend: Optional[str] = None
    max_branch_attempts: Optional[int] = None
    timeout: Optional[float] = None
    dump_dimacs: bool = False
    seed: int = 0
    assumptions: list = field(default_factory=list)   # expressions over hw signals assumed every cycle

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {', '.join(ENGINES)}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.unwind < 0:
            raise ValueError("unwind bound must be non-negative")


def load_design(sources, top: str, params: dict | None = None,
                observe=()) -> SwNetlistProgram:
    """Synthesize the software netlist for ``top``.

    ``sources`` holds paths or ``(filename, text)`` pairs.
    """
    modules = []
    for src in sources:
        if isinstance(src, tuple):
            name, text = src
        else:
            name, text = str(src), Path(src).read_text()
        modules += parse_source(text, name)
    return synthesize(elaborate(modules, top, params or {}), observe)


def default_harness(asserts=(), properties=()) -> F.FirmwareProgram:
    """``while (1) { step(); assert...; }`` over hardware signals."""
    loc = F.Loc("<harness>", 1, 1)
    body: list = [F.ExprStmt(F.Call("step", [], loc), loc)]
    for i, text in enumerate(asserts):
        body.append(F.ExprStmt(F.Call("assert", [F.parse_fw_expr(text, "<assert>"),
                                                 F.Str(text, loc)], loc), loc))
    for i, text in enumerate(properties):
        body += lower_property(parse_property(text, label=text), tag=i)
    main = F.Function("main", 32, [], [F.WhileStmt(F.Num(1), body, loc)], loc)
    return F.FirmwareProgram(functions={"main": main}, filename="<harness>")


def load_firmware(path_or_text, filename: str | None = None) -> F.FirmwareProgram:
    if isinstance(path_or_text, Path) or (filename is None and Path(str(path_or_text)).exists()):
        p = Path(path_or_text)
        return F.parse_firmware(p.read_text(), str(p))
    return F.parse_firmware(str(path_or_text), filename or "<firmware>")


@dataclass
class Job:
    """A composed, unwound (and possibly sliced) verification problem."""
    hw: SwNetlistProgram
    composed: list
    unwound: list
    program: list                 # what the engine runs (sliced or not)
    config: ScenarioConfig
    compose_info: ComposeInfo
    unwind_info: UnwindInfo

    def sizes(self) -> dict:
        return {"composed": count_stmts(self.composed), "unwound": count_stmts(self.unwound),
                "engine_input": count_stmts(self.program)}


def build_job(hw: SwNetlistProgram, fw: F.FirmwareProgram, config: ScenarioConfig) -> Job:
    info = ComposeInfo()
    scenario = [F.parse_fw_expr(t, "<scenario>") for t in config.assumptions]
    composed = compose(fw, hw, info, scenario)
    uinfo = UnwindInfo()
    unwound = unwind(composed, config.unwind, uinfo)
    program = slice_program(unwound) if config.slice else unwound
    return Job(hw, composed, unwound, program, config, info, uinfo)


@dataclass
class Outcome:
    verdict: Verdict
    job: Job
    dimacs: Optional[str] = None
    time: float = 0.0

    def stats_json(self) -> dict:
        d = self.verdict.stats.to_json()
        d.update(engine=self.verdict.engine, status=self.verdict.status,
                 unwind=self.job.config.unwind, sliced=self.job.config.slice, **self.job.sizes())
        return d


def run_job(job: Job) -> Outcome:
    cfg = job.config
    t0 = time.perf_counter()
    dimacs = None
    if cfg.engine == "symex":
        verdict = symex.run(job.program, symex.SymexConfig(
            mode=cfg.mode, prune=cfg.prune, backend=cfg.backend,
            max_branch_attempts=cfg.max_branch_attempts, timeout=cfg.timeout))
    else:
        res = bmc.run(job.program, cfg.backend, cfg.timeout, cfg.dump_dimacs)
        verdict, dimacs = res.verdict, res.dimacs
    return Outcome(verdict, job, dimacs, time.perf_counter() - t0)


def verify(hw: SwNetlistProgram, fw: F.FirmwareProgram, config: ScenarioConfig) -> Outcome:
    return run_job(build_job(hw, fw, config))

