"""Command line interface.

    coverif translate design.v --top T [--emit-c out.c] [--emit-ir out.json]
    coverif verify design.v --top T [--fw driver.fw | --assert EXPR | --property P]
                   [--engine symex|mono] [--mode pi|fi] [--unwind K] ...
    coverif simulate design.v --top T [--fw ...] --unwind K --trace trace.json
    coverif list

Exit codes: 0 Safe (or no violation on replay), 10 Unsafe (or violation
confirmed), 1 usage or engine error, 2 Unknown (budget exhausted).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..diagnostics import SourceError
from ..engines.common import SAFE, UNSAFE, EngineError, Trace
from ..engines.unwind import UnwindError
from ..netlist.emit_c import emit_c
from ..netlist.irjson import dumps
from ..netlist.synth import SynthesisError
from ..sat.errors import SolverError
from ..verilog.elaborate import ElaborationError
from . import catalog
from .pipeline import ScenarioConfig, build_job, default_harness, load_design, load_firmware, run_job
from .replay import ReplayError, simulate

EXIT_SAFE = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2
EXIT_UNSAFE = 10

log = logging.getLogger("coverif")


def _param(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    try:
        return name.strip(), int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value {value!r} is not an integer") from None


def _design_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("verilog", nargs="*", type=Path, help="Verilog source files")
    p.add_argument("--top", help="top module")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE",
                   help="override a top-level parameter")
    p.add_argument("--benchmark", help="use a bundled benchmark instead of source files")


def _harness_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fw", type=Path, help="firmware driver (.fw)")
    p.add_argument("--assert", dest="asserts", action="append", default=[], metavar="EXPR",
                   help="assertion over hardware signals checked after every step")
    p.add_argument("--property", dest="properties", action="append", default=[], metavar="P",
                   help="temporal property, e.g. 'ack |-> (valid && ##2 empty==0)'")
    p.add_argument("--assume", dest="assumptions", action="append", default=[], metavar="EXPR",
                   help="scenario assumption over hardware signals, assumed after every step")
    p.add_argument("--unwind", type=int, default=None, help="unwind bound k (default 4)")
    p.add_argument("--slice", dest="slice", action="store_true", default=True,
                   help="slice the program before verification (default)")
    p.add_argument("--no-slice", dest="slice", action="store_false")


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is the Unknown verdict here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="coverif", description="Bounded hardware/firmware co-verification")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    t = sub.add_parser("translate", help="synthesize the software netlist")
    _design_args(t)
    t.add_argument("--emit-c", type=Path, help="write the C model here ('-' for stdout)")
    t.add_argument("--emit-ir", type=Path, help="write the IR as JSON here ('-' for stdout)")

    v = sub.add_parser("verify", help="verify a design with a driver or assertions")
    _design_args(v)
    _harness_args(v)
    v.add_argument("--engine", choices=("symex", "mono"), default="symex")
    v.add_argument("--mode", choices=("pi", "fi"), default="pi",
                   help="incremental solving mode of the symex engine")
    v.add_argument("--no-prune", dest="prune", action="store_false", default=True,
                   help="disable infeasibility pruning (ablation)")
    v.add_argument("--max-branch-attempts", type=int, default=None,
                   help="stop with Unknown after this many branch attempts")
    v.add_argument("--backend", choices=("cython", "python"), default=None, help="SAT core")
    v.add_argument("--stats", type=Path, help="write statistics JSON")
    v.add_argument("--trace", type=Path, help="write the counterexample trace JSON")
    v.add_argument("--dump-dimacs", type=Path, help="write the monolithic CNF (mono engine)")

    s = sub.add_parser("simulate", help="replay a trace on the concrete model")
    _design_args(s)
    _harness_args(s)
    s.add_argument("--trace", type=Path, required=True, help="trace JSON from verify")

    sub.add_parser("list", help="list bundled benchmarks")
    return ap


def _design(args):
    if args.benchmark:
        b = catalog.get(args.benchmark)
        params = dict(b.params)
        params.update(dict(args.param))
        hw = load_design([catalog.benchmark_path(v) for v in b.verilog], b.top, params)
        return hw, b
    if not args.verilog:
        raise _Usage("no Verilog sources given (or use --benchmark)")
    if not args.top:
        raise _Usage("--top is required")
    return load_design(args.verilog, args.top, dict(args.param)), None


def _firmware(args, bench):
    if args.fw:
        return load_firmware(args.fw)
    if args.asserts or args.properties:
        return default_harness(args.asserts, args.properties)
    if bench is not None:
        return bench.firmware()
    raise _Usage("give a driver with --fw, or --assert / --property")


class _Usage(Exception):
    pass


def _config(args, bench, **extra) -> ScenarioConfig:
    k = args.unwind if args.unwind is not None else (bench.unwind if bench else 4)
    return ScenarioConfig(unwind=k, slice=args.slice, assumptions=list(args.assumptions), **extra)


def cmd_translate(args) -> int:
    hw, _ = _design(args)
    wrote = False
    for path, text in ((args.emit_c, lambda: emit_c(hw)), (args.emit_ir, lambda: dumps(hw))):
        if path is None:
            continue
        wrote = True
        if str(path) == "-":
            sys.stdout.write(text())
        else:
            path.write_text(text())
    if not wrote:
        sys.stdout.write(emit_c(hw))
    return EXIT_SAFE


def cmd_verify(args) -> int:
    hw, bench = _design(args)
    fw = _firmware(args, bench)
    cfg = _config(args, bench, engine=args.engine, mode=args.mode, prune=args.prune,
                  backend=args.backend, max_branch_attempts=args.max_branch_attempts,
                  dump_dimacs=args.dump_dimacs is not None)
    out = run_job(build_job(hw, fw, cfg))
    v = out.verdict
    s = v.stats
    print(f"{v.status} ({v.engine}, unwind {cfg.unwind})")
    print(f"  branch attempts {s.branch_attempts}, pruned {s.pruned} ({s.pruning_percent:.2f}%), "
          f"paths {s.completed_paths}, solver calls {s.solver_calls}, time {out.time:.3f}s")
    if v.trace is not None:
        print(f"  violated: {v.trace.violated}")
    if args.stats:
        args.stats.write_text(json.dumps(out.stats_json(), indent=2, sort_keys=True))
    if args.trace and v.trace is not None:
        args.trace.write_text(json.dumps(v.trace.to_json(), indent=2))
    if args.dump_dimacs:
        if out.dimacs is None:
            log.warning("no CNF to dump: DIMACS output is produced by the mono engine")
        else:
            args.dump_dimacs.write_text(out.dimacs)
    if v.status == SAFE:
        return EXIT_SAFE
    if v.status == UNSAFE:
        return EXIT_UNSAFE
    return EXIT_UNKNOWN


def cmd_simulate(args) -> int:
    hw, bench = _design(args)
    fw = _firmware(args, bench)
    cfg = _config(args, bench, engine="symex")
    cfg.slice = False
    job = build_job(hw, fw, cfg)
    trace = Trace.from_json(json.loads(args.trace.read_text()))
    res = simulate(job.unwound, trace)
    if res.defaulted:
        print(f"  {len(res.defaulted)} havoc sites without a value in the trace were set to 0")
    if res.violated is not None:
        same = "" if res.violated == trace.violated else f" (trace names {trace.violated})"
        print(f"violated: {res.violated}{same}")
        return EXIT_UNSAFE
    if res.vacuous is not None:
        print(f"vacuous: assumption {res.vacuous} failed before any assertion")
        return EXIT_ERROR
    print("no assertion violated")
    return EXIT_SAFE


def cmd_list(_args) -> int:
    for b in catalog.BENCHMARKS.values():
        print(f"{b.name:24} expect {b.expect or '?':7} k={b.unwind:<3} {b.description}")
    return EXIT_SAFE


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    handlers = {"translate": cmd_translate, "verify": cmd_verify,
                "simulate": cmd_simulate, "list": cmd_list}
    try:
        return handlers[args.command](args)
    except _Usage as exc:
        ap.print_usage(sys.stderr)
        print(f"coverif: error: {exc}", file=sys.stderr)
    except (SourceError, ElaborationError, SynthesisError, UnwindError, ReplayError,
            EngineError, SolverError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"coverif: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def run_cli(argv) -> int:
    return main(list(argv))


if __name__ == "__main__":
    sys.exit(main())
