"""Software netlist: intermediate representation and synthesis from Verilog."""

from .ir import (
    CYCLE_VAR, Assert, Assign, Assume, CombGroup, Havoc, If, Loop, SwNetlistProgram,
    collect_widths, count_stmts, cycle_marker, defined_vars, is_cycle_marker, walk,
)
from .synth import CombDepGraph, SynthesisError, build_comb_graph, shadow_name, synthesize

__all__ = [
    "CYCLE_VAR", "Assert", "Assign", "Assume", "CombGroup", "Havoc", "If", "Loop",
    "SwNetlistProgram", "collect_widths", "count_stmts", "cycle_marker", "defined_vars",
    "is_cycle_marker", "walk", "CombDepGraph", "SynthesisError", "build_comb_graph",
    "shadow_name", "synthesize",
]
