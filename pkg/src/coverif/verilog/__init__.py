"""Verilog subset front end: lexing, parsing, pretty-printing, elaboration."""

from . import ast
from .elaborate import ElaboratedDesign, ElaborationError, InstanceNode, Signal, elaborate
from .parser import parse_files, parse_source
from .printer import module_str, source_str

__all__ = ["ast", "ElaboratedDesign", "ElaborationError", "InstanceNode", "Signal",
           "elaborate", "parse_files", "parse_source", "module_str", "source_str"]
