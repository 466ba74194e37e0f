"""Verification engines over unwound IR programs."""

from .common import SAFE, UNKNOWN, UNSAFE, EngineError, ExplorationStats, HavocValue, Trace, Verdict
from .slicer import slice_program
from .unwind import UnwindError, UnwindInfo, unwind

__all__ = [
    "SAFE", "UNKNOWN", "UNSAFE", "EngineError", "ExplorationStats", "HavocValue", "Trace",
    "Verdict", "slice_program", "UnwindError", "UnwindInfo", "unwind",
]
