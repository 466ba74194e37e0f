"""Results shared by both engines: verdicts, statistics and traces."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from ..netlist.ir import CYCLE_VAR

SAFE = "Safe"
UNSAFE = "Unsafe"
UNKNOWN = "Unknown"


class EngineError(RuntimeError):
    """The engine could not reach a verdict (solver failure or limit)."""


@dataclass
class HavocValue:
    site: str
    name: str
    cycle: int
    tag: str
    value: int


@dataclass
class Trace:
    """Counterexample: the value of every havoc along the failing path."""
    violated: str
    havocs: list = field(default_factory=list)       # [HavocValue]
    initial: dict = field(default_factory=dict)      # free initial values by name
    model: dict = field(default_factory=dict)        # "name#version" -> value

    def site_values(self) -> dict:
        return {h.site: h.value for h in self.havocs}

    def cycles(self) -> list:
        """Havocked primary inputs and nondet values grouped by clock cycle."""
        n = max([h.cycle for h in self.havocs], default=0)
        out = [{"cycle": i, "inputs": {}} for i in range(n + 1)]
        for h in self.havocs:
            if h.tag != "comb":
                out[h.cycle]["inputs"][h.name] = h.value
        return out

    def to_json(self) -> dict:
        return {
            "violated_assert": self.violated,
            "cycles": self.cycles(),
            "havocs": [asdict(h) for h in self.havocs],
            "initial": dict(self.initial),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Trace":
        return cls(d["violated_assert"], [HavocValue(**h) for h in d.get("havocs", [])],
                   dict(d.get("initial", {})))


@dataclass
class ExplorationStats:
    branch_attempts: int = 0
    pruned: int = 0
    completed_paths: int = 0
    solver_calls: int = 0
    solver_instances: int = 0
    solve_time: float = 0.0
    total_time: float = 0.0
    statements: int = 0
    max_depth: int = 0
    encode_size: int = 0
    budget_exhausted: bool = False

    @property
    def pruning_percent(self) -> float:
        if not self.branch_attempts:
            return 0.0
        return round(100.0 * self.pruned / self.branch_attempts, 2)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pruning_percent"] = self.pruning_percent
        d["solve_time"] = round(self.solve_time, 6)
        d["total_time"] = round(self.total_time, 6)
        return d


@dataclass
class Verdict:
    status: str
    stats: ExplorationStats
    trace: Optional[Trace] = None
    engine: str = ""

    @property
    def safe(self) -> bool:
        return self.status == SAFE

    @property
    def unsafe(self) -> bool:
        return self.status == UNSAFE


def is_cycle_var(name: str) -> bool:
    return name == CYCLE_VAR
