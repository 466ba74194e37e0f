"""Propositional back end: CDCL solver plus bit-blasting of BvExpr constraints.

The compiled core is used when it was built; set ``COVERIF_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from ._pysolver import PySolver
from .errors import SolverError, SolverLimit

BACKENDS = {"python": PySolver}

if os.environ.get("COVERIF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._cdcl import CSolver
    except ImportError:  # pragma: no cover - depends on the build
        CSolver = None
    else:
        BACKENDS["cython"] = CSolver
else:
    CSolver = None

Solver = CSolver if CSolver is not None else PySolver
DEFAULT_BACKEND = Solver.backend


def make_solver(backend: str | None = None):
    if backend is None:
        return Solver()
    try:
        return BACKENDS[backend]()
    except KeyError:
        raise SolverError(f"solver backend {backend!r} is not available") from None


from .blast import CnfInstance  # noqa: E402

__all__ = ["Solver", "PySolver", "CSolver", "BACKENDS", "DEFAULT_BACKEND", "make_solver",
           "CnfInstance", "SolverError", "SolverLimit"]
