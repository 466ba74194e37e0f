class SolverError(RuntimeError):
    """The back end could not produce an answer."""


class SolverLimit(SolverError):
    """A conflict or time budget ran out before the instance was decided."""
