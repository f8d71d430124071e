"""Exception hierarchy shared by every module of the package."""


class KahlerTorusError(Exception):
    """Base class for all package errors."""


class FormatError(KahlerTorusError, ValueError):
    """A torus-field / torus-path file or a report could not be parsed."""


class GridMismatchError(KahlerTorusError, ValueError):
    pass


class NegativeMeasureError(KahlerTorusError, ValueError):
    pass


class AdmissibilityError(KahlerTorusError, ValueError):
    """A potential (or path slice) has a non-positive metric density somewhere.

    ``node`` is the grid index of the worst node and ``value`` the density
    there; ``slice_index`` is set when the offending field is a path slice.
    """

    def __init__(self, message, node=None, value=None, slice_index=None):
        super().__init__(message)
        self.node = node
        self.value = value
        self.slice_index = slice_index


class BoundaryVariationError(KahlerTorusError, ValueError):
    """A path variation does not vanish on the pinned boundary slices."""


class SolverError(KahlerTorusError, RuntimeError):
    pass


class StageFailure(SolverError):
    """A single continuation stage did not converge (damping floor or
    iteration cap); the caller is expected to shrink the tau step."""


class InfeasibleConfigError(SolverError):
    """Solver parameters outside their admissible ranges (e.g. eps_target=0)."""
