"""Geodesics and energy functionals in the space of Kahler potentials on the flat torus."""

from .energy import (
    KAPPA,
    lichnerowicz,
    mabuchi_energy,
    mabuchi_entropy,
    scalar_curvature,
)
from .errors import (
    AdmissibilityError,
    BoundaryVariationError,
    FormatError,
    GridMismatchError,
    InfeasibleConfigError,
    KahlerTorusError,
    NegativeMeasureError,
    SolverError,
    StageFailure,
)
from .geometry import PathGrid, normalize, path_energy, path_length, read_path, write_path
from .grid import GridSpec, KahlerPotential, density, dzzbar, integrate, read_field, write_field
from .hcma import SolverConfig, ma_density, solve_geodesic
from .metric import distance, triangle_check
from .potentials import make_potential, mode_field
from .verify import run_verify

__version__ = "0.1.0"
