"""Riemannian geometry of the space of Kahler potentials on the torus.

Tangent vectors are plain fields.  Paths are :class:`PathGrid` objects holding
``M+1`` equally spaced slices on ``t in [0, 1]``; a field of tangent vectors
along a path is an array with the same ``(M+1, N, N)`` shape.

The real gradient pairing used by the connection is

    (grad a, grad b)_phi = (d_x a d_x b + d_y a d_y b) / (2 rho_phi)
                         = 2 Re(a_z conj(b_z)) / rho_phi,

which is the normalisation for which the connection is metric compatible
with the L^2(d mu_phi) metric and for which ``D_t phi' = 0`` coincides with
``rho phi'' - |phi'_z|^2 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AdmissibilityError, BoundaryVariationError, FormatError, GridMismatchError
from .grid import (
    GridSpec,
    KahlerPotential,
    d_x,
    d_y,
    density,
    dzzbar,
    format_field,
    grid_of,
    integrate,
    parse_field,
    values_of,
)

__all__ = [
    "PathGrid",
    "time_derivative",
    "slice_energies",
    "path_energy",
    "path_length",
    "path_action",
    "gradient_pairing",
    "christoffel",
    "covariant_derivative",
    "metric_compatibility_residual",
    "poisson_bracket",
    "curvature",
    "sectional_curvature",
    "functional_I",
    "alpha",
    "normalize",
    "first_variation_I_rho",
    "write_path",
    "read_path",
]


@dataclass(frozen=True, eq=False)
class PathGrid:
    """Discrete path ``Phi(t_j)``, ``t_j = j / M``, slices stacked on axis 0."""

    slices: np.ndarray
    boundary_fixed: tuple[bool, bool] = (True, True)

    def __post_init__(self):
        arr = np.asarray(self.slices, dtype=float)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise GridMismatchError(f"path slices must have shape (M+1, N, N), got {arr.shape}")
        if arr.shape[0] < 3:
            raise ValueError("a path needs M >= 2 time intervals")
        if not np.all(np.isfinite(arr)):
            raise ValueError("path has non-finite entries")
        object.__setattr__(self, "slices", arr)

    @classmethod
    def linear(cls, phi0, phi1, M: int) -> "PathGrid":
        a, b = values_of(phi0), values_of(phi1)
        t = np.linspace(0.0, 1.0, M + 1)[:, None, None]
        return cls((1.0 - t) * a + t * b)

    @property
    def M(self) -> int:
        return self.slices.shape[0] - 1

    @property
    def N(self) -> int:
        return self.slices.shape[1]

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.N)

    @property
    def dt(self) -> float:
        return 1.0 / self.M

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.M + 1) / self.M

    def rho(self) -> np.ndarray:
        return density(self.slices)

    def check_admissible(self) -> np.ndarray:
        """Return the slice densities, raising if any node is non-positive."""
        rho = self.rho()
        j, k, l = np.unravel_index(np.argmin(rho), rho.shape)
        if not rho[j, k, l] > 0:
            raise AdmissibilityError(
                f"path slice {j} has min rho = {rho[j, k, l]:.6g} at node {(int(k), int(l))}",
                node=(int(k), int(l)),
                value=float(rho[j, k, l]),
                slice_index=int(j),
            )
        return rho

    def potential(self, j: int) -> KahlerPotential:
        return KahlerPotential.from_values(self.slices[j])

    def __add__(self, c):
        return PathGrid(self.slices + c, self.boundary_fixed)

    def reversed(self) -> "PathGrid":
        return PathGrid(self.slices[::-1].copy(), self.boundary_fixed[::-1])


def _slices(path) -> np.ndarray:
    return path.slices if isinstance(path, PathGrid) else np.asarray(path, dtype=float)


def _tangent(path: PathGrid, psi) -> np.ndarray:
    arr = np.asarray(psi, dtype=float)
    if arr.shape != path.slices.shape:
        raise GridMismatchError(f"tangent field shape {arr.shape} does not match path {path.slices.shape}")
    return arr


def time_derivative(f: np.ndarray, dt: float) -> np.ndarray:
    """d/dt along axis 0: centred inside, one-sided second order at both ends."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dt)
    return out


def _trapezoid(values: np.ndarray, dt: float) -> float:
    v = np.asarray(values, dtype=float)
    return float(dt * (0.5 * v[0] + v[1:-1].sum() + 0.5 * v[-1]))


def slice_energies(path: PathGrid) -> np.ndarray:
    """E_j = int (D_t phi)^2 d mu_{phi_j} at every slice."""
    rho = path.check_admissible()
    vel = time_derivative(path.slices, path.dt)
    return np.asarray(integrate(vel * vel, rho))


def path_energy(path: PathGrid) -> float:
    return _trapezoid(slice_energies(path), path.dt)


def path_action(path: PathGrid) -> float:
    """Discrete action sum_j dt int v_{j+1/2}^2 (rho_j + rho_{j+1}) / 2.

    Same continuum limit as :func:`path_energy`; its gradient in the interior
    slices is exactly -2 dt h^2 times the Monge-Ampere density q.
    """
    rho = path.check_admissible()
    v = np.diff(path.slices, axis=0) / path.dt
    rbar = 0.5 * (rho[1:] + rho[:-1])
    return float(path.dt * np.sum(integrate(v * v, rbar)))


def path_length(path: PathGrid) -> float:
    return _trapezoid(np.sqrt(slice_energies(path)), path.dt)


def gradient_pairing(a, b, rho) -> np.ndarray:
    a, b = values_of(a), values_of(b)
    return (d_x(a) * d_x(b) + d_y(a) * d_y(b)) / (2.0 * rho)


def christoffel(psi1, psi2, phi) -> np.ndarray:
    """Gamma(psi1, psi2) = -(grad psi1, grad psi2)_phi / 2 at the point ``phi``."""
    rho = phi.rho if isinstance(phi, KahlerPotential) else density(phi)
    return -0.5 * gradient_pairing(psi1, psi2, rho)


def covariant_derivative(path: PathGrid, psi) -> np.ndarray:
    """D_t psi = d psi/dt - (grad psi, grad phi')_phi / 2 at every slice."""
    rho = path.check_admissible()
    psi = _tangent(path, psi)
    vel = time_derivative(path.slices, path.dt)
    return time_derivative(psi, path.dt) - 0.5 * gradient_pairing(psi, vel, rho)


def metric_compatibility_residual(path: PathGrid, psi) -> float:
    """max_j | d/dt ||psi||^2 - 2 <D_t psi, psi> | over interior slices."""
    rho = path.check_admissible()
    psi = _tangent(path, psi)
    norms = np.asarray(integrate(psi * psi, rho))
    lhs = (norms[2:] - norms[:-2]) / (2.0 * path.dt)
    rhs = 2.0 * np.asarray(integrate(covariant_derivative(path, psi) * psi, rho))[1:-1]
    return float(np.max(np.abs(lhs - rhs)))


def poisson_bracket(f, g, phi) -> np.ndarray:
    """{f, g}_phi = (d_x f d_y g - d_y f d_x g) / rho_phi."""
    f, g = values_of(f), values_of(g)
    if f.shape != g.shape:
        raise GridMismatchError(f"shapes differ: {f.shape} vs {g.shape}")
    rho = phi.rho if isinstance(phi, KahlerPotential) else density(phi)
    return (d_x(f) * d_y(g) - d_y(f) * d_x(g)) / rho


def curvature(d1, d2, d3, phi) -> np.ndarray:
    return -0.25 * poisson_bracket(poisson_bracket(d1, d2, phi), d3, phi)


def sectional_curvature(d1, d2, phi) -> float:
    rho = phi.rho if isinstance(phi, KahlerPotential) else density(phi)
    b = poisson_bracket(d1, d2, phi)
    return -0.25 * float(integrate(b * b, rho))


def functional_I(phi) -> float:
    """I(phi) = int phi + (1/2) int phi phi_{z zbar}; dI = alpha."""
    phi = values_of(phi)
    return float(integrate(phi) + 0.5 * integrate(phi * dzzbar(phi)))


def alpha(phi, psi) -> float:
    """The closed 1-form alpha_phi(psi) = int psi d mu_phi."""
    return float(integrate(values_of(psi), density(phi)))


def normalize(phi) -> np.ndarray:
    """Shift ``phi`` by a constant so that I vanishes.

    Since sum(dzzbar(phi)) = 0 on the periodic grid, I(phi - c) = I(phi) - c
    holds exactly, so the shift is c = I(phi).
    """
    phi = values_of(phi)
    return phi - functional_I(phi)


def first_variation_I_rho(path: PathGrid, dphi) -> float:
    """(1/2) sum_j dt * int dphi_j q_j over interior slices."""
    from .hcma import ma_density

    dphi = _tangent(path, dphi)
    if np.any(dphi[0] != 0) or np.any(dphi[-1] != 0):
        raise BoundaryVariationError("variation must vanish on the boundary slices")
    q = ma_density(path)
    return 0.5 * path.dt * float(np.sum(integrate(dphi[1:-1] * q)))


# -- torus-path v1 -----------------------------------------------------------

_PATH_MAGIC = "torus-path v1"


def format_path(path: PathGrid) -> str:
    parts = [f"{_PATH_MAGIC} N={path.N} M={path.M}\n"]
    parts.extend(format_field(s) for s in path.slices)
    return "".join(parts)


def write_path(fname, path: PathGrid) -> None:
    Path(fname).write_text(format_path(path))


def read_path(fname) -> PathGrid:
    lines = Path(fname).read_text().splitlines()
    if not lines or not lines[0].startswith(_PATH_MAGIC):
        raise FormatError("missing torus-path v1 header")
    hdr = {}
    for tok in lines[0][len(_PATH_MAGIC):].split():
        key, _, val = tok.partition("=")
        try:
            hdr[key] = int(val)
        except ValueError as exc:
            raise FormatError(f"bad header token {tok!r}") from exc
    try:
        N, M = hdr["N"], hdr["M"]
    except KeyError as exc:
        raise FormatError("torus-path header needs N and M") from exc
    block = N + 1
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != (M + 1) * block:
        raise FormatError(f"torus-path N={N} M={M} expects {(M + 1) * block} lines, got {len(body)}")
    slices = [parse_field(body[i * block:(i + 1) * block], N) for i in range(M + 1)]
    return PathGrid(np.stack(slices))


def grid_check(*fields) -> GridSpec:
    grids = {grid_of(f) for f in fields}
    if len(grids) != 1:
        raise GridMismatchError(f"fields live on different grids: {sorted(g.N for g in grids)}")
    return grids.pop()
