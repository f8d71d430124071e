"""Finite-difference calculus on the periodic unit torus.

A field is a numpy array whose last two axes hold N x N samples, row-major,
``values[k, l]`` sitting at the point ``(k h, l h)`` with ``h = 1/N``.  Axis -2
is x, axis -1 is y.  Any leading axes are a batch, so a whole path of shape
``(M+1, N, N)`` goes through an operator in one call.

All stencils are second-order centred and periodic, so callers must supply
periodic data: a sawtooth such as the raw x-coordinate is not a valid field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AdmissibilityError,
    FormatError,
    GridMismatchError,
    NegativeMeasureError,
)

__all__ = [
    "GridSpec",
    "KahlerPotential",
    "grid_of",
    "as_field",
    "d_x",
    "d_y",
    "d_xx",
    "d_yy",
    "d_xy",
    "dzzbar",
    "dz",
    "density",
    "integrate",
    "mabuchi_inner",
    "values_of",
    "write_field",
    "read_field",
    "format_field",
    "parse_field",
]


@dataclass(frozen=True)
class GridSpec:
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 8:
            raise ValueError(f"grid needs N >= 8 points per axis, got {self.N!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) coordinate arrays with ``X[k, l] = k h``."""
        x = np.arange(self.N) / self.N
        return np.meshgrid(x, x, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def grid_of(f) -> GridSpec:
    f = values_of(f)
    if f.ndim < 2 or f.shape[-1] != f.shape[-2]:
        raise GridMismatchError(f"expected trailing N x N axes, got shape {f.shape}")
    return GridSpec(int(f.shape[-1]))


def as_field(values, grid: GridSpec | None = None) -> np.ndarray:
    """Validate ``values`` as a finite scalar field (optionally on ``grid``)."""
    arr = np.asarray(values, dtype=float)
    g = grid_of(arr)
    if grid is not None and g != grid:
        raise GridMismatchError(f"field is on N={g.N}, expected N={grid.N}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field has non-finite entries")
    return arr


def values_of(f) -> np.ndarray:
    if isinstance(f, KahlerPotential):
        return f.values
    return np.asarray(f, dtype=float)


def _n(f: np.ndarray) -> int:
    return f.shape[-1]


def _shift(f, step, axis):
    # result[k] = f[k + step]
    return np.roll(f, -step, axis=axis)


def d_x(f) -> np.ndarray:
    f = values_of(f)
    return (_shift(f, 1, -2) - _shift(f, -1, -2)) * (_n(f) / 2.0)


def d_y(f) -> np.ndarray:
    f = values_of(f)
    return (_shift(f, 1, -1) - _shift(f, -1, -1)) * (_n(f) / 2.0)


def d_xx(f) -> np.ndarray:
    f = values_of(f)
    return (_shift(f, 1, -2) - 2.0 * f + _shift(f, -1, -2)) * float(_n(f) ** 2)


def d_yy(f) -> np.ndarray:
    f = values_of(f)
    return (_shift(f, 1, -1) - 2.0 * f + _shift(f, -1, -1)) * float(_n(f) ** 2)


def d_xy(f) -> np.ndarray:
    return d_x(d_y(f))


def dzzbar(f) -> np.ndarray:
    """Discrete d^2 f / dz dzbar = (d_xx + d_yy) f / 4 (compact 5-point stencil)."""
    return 0.25 * (d_xx(f) + d_yy(f))


def dz(f) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts of df/dz = (d_x f - i d_y f) / 2."""
    return 0.5 * d_x(f), -0.5 * d_y(f)


def density(phi) -> np.ndarray:
    """Metric density rho = 1 + phi_{z zbar} of the potential ``phi``."""
    return 1.0 + dzzbar(phi)


def integrate(f, mu=None):
    """h^2 * sum(f * mu) over the last two axes; ``mu`` defaults to 1.

    ``f`` may be a scalar constant when ``mu`` is a field.
    """
    if mu is None:
        f = values_of(f)
        n = _n(f)
        return np.sum(f, axis=(-2, -1)) / float(n * n)
    mu = values_of(mu)
    if np.any(mu < 0):
        idx = np.unravel_index(np.argmin(mu), mu.shape)
        raise NegativeMeasureError(f"measure is negative at node {idx}: {mu[idx]!r}")
    f = values_of(f)
    n = _n(mu)
    return np.sum(f * mu, axis=(-2, -1)) / float(n * n)


def mabuchi_inner(psi1, psi2, phi) -> float:
    """L^2 pairing of two tangent vectors with respect to d mu_phi."""
    a, b = values_of(psi1), values_of(psi2)
    rho = phi.rho if isinstance(phi, KahlerPotential) else density(phi)
    if a.shape != b.shape or a.shape != rho.shape:
        raise GridMismatchError(f"shapes differ: {a.shape}, {b.shape}, {rho.shape}")
    return float(integrate(a * b, rho))


@dataclass(frozen=True, eq=False)
class KahlerPotential:
    """A field whose metric density is strictly positive at every node.

    Build through :meth:`from_values`, which refuses inadmissible input.
    """

    values: np.ndarray
    rho: np.ndarray = field(repr=False)
    min_rho: float

    @classmethod
    def from_values(cls, values, grid: GridSpec | None = None) -> "KahlerPotential":
        arr = as_field(values, grid)
        if arr.ndim != 2:
            raise GridMismatchError(f"a potential is a single N x N field, got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        rho = density(arr)
        rho.setflags(write=False)
        idx = np.unravel_index(np.argmin(rho), rho.shape)
        min_rho = float(rho[idx])
        if not min_rho > 0:
            raise AdmissibilityError(
                f"metric density not positive: min rho = {min_rho:.6g} at node {tuple(int(i) for i in idx)}",
                node=tuple(int(i) for i in idx),
                value=min_rho,
            )
        return cls(arr, rho, min_rho)

    @property
    def grid(self) -> GridSpec:
        return grid_of(self.values)

    def __add__(self, c):
        return KahlerPotential.from_values(self.values + c)


# -- torus-field v1 ----------------------------------------------------------

_FIELD_MAGIC = "torus-field v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_field(values) -> str:
    arr = as_field(values)
    if arr.ndim != 2:
        raise GridMismatchError("torus-field files hold one N x N field")
    n = arr.shape[0]
    lines = [f"{_FIELD_MAGIC} N={n}"]
    lines.extend(" ".join(_fmt(v) for v in row) for row in arr)
    return "\n".join(lines) + "\n"


def _parse_header(line: str, magic: str) -> dict[str, int]:
    if not line.startswith(magic):
        raise FormatError(f"expected header {magic!r}, got {line!r}")
    out = {}
    for tok in line[len(magic):].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise FormatError(f"bad header token {tok!r}")
        try:
            out[key] = int(val)
        except ValueError as exc:
            raise FormatError(f"bad header value {tok!r}") from exc
    return out


def parse_field(lines: list[str], N: int | None = None) -> np.ndarray:
    """Parse one torus-field block from ``lines`` (header first)."""
    if not lines:
        raise FormatError("empty torus-field block")
    hdr = _parse_header(lines[0].strip(), _FIELD_MAGIC)
    if "N" not in hdr:
        raise FormatError("torus-field header lacks N")
    n = hdr["N"]
    if N is not None and n != N:
        raise FormatError(f"torus-field has N={n}, expected N={N}")
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != n:
        raise FormatError(f"torus-field N={n} has {len(rows)} rows")
    try:
        arr = np.array([[float(tok) for tok in row.split()] for row in rows])
    except ValueError as exc:
        raise FormatError(f"unparseable number in torus-field: {exc}") from exc
    if arr.shape != (n, n):
        raise FormatError(f"torus-field rows do not all have {n} entries")
    if not np.all(np.isfinite(arr)):
        raise FormatError("torus-field has non-finite entries")
    return arr


def write_field(path, values) -> None:
    Path(path).write_text(format_field(values))


def read_field(path, N: int | None = None) -> np.ndarray:
    text = Path(path).read_text()
    return parse_field(text.splitlines(), N)


def stencil_factor(k: int, N: int) -> float:
    """sin(2 pi k h) / (2 pi k h): what the centred d_x does to mode k."""
    th = 2.0 * math.pi * k / N
    return math.sin(th) / th if k else 1.0
