"""Regularised homogeneous complex Monge-Ampere solver on torus x [0, 1].

A path ``Phi(t, x, y)`` is a geodesic exactly when the bordered complex Hessian
of ``Phi`` on ``V x R`` is degenerate.  With ``rho = 1 + Phi_{z zbar}`` and the
time direction ``w = t + i s`` (no s-dependence) that determinant is ``q / 4``
with

    q = rho * Phi_tt - |d_t Phi_z|^2.

On the grid the mixed term is the mean of its eight one-sided versions (see
the comment above :func:`_mixed`).

The solver continues ``q = tau * s1`` from ``tau = 1``, where the convexified
straight line ``Phi0 = (1-t) phi0 + t phi1 - m t (1-t)`` is an exact solution
(``s1 := q(Phi0)``), down to ``tau = eps_target`` with damped Newton steps.
The line search keeps both ``rho`` and ``q`` positive, which is exactly
positive definiteness of the bordered Hessian, i.e. ellipticity of the
linearised operator.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    AdmissibilityError,
    BoundaryVariationError,
    FormatError,
    GridMismatchError,
    InfeasibleConfigError,
    SolverError,
    StageFailure,
)
from .geometry import PathGrid, grid_check
from .grid import KahlerPotential, dzzbar, values_of

__all__ = [
    "SolverConfig",
    "MaTarget",
    "StageReport",
    "SolveReport",
    "ma_density",
    "initial_path",
    "residual",
    "jacobian_apply",
    "jacobian_matrix",
    "newton_solve",
    "solve_geodesic",
    "comparison_gap",
    "bordered_hessian_max_eig",
]


@dataclass(frozen=True)
class SolverConfig:
    M: int = 8
    eps_target: float = 1e-3
    tau_factor: float = 0.5
    newton_tol: float = 1e-10
    max_newton: int = 40
    damping_min: float = 2.0**-12
    lin_tol: float = 1e-12
    m_margin: float = 1e-3
    # first trial value of the convexification constant; None -> m_margin
    m_start: float | None = None

    def __post_init__(self):
        bad = []
        if not isinstance(self.M, (int, np.integer)) or self.M < 2:
            bad.append(f"M={self.M!r} (need integer >= 2)")
        if not 0.0 < self.eps_target < 1.0:
            bad.append(f"eps_target={self.eps_target!r} (need 0 < eps < 1)")
        if not 0.0 < self.tau_factor < 1.0:
            bad.append(f"tau_factor={self.tau_factor!r} (need 0 < f < 1)")
        for name in ("newton_tol", "damping_min", "lin_tol", "m_margin"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                bad.append(f"{name}={v!r} (need > 0)")
        if self.damping_min >= 1:
            bad.append(f"damping_min={self.damping_min!r} (need < 1)")
        if self.max_newton < 1:
            bad.append(f"max_newton={self.max_newton!r}")
        if self.m_start is not None and not self.m_start > 0:
            bad.append(f"m_start={self.m_start!r} (need > 0)")
        if bad:
            raise InfeasibleConfigError("invalid solver configuration: " + "; ".join(bad))

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True, eq=False)
class MaTarget:
    """Right-hand side ``tau * slack`` of the continuity equation.

    ``slack`` has the full path shape; its boundary slices are unused.
    """

    slack: np.ndarray
    tau: float = 1.0
    m: float = float("nan")

    def at(self, tau: float) -> "MaTarget":
        return MaTarget(self.slack, float(tau), self.m)

    def rhs(self) -> np.ndarray:
        return self.tau * self.slack[1:-1]


@dataclass(frozen=True)
class StageReport:
    tau: float
    newton_iters: int
    final_residual: float
    min_rho: float
    min_q: float

    def line(self) -> str:
        return (
            f"stage tau={_g(self.tau)} iters={self.newton_iters} res={_g(self.final_residual)} "
            f"min_rho={_g(self.min_rho)} min_q={_g(self.min_q)}"
        )


@dataclass(frozen=True)
class SolveReport:
    stages: tuple[StageReport, ...]
    effective_eps: float
    eps_target: float
    m: float
    max_slack: float
    wall_time: float = field(default=0.0, compare=False)

    def to_text(self, include_timing: bool = False) -> str:
        lines = [
            f"eps_target = {_g(self.eps_target)}",
            f"effective_eps = {_g(self.effective_eps)}",
            f"m = {_g(self.m)}",
            f"max_slack = {_g(self.max_slack)}",
            f"stages = {len(self.stages)}",
        ]
        if include_timing:
            lines.append(f"wall_time = {_g(self.wall_time)}")
        lines.extend(s.line() for s in self.stages)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SolveReport":
        kv, stages = {}, []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("stage "):
                fields = dict(tok.split("=", 1) for tok in line.split()[1:])
                try:
                    stages.append(
                        StageReport(
                            float(fields["tau"]),
                            int(fields["iters"]),
                            float(fields["res"]),
                            float(fields["min_rho"]),
                            float(fields["min_q"]),
                        )
                    )
                except (KeyError, ValueError) as exc:
                    raise FormatError(f"bad stage line {line!r}") from exc
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise FormatError(f"bad report line {line!r}")
            kv[key.strip()] = val.strip()
        try:
            return cls(
                tuple(stages),
                float(kv["effective_eps"]),
                float(kv["eps_target"]),
                float(kv["m"]),
                float(kv["max_slack"]),
                float(kv.get("wall_time", 0.0)),
            )
        except KeyError as exc:
            raise FormatError(f"report lacks {exc}") from exc


def _g(x) -> str:
    return format(float(x), ".17g")


# -- the Monge-Ampere density and its linearisation ---------------------------
#
# The mixed term |d_t Phi_z|^2 is evaluated as the mean of its one-sided
# versions: forward and backward in t, forward and backward along each space
# axis.  With that choice q_j is exactly -1/(2 dt h^2) times the gradient of the
# discrete action S = sum_{half steps} dt int v^2 (rho_j + rho_{j+1}) / 2, so
# the discrete energy along a solution obeys the same balance law as in the
# continuum instead of drifting at O(dt^2) on its own.


def _fwd(v, axis):
    return (np.roll(v, -1, axis=axis) - v) * v.shape[-1]


def _bwd(v, axis):
    return (v - np.roll(v, 1, axis=axis)) * v.shape[-1]


def _mixed(vp, vm):
    """Mean over the eight one-sided stencils of |d_t Phi_z|^2 = |grad v|^2 / 4."""
    total = 0.0
    for v in (vp, vm):
        for ax in (-2, -1):
            a, b = _fwd(v, ax), _bwd(v, ax)
            total = total + a * a + b * b
    return total / 16.0


def _pieces(Phi: np.ndarray):
    """rho and Phi_tt at interior slices, plus forward / backward velocities."""
    M = Phi.shape[0] - 1
    rho = 1.0 + dzzbar(Phi[1:-1])
    tt = (Phi[2:] - 2.0 * Phi[1:-1] + Phi[:-2]) * float(M * M)
    v = (Phi[1:] - Phi[:-1]) * float(M)
    return rho, tt, v[1:], v[:-1]


def _q(Phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rho, tt, vp, vm = _pieces(Phi)
    return rho * tt - _mixed(vp, vm), rho


def _slices(path) -> np.ndarray:
    return path.slices if isinstance(path, PathGrid) else np.asarray(path, dtype=float)


def ma_density(path) -> np.ndarray:
    """q at interior slices, shape (M-1, N, N); q = 4 det(bordered Hessian)."""
    p = path if isinstance(path, PathGrid) else PathGrid(path)
    p.check_admissible()
    q, _ = _q(p.slices)
    return q


def bordered_hessian_max_eig(path) -> float:
    """Largest eigenvalue over interior nodes of [[rho, B/2], [conj(B)/2, Phi_tt/4]].

    ``|B|^2`` is the stencil-averaged mixed term, so 4 det of this matrix is q.
    """
    rho, tt, vp, vm = _pieces(_slices(path))
    c = 0.25 * tt
    b2 = 0.25 * _mixed(vp, vm)
    return float(np.max(0.5 * (rho + c) + np.sqrt(0.25 * (rho - c) ** 2 + b2)))


def _check_variation(dphi: np.ndarray, shape) -> np.ndarray:
    dphi = np.asarray(dphi, dtype=float)
    if dphi.shape != shape:
        raise GridMismatchError(f"variation shape {dphi.shape} does not match path {shape}")
    if np.any(dphi[0] != 0) or np.any(dphi[-1] != 0):
        raise BoundaryVariationError("variation must vanish on the boundary slices")
    return dphi


def jacobian_apply(path, dphi, *, allow_boundary: bool = False) -> np.ndarray:
    """Directional derivative of q at ``path`` in direction ``dphi``.

    dq = dzzbar(dphi) Phi_tt + rho D_tt(dphi) - 2 Re(conj(D_t Phi_z) D_t dphi_z),
    the last product averaged over the same one-sided stencils as q.
    ``allow_boundary`` skips the zero-boundary check (used when differentiating
    the equation along a symmetry whose generator moves the boundary data).
    """
    Phi = _slices(path)
    if allow_boundary:
        dphi = np.asarray(dphi, dtype=float)
        if dphi.shape != Phi.shape:
            raise GridMismatchError(f"variation shape {dphi.shape} does not match path {Phi.shape}")
    else:
        dphi = _check_variation(dphi, Phi.shape)
    rho, tt, vp, vm = _pieces(Phi)
    _, d_tt, dvp, dvm = _pieces(dphi)
    cross = 0.0
    for v, dv in ((vp, dvp), (vm, dvm)):
        for ax in (-2, -1):
            cross = cross + _fwd(v, ax) * _fwd(dv, ax) + _bwd(v, ax) * _bwd(dv, ax)
    return dzzbar(dphi[1:-1]) * tt + rho * d_tt - cross / 8.0


@functools.lru_cache(maxsize=16)
def _index(n: int, N: int) -> np.ndarray:
    return np.arange(n * N * N).reshape(n, N, N)


def _one_sided_weights(v: np.ndarray, N: int) -> dict:
    """Five-point weights of sum_D diag(D v) D over the one-sided differences D."""
    fx, bx, fy, by = _fwd(v, -2), _bwd(v, -2), _fwd(v, -1), _bwd(v, -1)
    return {
        (0, 0): N * (bx - fx + by - fy),
        (1, 0): N * fx,
        (-1, 0): -N * bx,
        (0, 1): N * fy,
        (0, -1): -N * by,
    }


def jacobian_matrix(path) -> sp.csc_matrix:
    """Sparse matrix of :func:`jacobian_apply` on the interior unknowns."""
    Phi = _slices(path)
    M, N = Phi.shape[0] - 1, Phi.shape[-1]
    n = M - 1
    rho, tt, vp, vm = _pieces(Phi)
    wp, wm = _one_sided_weights(vp, N), _one_sided_weights(vm, N)
    h2 = float(N * N)
    c = M / 8.0
    blocks = {0: {}, 1: {}, -1: {}}
    for off in wp:
        lap = (-h2 if off == (0, 0) else 0.25 * h2) * tt
        blocks[0][off] = lap + c * (wp[off] - wm[off])
        blocks[1][off] = -c * wp[off]
        blocks[-1][off] = c * wm[off]
    blocks[0][(0, 0)] = blocks[0][(0, 0)] - 2.0 * M * M * rho
    blocks[1][(0, 0)] = blocks[1][(0, 0)] + M * M * rho
    blocks[-1][(0, 0)] = blocks[-1][(0, 0)] + M * M * rho
    idx = _index(n, N)
    rows, cols, vals = [], [], []
    for dr, offs in blocks.items():
        keep = slice(max(0, -dr), n - max(0, dr))
        for (dk, dl), coef in offs.items():
            target = np.roll(idx, (-dk, -dl), axis=(1, 2))[keep.start + dr:keep.stop + dr]
            rows.append(idx[keep].ravel())
            cols.append(target.ravel())
            vals.append(coef[keep].ravel())
    size = n * N * N
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )


def _line_preconditioner(J: sp.csc_matrix, N: int):
    """Exact inverse of the time-line part of J (couplings within one spatial node).

    Near the degenerate limit the operator is dominated by rho D_tt, so the
    N*N decoupled tridiagonal systems in t carry most of it.
    """
    C = J.tocoo()
    n2 = N * N
    keep = (C.row % n2) == (C.col % n2)
    P = sp.csc_matrix((C.data[keep], (C.row[keep], C.col[keep])), shape=J.shape)
    return spla.splu(P)


def _linear_solve(J: sp.csc_matrix, b: np.ndarray, rtol: float, N: int) -> np.ndarray:
    # GMRES with the time-line preconditioner; sparse LU if the Krylov solve fails
    x, info = None, -1
    try:
        lu = _line_preconditioner(J, N)
        prec = spla.LinearOperator(J.shape, lu.solve)
        x, info = spla.gmres(J, b, rtol=rtol, atol=0.0, restart=80, maxiter=20, M=prec)
    except RuntimeError:
        info = -1
    if info != 0 or not np.all(np.isfinite(x)):
        x = spla.splu(J).solve(b)
    return x


# -- continuation ---------------------------------------------------------------

def initial_path(phi0, phi1, cfg: SolverConfig) -> tuple[PathGrid, MaTarget]:
    """Convexified straight line and its own Monge-Ampere density as slack."""
    a = KahlerPotential.from_values(values_of(phi0))
    b = KahlerPotential.from_values(values_of(phi1))
    grid_check(a.values, b.values)
    lin = PathGrid.linear(a.values, b.values, cfg.M).slices
    t = np.linspace(0.0, 1.0, cfg.M + 1)[:, None, None]
    bump = t * (1.0 - t)
    delta = cfg.m_margin
    m = cfg.m_start if cfg.m_start is not None else delta
    while m <= 2.0**64:
        Phi0 = lin - m * bump
        q, rho = _q(Phi0)
        if q.min() >= delta and rho.min() >= delta:
            slack = np.zeros_like(Phi0)
            slack[1:-1] = q
            return PathGrid(Phi0), MaTarget(slack, 1.0, float(m))
        m *= 2.0
    raise SolverError("no convexification constant m <= 2**64 makes the initial path strictly convex")


def residual(path, target: MaTarget) -> np.ndarray:
    """q(path) - tau * slack at interior nodes."""
    return ma_density(path) - target.rhs()


def _stage_stats(Phi, target):
    q, rho = _q(Phi)
    r = q - target.rhs()
    full_rho_min = float(min(rho.min(), (1.0 + dzzbar(Phi[[0, -1]])).min()))
    return r, float(np.max(np.abs(r))), full_rho_min, float(q.min())


def newton_solve(path, target: MaTarget, cfg: SolverConfig) -> tuple[PathGrid, StageReport]:
    """Damped Newton for q(Phi) = tau * slack with fixed boundary slices."""
    Phi = _slices(path).copy()
    r, rnorm, rho_min, q_min = _stage_stats(Phi, target)
    if not np.isfinite(rnorm):
        raise SolverError("initial residual is not finite")
    if not (rho_min > 0 and q_min > 0):
        raise StageFailure("bordered Hessian is not positive definite at the starting path")
    iters = 0
    while rnorm > cfg.newton_tol:
        if iters >= cfg.max_newton:
            raise StageFailure(f"no convergence in {cfg.max_newton} Newton steps (res={rnorm:.3e})")
        J = jacobian_matrix(Phi)
        step = _linear_solve(J, -r.ravel(), cfg.lin_tol, Phi.shape[-1]).reshape(r.shape)
        lam = 1.0
        while True:
            trial = Phi.copy()
            trial[1:-1] += lam * step
            tr, tnorm, trho, tq = _stage_stats(trial, target)
            if trho > 0 and tq > 0 and tnorm < rnorm:
                break
            lam *= 0.5
            if lam < cfg.damping_min:
                raise StageFailure(f"step fraction fell below damping_min at tau={target.tau:.3e}")
        Phi, r, rnorm, rho_min, q_min = trial, tr, tnorm, trho, tq
        iters += 1
    return PathGrid(Phi), StageReport(float(target.tau), iters, rnorm, rho_min, q_min)


def solve_geodesic(phi0, phi1, cfg: SolverConfig) -> tuple[PathGrid, SolveReport]:
    """Continue from the convexified line at tau = 1 down to tau = eps_target."""
    start = time.perf_counter()
    path, target = initial_path(phi0, phi1, cfg)
    path, rep = newton_solve(path, target, cfg)
    stages = [rep]
    tau = 1.0
    while tau > cfg.eps_target:
        tau_try = max(tau * cfg.tau_factor, cfg.eps_target)
        while True:
            try:
                path_new, rep = newton_solve(path, target.at(tau_try), cfg)
                break
            except StageFailure:
                tau_try = 0.5 * (tau + tau_try)
                if tau - tau_try <= 1e-12 * tau:
                    raise SolverError(f"continuation step underflow at tau={tau:.6e}") from None
        path, tau = path_new, tau_try
        stages.append(rep)
    max_slack = float(target.slack[1:-1].max())
    report = SolveReport(
        tuple(stages),
        effective_eps=cfg.eps_target * max_slack,
        eps_target=cfg.eps_target,
        m=target.m,
        max_slack=max_slack,
        wall_time=time.perf_counter() - start,
    )
    return path, report


def comparison_gap(path_a, path_b) -> float:
    """max |A - B| over all nodes minus max |A - B| over the boundary slices."""
    A, B = _slices(path_a), _slices(path_b)
    if A.shape != B.shape:
        raise GridMismatchError(f"path shapes differ: {A.shape} vs {B.shape}")
    diff = np.abs(A - B)
    return float(diff.max() - max(diff[0].max(), diff[-1].max()))
