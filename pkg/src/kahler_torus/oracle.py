"""Independent solver for y-independent boundary data.

When both endpoints depend on x only, the geodesic does too, and the complex
Monge-Ampere equation collapses to the real equation

    (1 + phi_xx / 4) phi_tt - phi_tx^2 / 4 = tau * s1

on the (t, x) cylinder.  This module solves that 2-D problem with its own
stencils (plain centred differences in t and x), its own convexification and
continuation, and a dense direct Newton solve.  It is a cross-check for the
3-D solver and deliberately shares none of its code.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverError
from .geometry import PathGrid

__all__ = ["reduced_oracle"]


def _ops(N: int, M: int):
    eye = np.eye(N)
    up = np.roll(eye, 1, axis=1)  # (up @ f)[k] = f[k+1]
    dx = (up - up.T) * (N / 2.0)
    dxx = (up + up.T - 2.0 * eye) * float(N * N)
    return dx, dxx


def _q(U, dx, dxx, M):
    # U has shape (M+1, N); returns q at interior times
    rho = 1.0 + 0.25 * U[1:-1] @ dxx.T
    tt = (U[2:] - 2.0 * U[1:-1] + U[:-2]) * float(M * M)
    tx = ((U[2:] - U[:-2]) * (M / 2.0)) @ dx.T
    return rho * tt - 0.25 * tx * tx, rho


def _jac(U, dx, dxx, M):
    n, N = M - 1, U.shape[1]
    rho = 1.0 + 0.25 * U[1:-1] @ dxx.T
    tt = (U[2:] - 2.0 * U[1:-1] + U[:-2]) * float(M * M)
    tx = ((U[2:] - U[:-2]) * (M / 2.0)) @ dx.T
    J = np.zeros((n * N, n * N))
    for r in range(n):
        rows = slice(r * N, (r + 1) * N)
        J[rows, rows] = 0.25 * tt[r][:, None] * dxx - 2.0 * M * M * np.diag(rho[r])
        # d(tx)/dU_{r+1} = dx * M/2, d(tx)/dU_{r-1} = -dx * M/2
        cross = 0.5 * tx[r][:, None] * dx * (M / 2.0)
        if r + 1 < n:
            J[rows, (r + 1) * N:(r + 2) * N] = M * M * np.diag(rho[r]) - cross
        if r > 0:
            J[rows, (r - 1) * N:r * N] = M * M * np.diag(rho[r]) + cross
    return J


def _newton(U, target, dx, dxx, M, tol, max_iter=50):
    q, rho = _q(U, dx, dxx, M)
    r = q - target
    res = np.abs(r).max()
    for _ in range(max_iter):
        if res <= tol:
            return U
        step = np.linalg.solve(_jac(U, dx, dxx, M), -r.ravel()).reshape(r.shape)
        lam = 1.0
        while lam > 1e-6:
            V = U.copy()
            V[1:-1] += lam * step
            qv, rv = _q(V, dx, dxx, M)
            rr = qv - target
            if rv.min() > 0 and qv.min() > 0 and np.abs(rr).max() < res:
                break
            lam /= 2.0
        else:
            return None
        U, r, res = V, rr, np.abs(rr).max()
    return U if res <= tol else None


def reduced_oracle(phi0, phi1, M: int = 8, eps: float = 1e-3, tol: float = 1e-11,
                   margin: float = 1e-3) -> PathGrid:
    """Solve the y-independent problem and broadcast the answer back to N x N."""
    a, b = np.asarray(phi0, dtype=float), np.asarray(phi1, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError("endpoints must be N x N fields on the same grid")
    for f in (a, b):
        if np.ptp(f, axis=1).max() > 1e-14 * max(1.0, np.abs(f).max()):
            raise ValueError("reduced_oracle needs data that does not depend on y")
    N = a.shape[0]
    u0, u1 = a[:, 0], b[:, 0]
    dx, dxx = _ops(N, M)
    t = np.linspace(0.0, 1.0, M + 1)[:, None]
    lin = (1.0 - t) * u0 + t * u1
    m = margin
    while True:
        U0 = lin - m * t * (1.0 - t)
        s1, rho = _q(U0, dx, dxx, M)
        if s1.min() >= margin and rho.min() >= margin:
            break
        m *= 2.0
        if m > 1e12:
            raise SolverError("reduced oracle could not convexify the initial path")
    U, tau = U0, 1.0
    while tau > eps:
        nxt = max(tau / 2.0, eps)
        while True:
            V = _newton(U, nxt * s1, dx, dxx, M, tol)
            if V is not None:
                break
            nxt = 0.5 * (tau + nxt)
            if tau - nxt < 1e-12:
                raise SolverError("reduced oracle continuation stalled")
        U, tau = V, nxt
    return PathGrid(np.repeat(U[:, :, None], N, axis=2))
