"""Trigonometric test potentials and seeded random admissible data."""

from __future__ import annotations

import math

import numpy as np

from .grid import GridSpec, KahlerPotential

__all__ = ["Mode", "mode_field", "make_potential", "random_potential", "random_modes"]

Mode = tuple[int, int, float, float]  # (k_x, k_y, amplitude, phase)


def mode_field(modes, N: int) -> np.ndarray:
    """sum_i a_i cos(2 pi (k_x x + k_y y) + theta_i) on the N x N grid."""
    X, Y = GridSpec(N).coords()
    out = np.zeros((N, N))
    for kx, ky, a, th in modes:
        out += a * np.cos(2.0 * math.pi * (kx * X + ky * Y) + th)
    return out


def make_potential(modes, N: int) -> KahlerPotential:
    """Like :func:`mode_field` but refuses fields with a non-positive density."""
    return KahlerPotential.from_values(mode_field(modes, N))


def random_modes(rng: np.random.Generator, max_modes: int = 3, kmax: int = 2,
                 budget: float = 0.5) -> list[Mode]:
    """Up to ``max_modes`` low modes with sum |a| pi^2 |k|^2 <= budget.

    The centred stencils damp every mode, so the bound keeps rho >= 1 - budget
    on any grid.
    """
    n = int(rng.integers(1, max_modes + 1))
    modes = []
    for _ in range(n):
        while True:
            kx, ky = (int(v) for v in rng.integers(-kmax, kmax + 1, size=2))
            if kx or ky:
                break
        modes.append((kx, ky, 1.0, float(rng.uniform(0.0, 2.0 * math.pi))))
    w = rng.uniform(0.2, 1.0, size=n)
    w *= rng.uniform(0.3, 1.0) * budget / np.sum(w * [math.pi**2 * (kx * kx + ky * ky) for kx, ky, _, _ in modes])
    return [(kx, ky, float(a), th) for (kx, ky, _, th), a in zip(modes, w)]


def random_potential(N: int, rng: np.random.Generator, **kw) -> np.ndarray:
    return mode_field(random_modes(rng, **kw), N)
