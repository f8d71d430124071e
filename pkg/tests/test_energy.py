import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kahler_torus.energy import (
    KAPPA,
    calibrate_kappa,
    energy_convexity_check,
    global_min_check,
    lichnerowicz,
    lichnerowicz_norm2,
    mabuchi_energy,
    mabuchi_entropy,
    mabuchi_segment,
    scalar_curvature,
)
from kahler_torus.errors import AdmissibilityError
from kahler_torus.geometry import PathGrid
from kahler_torus.grid import d_x, d_y, dzzbar, integrate
from kahler_torus.hcma import SolverConfig, solve_geodesic
from kahler_torus.potentials import mode_field, random_potential

A0 = 0.05 / math.pi**2

# E(A0 cos 2 pi x) at N = 16, frozen from the closed form int rho log rho and
# cross-checked against adaptive quadrature of the continuum integrand below
MABUCHI_ONE_MODE_N16 = 0.000609306366157452


def one_mode_contrast(N, a):
    return a * N * N * math.sin(math.pi / N) ** 2


@st.composite
def potentials(draw, N=16):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_potential(N, np.random.default_rng(seed))


def test_flat_metric_has_zero_curvature_and_energy():
    z = np.zeros((8, 8))
    assert np.all(scalar_curvature(z).R == 0)
    assert mabuchi_energy(z).value == 0.0
    assert mabuchi_entropy(z) == 0.0


@given(potentials())
@settings(max_examples=30)
def test_total_scalar_curvature_vanishes(phi):
    assert abs(scalar_curvature(phi).Rbar) <= 1e-12


def test_curvature_rejects_inadmissible():
    with pytest.raises(AdmissibilityError):
        scalar_curvature(mode_field([(1, 0, 1.0, 0.0)], 16))


def test_one_mode_energy_against_quadrature():
    N = 16
    c = one_mode_contrast(N, A0)
    ref, _ = quad(lambda x: (1 - c * math.cos(2 * math.pi * x)) * math.log(1 - c * math.cos(2 * math.pi * x)),
                  0, 1, epsabs=1e-15)
    phi = mode_field([(1, 0, A0, 0.0)], N)
    assert mabuchi_entropy(phi) == pytest.approx(ref, rel=1e-12)
    assert mabuchi_energy(phi).value == pytest.approx(ref, rel=1e-10)
    # small contrast: E ~ c^2 / 4
    assert ref == pytest.approx(c * c / 4, rel=0.01)


def test_one_mode_energy_regression():
    phi = mode_field([(1, 0, A0, 0.0)], 16)
    assert mabuchi_energy(phi).value == pytest.approx(MABUCHI_ONE_MODE_N16, rel=1e-12)


def test_energy_is_shift_invariant(rng):
    phi = random_potential(16, rng)
    assert mabuchi_energy(phi + 3.0).value == pytest.approx(mabuchi_energy(phi).value, abs=1e-16)


def test_path_independence(rng):
    phi, mid = random_potential(16, rng), random_potential(16, rng)
    straight = mabuchi_energy(phi).value
    polygon = mabuchi_segment(np.zeros_like(phi), mid) + mabuchi_segment(mid, phi)
    assert polygon == pytest.approx(straight, abs=1e-12)


def test_segment_is_antisymmetric(rng):
    a, b = random_potential(16, rng), random_potential(16, rng)
    assert mabuchi_segment(a, b) == pytest.approx(-mabuchi_segment(b, a), abs=1e-15)


def test_energy_variation_is_minus_curvature(rng):
    phi = random_potential(16, rng)
    psi = phi + 0.5 * random_potential(16, rng)
    s = 1e-5
    fd = (mabuchi_entropy(phi + s * psi) - mabuchi_entropy(phi - s * psi)) / (2 * s)
    R = scalar_curvature(phi).R
    assert fd == pytest.approx(-float(integrate(R * psi, 1 + dzzbar(phi))), rel=1e-6)


def test_global_minimum_on_random_samples():
    ok, vals = global_min_check(20, seed=3, N=16)
    assert ok and vals.min() >= 0.0


def test_lichnerowicz_kernel_on_flat_torus():
    z = np.zeros((16, 16))
    assert np.abs(lichnerowicz(z, np.full((16, 16), 2.0))).max() == 0.0
    X = np.arange(16)[:, None] / 16 + 0 * np.arange(16)[None, :]
    assert lichnerowicz_norm2(z, np.cos(2 * math.pi * X)) > 0


def test_lichnerowicz_flat_norm_identity(rng):
    """On the flat grid int |psi_zz|^2 = int |psi_z zbar|^2 for the staggered stencils."""
    psi = rng.standard_normal((16, 16))
    z = np.zeros((16, 16))
    assert lichnerowicz_norm2(z, psi) == pytest.approx(float(integrate(dzzbar(psi) ** 2)), rel=1e-12)


def test_lichnerowicz_is_linear_in_psi(rng):
    phi = random_potential(16, rng)
    a, b = rng.standard_normal((2, 16, 16))
    assert np.allclose(lichnerowicz(phi, 2 * a - b), 2 * lichnerowicz(phi, a) - lichnerowicz(phi, b))


def _x_path():
    N = 16
    path, _ = solve_geodesic(np.zeros((N, N)), mode_field([(1, 0, A0, 0.0)], N) + 0.1,
                             SolverConfig(M=8, eps_target=1e-3))
    return path


def test_frozen_kappa_reproduces():
    assert calibrate_kappa(_x_path()) == pytest.approx(KAPPA, rel=1e-9)


def test_convexity_along_solved_geodesic():
    rep = energy_convexity_check(_x_path(), 1e-3)
    assert rep.convex and rep.min_second_difference > 0
    assert rep.max_rel_mismatch < 0.02


def test_convexity_detects_concave_path():
    # E along the straight line from 0 to a one-mode potential then back is not convex
    N = 16
    phi = mode_field([(1, 0, A0, 0.0)], N)
    t = np.linspace(0, 1, 9)[:, None, None]
    path = PathGrid(np.sin(math.pi * t) * phi)
    rep = energy_convexity_check(path, 1e-3)
    assert not rep.convex
