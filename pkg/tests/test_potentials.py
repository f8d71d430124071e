import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kahler_torus.errors import AdmissibilityError
from kahler_torus.grid import density
from kahler_torus.potentials import make_potential, mode_field, random_modes, random_potential


def test_mode_field_single_mode():
    f = mode_field([(1, 0, 0.5, 0.0)], 8)
    assert f[0, 3] == pytest.approx(0.5)
    assert f[2, 0] == pytest.approx(0.0, abs=1e-16)
    assert np.array_equal(mode_field([], 8), np.zeros((8, 8)))


def test_make_potential_rejects_large_modes():
    with pytest.raises(AdmissibilityError):
        make_potential([(1, 0, 1.0, 0.0)], 16)
    assert make_potential([(1, 0, 0.01, 0.0)], 16).min_rho > 0


@given(st.integers(0, 2**32 - 1), st.sampled_from([8, 16, 32]))
def test_random_potentials_respect_the_budget(seed, N):
    rng = np.random.default_rng(seed)
    modes = random_modes(rng, budget=0.5)
    assert 1 <= len(modes) <= 3
    assert sum(abs(a) * math.pi**2 * (kx * kx + ky * ky) for kx, ky, a, _ in modes) <= 0.5 + 1e-12
    assert density(mode_field(modes, N)).min() >= 0.5 - 1e-12


def test_random_potential_is_seeded():
    a = random_potential(16, np.random.default_rng(5))
    b = random_potential(16, np.random.default_rng(5))
    assert np.array_equal(a, b)
