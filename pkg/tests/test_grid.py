import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahler_torus.errors import AdmissibilityError, FormatError, GridMismatchError, NegativeMeasureError
from kahler_torus.grid import (
    GridSpec,
    KahlerPotential,
    d_x,
    d_xx,
    d_xy,
    d_y,
    d_yy,
    density,
    dz,
    dzzbar,
    format_field,
    integrate,
    mabuchi_inner,
    parse_field,
    read_field,
    stencil_factor,
    write_field,
)
from kahler_torus.potentials import mode_field, random_potential

from .conftest import coords

TWO_PI = 2 * math.pi


@st.composite
def fields(draw, N=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).standard_normal((N, N))


@st.composite
def potentials(draw, N=16):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_potential(N, np.random.default_rng(seed))


def test_gridspec_rejects_small_grids():
    with pytest.raises(ValueError):
        GridSpec(4)
    g = GridSpec(16)
    assert g.h * g.N == 1.0
    X, Y = g.coords()
    assert X[3, 5] == 3 / 16 and Y[3, 5] == 5 / 16


@pytest.mark.parametrize("op", [d_x, d_y, d_xx, d_yy, d_xy, dzzbar])
def test_derivative_of_constant_is_zero(op):
    assert np.all(op(np.full((8, 8), 3.7)) == 0.0)


def test_d_x_of_sine_within_taylor_bound():
    N = 64
    X, _ = coords(N)
    err = np.abs(d_x(np.sin(TWO_PI * X)) - TWO_PI * np.cos(TWO_PI * X)).max()
    assert err <= TWO_PI**3 / N**2 / 6


def test_axes_convention():
    X, Y = coords(16)
    f = np.sin(TWO_PI * X)
    assert np.abs(d_y(f)).max() < 1e-12
    assert np.abs(d_x(f)).max() > 1.0


def test_dzzbar_one_mode_exact_eigenvalue():
    N, a = 16, 0.3
    X, _ = coords(N)
    f = a * np.cos(TWO_PI * X)
    exact = -(math.sin(math.pi / N) ** 2) * N**2 * f
    assert np.allclose(dzzbar(f), exact, atol=1e-12)
    # and close to the continuum value -pi^2 a cos
    assert np.abs(dzzbar(f) + math.pi**2 * f).max() < 0.04 * math.pi**2 * a


@given(fields())
def test_dzzbar_sums_to_zero(f):
    assert abs(dzzbar(f).sum()) <= 1e-10 * max(1.0, np.abs(f).max()) * 64


def test_dz_of_cosine():
    N = 16
    X, _ = coords(N)
    re, im = dz(np.cos(TWO_PI * X))
    s = stencil_factor(1, N)
    assert np.allclose(re, -math.pi * np.sin(TWO_PI * X) * s, atol=1e-13)
    assert np.all(im == 0)


@given(fields())
def test_dz_modulus_identity(f):
    re, im = dz(f)
    assert np.allclose(re * re + im * im, 0.25 * d_x(f) ** 2 + 0.25 * d_y(f) ** 2, rtol=1e-13, atol=1e-12)


def test_density_examples():
    assert np.all(density(np.zeros((8, 8))) == 1.0)
    N, a = 16, 0.05
    X, _ = coords(N)
    rho = density(a * np.cos(TWO_PI * X))
    assert rho.min() == pytest.approx(1 - a * math.sin(math.pi / N) ** 2 * N**2, abs=1e-12)
    assert rho.min() == pytest.approx(1 - math.pi**2 * a, abs=0.02)


def test_promotion_names_worst_node():
    X, _ = coords(16)
    with pytest.raises(AdmissibilityError) as info:
        KahlerPotential.from_values(np.cos(TWO_PI * X))
    assert info.value.node == (0, 0)
    assert info.value.value < 0


def test_potential_is_read_only():
    p = KahlerPotential.from_values(np.zeros((8, 8)))
    with pytest.raises(ValueError):
        p.values[0, 0] = 1.0


@given(potentials())
def test_volume_is_one(phi):
    assert integrate(1.0, density(phi)) == pytest.approx(1.0, abs=1e-14)
    assert mabuchi_inner(np.ones_like(phi), np.ones_like(phi), phi) == pytest.approx(1.0, abs=1e-14)


def test_integrate_examples():
    N = 16
    X, _ = coords(N)
    assert integrate(2.5, np.ones((N, N))) == 2.5
    assert abs(integrate(np.cos(TWO_PI * X))) < 1e-16
    assert mabuchi_inner(np.cos(TWO_PI * X), np.cos(TWO_PI * X), np.zeros((N, N))) == pytest.approx(0.5, abs=1e-15)


def test_integrate_rejects_negative_measure():
    mu = np.ones((8, 8))
    mu[2, 3] = -1e-3
    with pytest.raises(NegativeMeasureError):
        integrate(np.ones((8, 8)), mu)


def test_mabuchi_inner_is_positive_and_checks_grids(rng):
    psi = rng.standard_normal((8, 8))
    assert mabuchi_inner(psi, psi, np.zeros((8, 8))) == pytest.approx(np.mean(psi**2))
    assert mabuchi_inner(np.zeros((8, 8)), np.zeros((8, 8)), np.zeros((8, 8))) == 0.0
    with pytest.raises(GridMismatchError):
        mabuchi_inner(psi, np.zeros((16, 16)), np.zeros((8, 8)))


@given(fields(), fields())
@settings(max_examples=50)
def test_summation_by_parts(f, g):
    for op in (d_x, d_y):
        assert integrate(f * op(g)) == pytest.approx(-integrate(g * op(f)), abs=1e-12)


def _trig(X, Y):
    return (np.sin(TWO_PI * X) + 0.5 * np.cos(TWO_PI * (2 * X + Y)) + 0.2 * np.sin(TWO_PI * 3 * Y)
            + 0.3 * np.cos(TWO_PI * (X - Y)))


def _exact(name, X, Y):
    t = TWO_PI
    table = {
        "d_x": t * np.cos(t * X) - 0.5 * 2 * t * np.sin(t * (2 * X + Y)) - 0.3 * t * np.sin(t * (X - Y)),
        "d_y": -0.5 * t * np.sin(t * (2 * X + Y)) + 0.2 * 3 * t * np.cos(3 * t * Y) + 0.3 * t * np.sin(t * (X - Y)),
        "d_xx": -t * t * np.sin(t * X) - 0.5 * 4 * t * t * np.cos(t * (2 * X + Y)) - 0.3 * t * t * np.cos(t * (X - Y)),
        "d_yy": -0.5 * t * t * np.cos(t * (2 * X + Y)) - 0.2 * 9 * t * t * np.sin(3 * t * Y) - 0.3 * t * t * np.cos(t * (X - Y)),
        "d_xy": -0.5 * 2 * t * t * np.cos(t * (2 * X + Y)) + 0.3 * t * t * np.cos(t * (X - Y)),
    }
    return table[name]


@pytest.mark.parametrize("op", [d_x, d_y, d_xx, d_yy, d_xy])
def test_second_order_convergence(op):
    errs = []
    for N in (32, 64):
        X, Y = coords(N)
        errs.append(np.abs(op(_trig(X, Y)) - _exact(op.__name__, X, Y)).max())
    assert 3.6 <= errs[0] / errs[1] <= 4.4


def test_operators_are_pure(rng):
    f = rng.standard_normal((16, 16))
    g = f.copy()
    a, b = dzzbar(f), dzzbar(f)
    assert np.array_equal(a, b) and np.array_equal(f, g)


def test_batch_axes():
    stack = np.stack([mode_field([(1, 2, 0.01 * k, 0.0)], 8) for k in range(3)])
    assert np.array_equal(dzzbar(stack)[2], dzzbar(stack[2]))


def test_field_roundtrip(tmp_path, rng):
    f = rng.standard_normal((8, 8))
    write_field(tmp_path / "f.txt", f)
    g = read_field(tmp_path / "f.txt", 8)
    assert np.array_equal(f, g)
    assert format_field(f).splitlines()[0] == "torus-field v1 N=8"


@pytest.mark.parametrize(
    "text",
    [
        "torus-field v1 N=8\n" + "0 " * 8 + "\n",  # too few rows
        "torus-field v2 N=2\n0 0\n0 0\n",
        "torus-field v1 N=8\n" + ("0 " * 7 + "nan\n") * 8,
        "torus-field v1 N=8\n" + ("0 " * 7 + "x\n") * 8,
    ],
)
def test_field_reader_rejects(text):
    with pytest.raises(FormatError):
        parse_field(text.splitlines())


def test_field_reader_rejects_wrong_n(tmp_path):
    write_field(tmp_path / "f.txt", np.zeros((8, 8)))
    with pytest.raises(FormatError):
        read_field(tmp_path / "f.txt", 16)
