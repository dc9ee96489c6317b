import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ucmbl.grid import Grid, d_xi1, d_xi2, inner, l2_norm, wall_integral

TWO_PI = 2.0 * np.pi


def test_grid_rejects_tiny_or_short():
    with pytest.raises(ValueError):
        Grid(4, 64)
    with pytest.raises(ValueError):
        Grid(64, 64, 1.5)


def test_refine_halves_spacing():
    g = Grid(32, 33, 8.0)
    f = g.refine()
    assert f.h1 == g.h1 / 2 and f.h2 == pytest.approx(g.h2 / 2, rel=1e-15)
    assert f.xi2[-1] == pytest.approx(8.0)


def test_no_duplicated_seam():
    g = Grid(16, 9)
    assert g.xi1[-1] == pytest.approx(1.0 - g.h1)
    assert g.zeros().shape == (16, 9) and g.zeros(3).shape == (3, 16, 9)


def test_d_xi1_constant_and_xi2_only():
    g = Grid(32, 17)
    assert np.all(d_xi1(np.full(g.shape, 3.7), g.h1) == 0.0)
    assert np.all(d_xi1(g.mesh[1], g.h1) == 0.0)


def test_d_xi1_sine_within_taylor_bound():
    g = Grid(256, 9)
    x1 = g.mesh[0]
    err = np.max(np.abs(d_xi1(np.sin(TWO_PI * x1), g.h1) - TWO_PI * np.cos(TWO_PI * x1)))
    assert err <= TWO_PI**3 * g.h1**2 / 6


def test_d_xi1_periodic_shift():
    g = Grid(64, 9)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(g.shape)
    np.testing.assert_array_equal(d_xi1(np.roll(f, 5, axis=0), g.h1), np.roll(d_xi1(f, g.h1), 5, axis=0))


def test_d_xi2_constant_and_linear():
    g = Grid(8, 33, 8.0)
    assert np.all(d_xi2(np.full(g.shape, -2.0), g.h2) == 0.0)
    np.testing.assert_allclose(d_xi2(g.mesh[1], g.h2), 1.0, rtol=0, atol=1e-13)


def test_d_xi2_exponential_second_order():
    errs = []
    for n2 in (65, 129, 257):
        g = Grid(8, n2, 8.0)
        x2 = g.mesh[1]
        errs.append(np.max(np.abs(d_xi2(np.exp(-x2), g.h2) + np.exp(-x2))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_l2_norm_examples():
    g = Grid(16, 33, 8.0)
    assert l2_norm(g.zeros(), g) == 0.0
    assert l2_norm(np.ones(g.shape), g) == pytest.approx(np.sqrt(8.0), rel=1e-14)


def test_l2_norm_sine_exponential_converges():
    L = 8.0
    exact = np.sqrt(0.5 * (1.0 - np.exp(-2 * L)) / 2.0)
    errs = []
    for n2 in (65, 129, 257):
        g = Grid(32, n2, L)
        x1, x2 = g.mesh
        errs.append(abs(l2_norm(np.sin(TWO_PI * x1) * np.exp(-x2), g) - exact))
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_wall_integral_sine_vanishes():
    g = Grid(32, 9)
    assert wall_integral(np.sin(TWO_PI * g.xi1), g) == pytest.approx(0.0, abs=1e-15)
    assert wall_integral(np.ones(32), g) == pytest.approx(1.0)


G = Grid(12, 10, 4.0)
fields = arrays(np.float64, G.shape, elements=st.floats(-10, 10, allow_nan=False))


@given(fields, fields)
def test_d_xi1_skew_adjoint(f, g):
    scale = 1.0 + np.max(np.abs(f)) * np.max(np.abs(g))
    assert abs(inner(d_xi1(f, G.h1), g, G) + inner(f, d_xi1(g, G.h1), G)) <= 1e-11 * scale


@given(fields, fields, st.floats(-5, 5))
def test_l2_norm_is_a_norm(f, g, a):
    assert l2_norm(a * f, G) == pytest.approx(abs(a) * l2_norm(f, G), rel=1e-12, abs=1e-12)
    assert l2_norm(f + g, G) <= l2_norm(f, G) + l2_norm(g, G) + 1e-12
