import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capstokes.geometry import a1_of, a2_of, geometry, linearization_coeffs, omega_of, phi1_of, phi2_of
from capstokes.grid import Grid, GridFn, derivative, read_csv


def test_flat_interface():
    g = Grid.centered(10.0, 64, "line")
    geo = geometry(GridFn.zeros(g))
    assert np.all(geo.omega.values == 1.0)
    assert np.all(geo.phi1.values == 0.0) and np.all(geo.phi2.values == 0.0)
    assert np.all(geo.nu1.values == 0.0) and np.all(geo.nu2.values == 1.0)


def test_gaussian_curvature_at_crest():
    g = Grid.centered(20.0, 801, "line")
    amp = 0.3
    geo = geometry(GridFn.from_function(g, lambda x: amp * np.exp(-x**2)))
    j = g.n // 2
    assert g.nodes[j] == pytest.approx(0.0, abs=1e-14)
    assert geo.kappa.values[j] == pytest.approx(-2 * amp, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20, allow_nan=False))
def test_density_matches_definition(fp):
    w = np.sqrt(1 + fp * fp)
    # g = (1/omega - 1, f'/omega) = (-phi1, phi2)
    assert -phi1_of(fp) == pytest.approx(1 / w - 1, abs=1e-14)
    assert phi2_of(fp) == pytest.approx(fp / w)
    assert omega_of(fp) == pytest.approx(w)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10, allow_nan=False))
def test_linearization_coefficients_are_slope_derivatives(fp):
    h = 1e-6
    d1 = (phi1_of(fp + h) - phi1_of(fp - h)) / (2 * h)
    d2 = (phi2_of(fp + h) - phi2_of(fp - h)) / (2 * h)
    assert a1_of(fp) == pytest.approx(d1, rel=1e-6, abs=1e-9)
    assert a2_of(fp) == pytest.approx(d2, rel=1e-6, abs=1e-9)


def test_curvature_normal_identity():
    # kappa * nu = omega^-1 g'
    g = Grid.centered(2 * np.pi, 256, "periodic")
    f = GridFn.from_function(g, lambda x: 0.5 * np.cos(x) + 0.2 * np.sin(3 * x))
    geo = geometry(f)
    lhs1 = geo.kappa.values * geo.nu1.values
    lhs2 = geo.kappa.values * geo.nu2.values
    rhs1 = derivative(geo.g1).values / geo.omega.values
    rhs2 = derivative(geo.g2).values / geo.omega.values
    assert np.max(np.abs(lhs1 - rhs1)) < 1e-10
    assert np.max(np.abs(lhs2 - rhs2)) < 1e-10


def test_linearization_coeffs_and_csv(tmp_path):
    g = Grid.centered(2 * np.pi, 32, "periodic")
    f = GridFn.from_function(g, lambda x: np.sin(x))
    c = linearization_coeffs(f)
    assert np.all(c["a2"].values > 0)
    p = tmp_path / "geo.csv"
    geometry(f).to_csv(p)
    cols = read_csv(p)
    assert list(cols) == ["xi", "fprime", "omega", "phi1", "phi2", "kappa", "nu1", "nu2"]
    assert np.allclose(cols["nu1"] ** 2 + cols["nu2"] ** 2, 1.0)


def test_unit_slope_arithmetic():
    assert omega_of(1.0) == pytest.approx(math.sqrt(2))
    assert phi1_of(1.0) == pytest.approx(0.2928932, abs=1e-7)
    assert phi2_of(1.0) == pytest.approx(0.7071068, abs=1e-7)
    assert a2_of(1.0) == pytest.approx(0.3535534, abs=1e-7)
    assert a1_of(0.0) == 0.0 and a2_of(0.0) == 1.0


def test_reflection_covariance():
    g = Grid.centered(2 * np.pi, 64, "periodic")
    f = GridFn.from_function(g, lambda x: 0.5 * np.cos(x) + 0.2 * np.sin(3 * x))
    R = g.reflect_index()
    a, b = geometry(f), geometry(f.reflected())
    assert np.allclose(b.phi2.values, -a.phi2.values[R], atol=1e-14)
    assert np.allclose(b.phi1.values, a.phi1.values[R], atol=1e-14)
    assert np.allclose(b.phi2.values**2 + 1 / b.omega.values**2, 1.0, atol=1e-12)
