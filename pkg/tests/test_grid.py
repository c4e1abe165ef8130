"""Grid, differentiation, and quadrature unit tests."""

import numpy as np
import pytest

from leray2d.grid import (ScalarField, build_grid, integrate_disk,
                          _mode_numbers)


@pytest.fixture(scope="module")
def grid():
    return build_grid(32, 32)


def test_radii_increasing_and_boundary_exact(grid):
    assert np.all(np.diff(grid.radii) > 0)
    assert grid.radii[-1] == 1.0
    assert grid.radii[0] > 0.0


def test_quadrature_area(grid):
    one = np.ones((grid.n_r, grid.n_theta))
    assert integrate_disk(ScalarField(grid, one)) == pytest.approx(np.pi,
                                                                   rel=1e-12)


def test_quadrature_polynomial(grid):
    # int r^2 over the unit disk = pi/2
    f = np.broadcast_to((grid.radii**2)[:, None],
                        (grid.n_r, grid.n_theta)).copy()
    assert integrate_disk(ScalarField(grid, f)) == pytest.approx(
        np.pi / 2, rel=1e-12)


def test_d1_differentiates_smooth_even_function(grid):
    # f(r) = cos(r^2) has even parity (m = 0 sector)
    f = np.cos(grid.radii**2)
    df = grid.d1(0) @ f
    exact = -2.0 * grid.radii * np.sin(grid.radii**2)
    assert np.max(np.abs(df - exact)) < 1e-9


def test_laplacian_mode_matches_analytic(grid):
    # psi = r^3 in mode m=1: lap_m psi = 9r - r/r^2*... = (d2 + d/r - m^2/r^2)
    r = grid.radii
    f = r**3
    lap = grid.lap_m(1) @ f
    exact = 9.0 * r - r
    assert np.max(np.abs(lap - exact)) < 1e-8


def test_radial_interp_reproduces_polynomial(grid):
    r = grid.radii
    f = r**2 * (1 - r**2)          # even, m=0 parity
    r_new = np.linspace(0.05, 0.95, 17)
    vals = grid.radial_interp(f, 0, r_new)
    assert np.max(np.abs(vals - r_new**2 * (1 - r_new**2))) < 1e-10


def test_radial_interp_complex_values(grid):
    f = (grid.radii**3).astype(complex) * (1 + 2j)
    out = grid.radial_interp(f, 1, np.array([0.5]))
    assert out.dtype.kind == "c"
    assert abs(out[0] - 0.125 * (1 + 2j)) < 1e-10


def test_mode_numbers_layout():
    m = _mode_numbers(8)
    assert list(m) == [0, 1, 2, 3, -4, -3, -2, -1]
