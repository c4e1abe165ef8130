"""SVG figure generation: determinism, structure, edge cases."""

import hashlib

import numpy as np
import pytest

from leray2d import plots
from leray2d.grid import build_grid
from leray2d.states import FlowState


@pytest.fixture(scope="module")
def zero_state():
    g = build_grid(24, 32)
    return FlowState(psi=np.zeros((g.n_r, g.n_theta)), sigma=0.0, R=100.0,
                     grid=g, residual_norm=0.0, symmetry="symmetric")


@pytest.fixture(scope="module")
def toy_state():
    g = build_grid(24, 32)
    psi = (g.radii**2 * (3 - 2 * g.radii))[:, None] * np.sin(g.thetas)[None, :]
    return FlowState(psi=psi, sigma=1.0, R=100.0, grid=g,
                     residual_norm=0.0, symmetry="symmetric")


def test_zero_field_has_no_contours(zero_state, tmp_path):
    out = str(tmp_path / "z.svg")
    plots.plot_field(zero_state, out)
    text = open(out).read()
    assert "<svg" in text
    assert "<polyline" not in text


def test_field_plot_deterministic(toy_state, tmp_path):
    a, b = str(tmp_path / "a.svg"), str(tmp_path / "b.svg")
    plots.plot_field(toy_state, a)
    plots.plot_field(toy_state, b)
    ha = hashlib.sha256(open(a, "rb").read()).hexdigest()
    hb = hashlib.sha256(open(b, "rb").read()).hexdigest()
    assert ha == hb


def test_field_plot_has_streamlines_and_raster(toy_state, tmp_path):
    out = str(tmp_path / "t.svg")
    plots.plot_field(toy_state, out, n_levels=15)
    text = open(out).read()
    assert "image/png;base64," in text
    assert text.count("<polyline") >= 15


def test_raster_symmetry_of_symmetric_state(toy_state):
    """A sin(theta)-only field is mirror symmetric about the vertical axis:
    the resampled magnitude raster must match its own reflection."""
    mag = plots.resample_cartesian(toy_state.grid,
                                   plots.speed_magnitude(toy_state), 128)
    mag = np.nan_to_num(mag)
    flipped = mag[:, ::-1]                     # x -> -x
    scale = np.abs(mag).max()
    assert np.abs(mag - flipped).max() <= 1e-6 * scale


def test_spectrum_plot_marks_crossing(tmp_path):
    from types import SimpleNamespace as NS
    reports = [NS(sigma=s, eigenvalues=[NS(value=complex(0.1 * (38 - s), 0)),
                                        NS(value=complex(1.0, 0.5))])
               for s in (30.0, 35.0, 40.0, 45.0)]
    out = str(tmp_path / "s.svg")
    plots.plot_spectrum(reports, out)
    text = open(out).read()
    assert "sigma0" in text                    # crossing annotated
    assert text.count("<polyline") == 2


def test_spectrum_plot_needs_two_reports(tmp_path):
    with pytest.raises(ValueError):
        plots.plot_spectrum([], str(tmp_path / "x.svg"))


def test_bifurcation_plot(tmp_path):
    pts = [(s, 0.0, "symmetric") for s in np.linspace(30, 50, 11)]
    pts += [(s, np.sqrt(max(s - 39.2, 0.0)), "asymmetric+")
            for s in np.linspace(39.2, 50, 12)]
    out = str(tmp_path / "b.svg")
    plots.plot_bifurcation(pts, out)
    text = open(out).read()
    assert "asymmetric+" in text and "symmetric" in text
