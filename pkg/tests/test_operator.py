"""Residual operator, boundary conditions, Jacobian consistency."""

import numpy as np
import pytest

from leray2d.grid import build_grid
from leray2d.newton import initial_guess
from leray2d.operator import LerayOperator
from leray2d.states import reflect_image


@pytest.fixture(scope="module")
def op():
    return LerayOperator(build_grid(24, 32), 50.0)


def _rand_interior(op, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((op.grid.n_r, op.grid.n_theta))
    return v


def test_boundary_rows_enforced(op):
    psi = op.apply_boundary_data(_rand_interior(op))
    th = op.grid.thetas
    assert np.max(np.abs(psi[-1, :] - np.sin(th))) < 1e-10
    # Neumann: radial derivative vanishes at r=1
    dpsi = np.array([op.grid.d1(abs(m))[-1, :]
                     @ np.fft.fft(psi, axis=1)[:, k]
                     for k, m in enumerate(
                         np.fft.fftfreq(op.grid.n_theta,
                                        1 / op.grid.n_theta).astype(int))])
    vals = np.fft.ifft(dpsi).real
    assert np.max(np.abs(vals)) < 1e-8


def test_jacobian_matches_finite_difference(op):
    psi = op.apply_boundary_data(initial_guess(op))
    sigma = 3.0
    v = _rand_interior(op, 1)
    v[-1, :] = 0.0
    v[-2, :] = 0.0
    F0 = op.residual(psi, sigma)
    J = op.jacobian_matvec(op.to_modes(psi), sigma, v)
    h = 1e-6
    Fd = (op.residual(psi + h * v, sigma) - F0) / h
    num = np.linalg.norm(Fd - J)
    den = np.linalg.norm(J) + 1e-300
    assert num / den < 1e-5


def test_remainder_ratio_quadratic(op):
    """The residual is quadratic in psi: the Taylor remainder
    F(x+hv) - F(x) - h J v scales exactly like h^2, so dividing h by 10
    divides the remainder by 100 (up to roundoff)."""
    psi = op.apply_boundary_data(initial_guess(op))
    sigma = 4.0
    v = _rand_interior(op, 2)
    F0 = op.residual(psi, sigma)
    Jv = op.jacobian_matvec(op.to_modes(psi), sigma, v)

    def rem(h):
        return np.linalg.norm(op.residual(psi + h * v, sigma)
                              - F0 - h * Jv)

    ratio = rem(1e-2) / rem(1e-3)
    assert 50.0 <= ratio <= 200.0


def test_residual_equivariance_under_reflection(op):
    """R-symmetry: reflecting psi about the vertical axis commutes with the
    residual (theta -> pi - theta maps solutions to solutions)."""
    psi = op.apply_boundary_data(_rand_interior(op, 5))
    sigma = 2.5
    a = op.residual(reflect_image(psi), sigma)
    b = reflect_image(op.residual(psi, sigma))
    assert np.max(np.abs(a - b)) < 1e-8 * (1 + np.max(np.abs(a)))
