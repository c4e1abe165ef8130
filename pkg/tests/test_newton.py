"""Newton-Krylov solver behavior."""

import numpy as np
import pytest

from leray2d.grid import build_grid
from leray2d.newton import (NewtonConfig, NewtonError, initial_guess,
                            newton_solve)
from leray2d.operator import LerayOperator
from leray2d.states import asymmetry_amplitude, symmetric_part


@pytest.fixture(scope="module")
def op():
    # R = 50 keeps the vorticity core resolved at this unit-test resolution
    return LerayOperator(build_grid(32, 32), 50.0)


def test_stokes_solve_converges_in_one_step(op):
    # sigma = 0 is linear: one Newton step reaches the solution
    res = newton_solve(op, initial_guess(op), 0.0)
    assert res.iterations <= 2
    assert res.residual_norm < 1e-10


def test_stokes_solution_is_symmetric(op):
    res = newton_solve(op, initial_guess(op), 0.0)
    assert asymmetry_amplitude(op.grid, res.values) < 1e-10


def test_small_sigma_quadratic_convergence(op):
    log = []
    res = newton_solve(op, initial_guess(op), 2.0,
                       log=lambda s: log.append(s))
    assert res.residual_norm < 1e-10
    assert res.iterations <= 6


def test_boundary_conditions_hold_on_solution(op):
    res = newton_solve(op, initial_guess(op), 2.0)
    assert np.max(np.abs(res.values[-1, :] - np.sin(op.grid.thetas))) < 1e-9


def test_projected_iteration_stays_symmetric(op):
    res = newton_solve(op, initial_guess(op), 2.0, project=symmetric_part)
    assert asymmetry_amplitude(op.grid, res.values) < 1e-12
    assert res.residual_norm < 1e-10


def test_max_iter_raises(op):
    cfg = NewtonConfig(max_iter=1, abs_tol=1e-30, rel_tol=1e-30,
                       max_backtracks=0)
    with pytest.raises(NewtonError):
        newton_solve(op, initial_guess(op), 5.0, cfg)
