"""Continuation schedules and branch bookkeeping."""

import numpy as np
import pytest

from leray2d.continuation import schedule_sigmas, continue_branch, solve_at
from leray2d.states import domain_radius


def test_paper_schedule_row_count():
    sig = schedule_sigmas(0.0, 80.0, "paper")
    assert len(sig) == 851                      # 501 fine + 350 coarse
    assert sig[0] == 0.0 and sig[-1] == 80.0
    fine = sig[sig <= 10.0]
    assert np.allclose(np.diff(fine), 0.02)
    coarse = sig[sig >= 10.0]
    assert np.allclose(np.diff(coarse), 0.2)


def test_paper_schedule_partial_window():
    sig = schedule_sigmas(0.0, 10.0, "paper")
    assert len(sig) == 501
    sig = schedule_sigmas(10.0, 80.0, "paper")
    assert len(sig) == 351


def test_fixed_schedule():
    sig = schedule_sigmas(0.0, 1.0, "fixed:0.25")
    assert np.allclose(sig, [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        schedule_sigmas(0.0, 1.0, "fixed:-1")
    with pytest.raises(ValueError):
        schedule_sigmas(0.0, 1.0, "nonsense")


def test_descending_schedule():
    sig = schedule_sigmas(5.0, 3.0, "coarse")
    assert sig[0] == 5.0 and sig[-1] == 3.0
    assert np.all(np.diff(sig) < 0)


def test_radius_rule():
    sig = schedule_sigmas(0.0, 80.0, "paper")
    R = domain_radius(sig)
    assert R[0] == pytest.approx(100.0)
    assert R[-1] == pytest.approx(100.0 * np.sqrt(2.0))
    assert np.all(np.diff(R) > 0)


@pytest.mark.slow
def test_short_branch_continuation():
    br = continue_branch(0.0, 1.0, schedule="fixed:0.5", symmetric=True)
    assert [p.sigma for p in br.points] == [0.0, 0.5, 1.0]
    assert all(p.residual_norm < 1e-9 for p in br.points)
    assert all(p.symmetry == "symmetric" for p in br.points)
    assert all(p.energy >= 0.0 for p in br.points)
    assert 1.0 in br.states                    # endpoint state retained


@pytest.mark.slow
def test_solve_at_matches_branch_endpoint():
    st = solve_at(1.0)
    assert st.sigma == 1.0
    assert st.residual_norm < 1e-9
    assert st.R == pytest.approx(domain_radius(1.0))
