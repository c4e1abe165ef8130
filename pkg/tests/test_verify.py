"""A-posteriori verification checks."""

import numpy as np
import pytest

from leray2d.verify import (check_sigma_reflection, mms_convergence,
                            run_checks)


def test_mms_convergence_orders():
    chk = mms_convergence()
    assert chk.passed
    assert chk.value <= 1e-4            # at least four orders gained


@pytest.mark.slow
def test_sigma_reflection_conjugacy():
    chk = check_sigma_reflection(6.0)
    assert chk.passed
    assert chk.value <= 1e-7


@pytest.mark.slow
def test_all_checks_pass_at_sigma_ten():
    from leray2d.continuation import solve_at
    st = solve_at(10.0, symmetric=True)
    results = run_checks(st)
    for chk in results:
        assert chk.passed, \
            f"{chk.name}: {chk.value} (tol {chk.tolerance})"
    by_name = {c.name: c for c in results}
    assert abs(by_name["energy"].value) <= 1e-6
    assert abs(by_name["farfield"].value) <= 0.05
