"""Linearization spectrum: Stokes ladder and shift-invert path."""

import numpy as np
import pytest

from leray2d.spectrum import leading_spectrum, stokes_spectrum


def test_stokes_ladder_at_sigma_zero():
    # drift-operator pencil at sigma = 0, R = 100: eigenvalues 1 + n/2
    res = stokes_spectrum(100.0)
    ladder = 1.0 + 0.5 * np.arange(12)
    # lambda ~ 1 is report-only (boundary-dominated mode)
    got = [ev.value.real for ev in res.smallest(10)
           if abs(ev.value.real - 1.0) > 1e-3]
    for lam in got:
        assert np.min(np.abs(ladder - lam)) <= 1e-3, lam


def test_stokes_ladder_multiplicities():
    res = stokes_spectrum(100.0)
    mult_15 = sum(ev.multiplicity for ev in res.eigenvalues
                  if abs(ev.value.real - 1.5) < 1e-3)
    mult_20 = sum(ev.multiplicity for ev in res.eigenvalues
                  if abs(ev.value.real - 2.0) < 1e-3)
    assert mult_15 >= 2
    assert mult_20 >= 2


def test_stokes_eigenvalues_are_real():
    res = stokes_spectrum(100.0)
    assert all(abs(ev.value.imag) < 1e-8 for ev in res.smallest(10))


@pytest.mark.slow
def test_leading_spectrum_small_sigma():
    # shift-invert Arnoldi about a converged nonlinear state
    from leray2d.continuation import solve_at
    st = solve_at(5.0, symmetric=True)
    res = leading_spectrum(st, k=4)
    assert len(res.eigenvalues) == 4
    # eigenpair residuals certify the pairs
    assert all(ev.residual < 1e-6 for ev in res.eigenvalues)
    # at small sigma the spectrum is still a perturbed ladder: all stable
    assert all(ev.value.real > 0.5 for ev in res.eigenvalues)
