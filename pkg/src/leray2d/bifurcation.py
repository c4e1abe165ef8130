"""Branch switching at the symmetry-breaking bifurcation and the
pitchfork amplitude law."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .continuation import Branch, continue_branch
from .grid import ScalarField, integrate_disk
from .newton import NewtonConfig, NewtonError, newton_solve
from .operator import LerayOperator
from .states import (FlowState, antisymmetric_part, asymmetry_amplitude,
                     l2_norm)


class AllPerturbationsCollapsed(RuntimeError):
    """Every kernel perturbation re-converged to the symmetric state."""


class InsufficientPoints(ValueError):
    """Not enough usable branch points for the pitchfork fit."""


def velocity_asymmetry(state_or_grid, psi=None, sigma=None, R=None) -> float:
    """s(U) = ||U - RU||_2 / ||U||_2 on velocity, by disk quadrature.

    R is the reflection across the horizontal axis; the antisymmetric
    streamfunction part carries exactly (U - RU)/2.
    """
    if isinstance(state_or_grid, FlowState):
        st = state_or_grid
        grid, psi, R = st.grid, st.psi, st.R
    else:
        grid = state_or_grid
        R = R if R is not None else 1.0
    op = LerayOperator(grid, R)

    def vel_norm2(field):
        ur, ut = op.velocity(op.to_modes(field))
        return integrate_disk(ScalarField(grid, ur**2 + ut**2))

    total = vel_norm2(psi)
    if total <= 0.0:
        return 0.0
    anti = vel_norm2(antisymmetric_part(psi))
    # U - RU is twice the antisymmetric velocity part
    return float(2.0 * np.sqrt(anti / total))


ALPHA_SCHEDULE = (0.05, -0.05, 0.1, -0.1, 0.2, -0.2)


def branch_switch(sym_state: FlowState, kernel: np.ndarray, *,
                  alphas=ALPHA_SCHEDULE,
                  config: NewtonConfig | None = None,
                  log=None) -> FlowState:
    """Newton-converge an asymmetric state from psi_sym + alpha * phi.

    `kernel` is the crossing eigenvector on the state's grid; it is
    normalized internally.  alphas are fractions of ||psi_sym||_2.
    Returns the first converged state whose velocity asymmetry exceeds
    1e-4; its symmetry tag records the sign of the projection onto phi.
    """
    g = sym_state.grid
    op = LerayOperator(g, sym_state.R)
    phi = antisymmetric_part(kernel)
    phi = phi / l2_norm(g, phi)
    base_norm = l2_norm(g, sym_state.psi)

    for frac in alphas:
        guess = sym_state.psi + (frac * base_norm) * phi
        try:
            res = newton_solve(op, guess, sym_state.sigma, config, log=log)
        except NewtonError:
            continue
        s = velocity_asymmetry(g, res.values, R=sym_state.R)
        if s > 1e-4:
            proj = integrate_disk(ScalarField(
                g, antisymmetric_part(res.values) * phi))
            tag = "asymmetric+" if proj > 0 else "asymmetric-"
            return FlowState(sigma=sym_state.sigma, R=sym_state.R, grid=g,
                             psi=res.values, residual_norm=res.residual_norm,
                             symmetry=tag)
    raise AllPerturbationsCollapsed(
        f"all perturbations re-converged to the symmetric state at "
        f"sigma={sym_state.sigma} (below onset, or alpha too small)")


def continue_asymmetric(seed: FlowState, sigma_end: float, *,
                        schedule: str = "paper",
                        config: NewtonConfig | None = None,
                        keep_sigmas=None, log=None) -> Branch:
    """Continue the asymmetric branch from the seed; warns (via log) if the
    seed is actually symmetric, in which case the result coincides with
    the symmetric branch."""
    if asymmetry_amplitude(seed.grid, seed.psi) <= 1e-8 and log is not None:
        log("continue_asymmetric: seed is symmetric; branch will coincide "
            "with the symmetric branch")
    return continue_branch(seed.sigma, sigma_end, schedule=schedule,
                           n_r=seed.grid.n_r, n_theta=seed.grid.n_theta,
                           start_state=seed, symmetric=False,
                           keep_sigmas=keep_sigmas, keep_every=1,
                           config=config, log=log)


@dataclass
class PitchforkFit:
    sigma0_fit: float
    slope: float                # c in s^2 = c (sigma - sigma0_fit)
    r_squared: float
    window: tuple
    n_points: int


def fit_pitchfork(branch: Branch, *, window: tuple | None = None,
                  min_points: int = 5) -> PitchforkFit:
    """Least squares of s(sigma)^2 versus sigma on the asymmetric branch.

    s is the relative velocity asymmetry of each retained state.  The
    supercritical pitchfork normal form predicts s^2 = c (sigma - sigma0).
    """
    pts = []
    for sig, st in sorted(branch.states.items()):
        if window is not None and not (window[0] <= sig <= window[1]):
            continue
        s = velocity_asymmetry(st)
        pts.append((sig, s))
    pts = [(sig, s) for sig, s in pts if s > 1e-8]
    if len(pts) < min_points:
        raise InsufficientPoints(
            f"only {len(pts)} usable asymmetric points (need {min_points})")
    sig = np.array([p[0] for p in pts])
    s2 = np.array([p[1] ** 2 for p in pts])
    A = np.vstack([sig, np.ones_like(sig)]).T
    (b, a), *_ = np.linalg.lstsq(A, s2, rcond=None)
    fitted = A @ np.array([b, a])
    ss_res = float(((s2 - fitted) ** 2).sum())
    ss_tot = float(((s2 - s2.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / max(ss_tot, 1e-300)
    return PitchforkFit(sigma0_fit=float(-a / b), slope=float(b),
                        r_squared=r2,
                        window=(float(sig.min()), float(sig.max())),
                        n_points=len(pts))
