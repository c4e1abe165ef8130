"""Branch continuation in the data amplitude sigma."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import DiskGrid, ScalarField, build_grid, integrate_disk
from .newton import NewtonConfig, newton_solve, initial_guess
from .operator import LerayOperator
from .states import (FlowState, asymmetry_amplitude, domain_radius,
                     resample_psi, symmetric_part)


def schedule_sigmas(sigma_from: float, sigma_to: float,
                    schedule: str = "paper") -> np.ndarray:
    """Sigma values visited by continuation, inclusive of both endpoints.

    'paper': step 0.02 on [0, 10], step 0.2 on (10, 80]; outside [0, 80]
    the 0.2 step is kept.  'coarse': uniform step 0.5.
    """
    lo, hi = sorted((float(sigma_from), float(sigma_to)))
    if schedule == "paper":
        pts = []
        fine_hi = min(hi, 10.0)
        if lo <= fine_hi:
            n = int(round((fine_hi - lo) / 0.02))
            pts.append(lo + 0.02 * np.arange(n + 1))
        if hi > 10.0:
            start = max(lo, 10.0)
            n = int(round((hi - start) / 0.2))
            pts.append(start + 0.2 * np.arange(1, n + 1))
        sig = np.concatenate(pts) if pts else np.array([lo])
    elif schedule == "coarse":
        n = max(int(round((hi - lo) / 0.5)), 1)
        sig = np.linspace(lo, hi, n + 1)
    elif schedule.startswith("fixed:"):
        h = float(schedule.split(":", 1)[1])
        if h <= 0:
            raise ValueError("fixed schedule step must be positive")
        n = max(int(math.ceil((hi - lo) / h - 1e-12)), 1)
        sig = np.minimum(lo + h * np.arange(n + 1), hi)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    sig = np.unique(np.round(sig, 10))
    if sigma_from > sigma_to:
        sig = sig[::-1]
    return sig


@dataclass
class BranchPoint:
    sigma: float
    R: float
    residual_norm: float
    newton_iterations: int
    asym_amplitude: float
    symmetry: str
    energy: float = 0.0


@dataclass
class Branch:
    points: list = field(default_factory=list)
    states: dict = field(default_factory=dict)   # sigma -> FlowState (kept)

    def sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])


def continue_branch(sigma_from: float, sigma_to: float, *,
                    schedule: str = "paper",
                    n_r: int = 48, n_theta: int = 64,
                    symmetric: bool = False,
                    start_state: FlowState | None = None,
                    keep_sigmas=None,
                    keep_every: int | None = None,
                    config: NewtonConfig | None = None,
                    log=None) -> Branch:
    """Continue the solution branch from sigma_from to sigma_to.

    Each step warm-starts from the previous solution resampled to the new
    domain radius.  With symmetric=True the iterate is projected onto the
    R-symmetric sector after each solve (keeps the continuation on the
    symmetric branch past the bifurcation).

    keep_sigmas: iterable of sigma values whose full states are retained.
    keep_every: additionally retain every k-th state.
    """
    sig = schedule_sigmas(sigma_from, sigma_to, schedule)
    keep = set(np.round(np.atleast_1d(list(keep_sigmas)), 10)) \
        if keep_sigmas is not None else set()
    branch = Branch()
    grid = build_grid(n_r, n_theta)
    psi_prev = None
    R_prev = None

    if start_state is not None:
        psi_prev = start_state.psi
        R_prev = start_state.R
        grid_prev = start_state.grid
    else:
        grid_prev = grid

    for k, s in enumerate(sig):
        R = domain_radius(s)
        op = LerayOperator(grid, R)
        if psi_prev is None:
            guess = initial_guess(op)
        else:
            guess = resample_psi(grid_prev, psi_prev, R_prev, grid, R)
        res = newton_solve(op, guess, float(s), config, log=log,
                           project=symmetric_part if symmetric else None)
        psi = res.values
        amp = asymmetry_amplitude(grid, psi)
        symtag = "symmetric" if amp < 1e-8 else "asymmetric"
        ur, ut = op.velocity(op.to_modes(psi))
        energy = integrate_disk(ScalarField(grid, ur ** 2 + ut ** 2))
        branch.points.append(BranchPoint(
            sigma=float(s), R=R, residual_norm=res.residual_norm,
            newton_iterations=res.iterations, asym_amplitude=amp,
            symmetry=symtag, energy=energy))
        if (round(float(s), 10) in keep
                or (keep_every and k % keep_every == 0)
                or k == len(sig) - 1):
            branch.states[float(s)] = FlowState(
                sigma=float(s), R=R, grid=grid, psi=psi.copy(),
                residual_norm=res.residual_norm, symmetry=symtag)
        psi_prev, R_prev, grid_prev = psi, R, grid
        if log is not None and k % 50 == 0:
            log(f"continuation: sigma={s:.2f} residual={res.residual_norm:.2e}")
    return branch


def solve_at(sigma: float, *, n_r: int = 48, n_theta: int = 64,
             symmetric: bool = False,
             config: NewtonConfig | None = None,
             coarse_step: float = 2.0,
             start: FlowState | None = None, log=None) -> FlowState:
    """Converge a state at the given sigma by short coarse continuation.

    The coarse step is halved locally whenever Newton fails to converge
    from the warm start (the attraction basin shrinks as sigma grows).
    With `start` given, the march begins from that converged state
    instead of from sigma = 0.
    """
    from .newton import NewtonError

    target = abs(sigma)
    grid = build_grid(n_r, n_theta)
    project = symmetric_part if symmetric else None
    psi = None
    R_prev = None
    grid_prev = grid
    s = 0.0
    if start is not None:
        psi = start.psi
        R_prev = start.R
        grid_prev = start.grid
        s = min(abs(start.sigma), target)
    s_prev = s
    step = coarse_step
    while True:
        R = domain_radius(s)
        op = LerayOperator(grid, R)
        guess = initial_guess(op) if psi is None else \
            resample_psi(grid_prev, psi, R_prev, grid, R)
        s_signed = np.sign(sigma) * s if sigma != 0 else 0.0
        try:
            res = newton_solve(op, guess, float(s_signed), config, log=log,
                               project=project)
        except NewtonError:
            if psi is None or step <= coarse_step / 64:
                raise
            # retreat and retry with a smaller step
            step *= 0.5
            s = min(s_prev + step, target)
            continue
        psi = res.values
        R_prev = R
        grid_prev = grid
        if s >= target:
            break
        if res.iterations <= 6 and step < coarse_step:
            step = min(2.0 * step, coarse_step)
        s_prev = s
        s = min(s + step, target)
    rn = op.residual_norm(psi, float(sigma))
    amp = asymmetry_amplitude(grid, psi)
    return FlowState(sigma=float(sigma), R=R, grid=grid, psi=psi,
                     residual_norm=rn,
                     symmetry="symmetric" if amp < 1e-8 else "asymmetric")
