"""Matrix-free Newton-Krylov solver for the rescaled Leray problem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .operator import LerayOperator


@dataclass
class NewtonConfig:
    abs_tol: float = 1e-10       # on ||F||_inf / R^2
    rel_tol: float = 1e-12       # relative to the initial residual
    max_iter: int = 25
    krylov_tol: float = 1e-8
    krylov_max_dim: int = 200
    damping_factor: float = 0.5
    max_backtracks: int = 8


class NewtonError(RuntimeError):
    """Newton iteration failed to converge."""


@dataclass
class NewtonResult:
    values: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    history: list


def newton_solve(op: LerayOperator, initial: np.ndarray, sigma: float,
                 config: NewtonConfig | None = None,
                 log=None, project=None) -> NewtonResult:
    """Solve F(psi; sigma) = 0 starting from `initial`.

    The Krylov solver is GMRES, matrix-free, preconditioned with the exact
    per-mode sigma = 0 factorization.  Steps are damped by backtracking on
    the scaled residual norm.

    `project`, if given, is a linear projector onto an invariant subspace
    (e.g. the R-symmetric sine sector).  The iterate, the right-hand side
    and every Krylov vector are confined to that subspace.  This keeps the
    iteration well posed when the Jacobian has a soft direction in the
    complementary sector, as happens near a symmetry-breaking bifurcation.
    """
    cfg = config or NewtonConfig()
    g = op.grid
    shape = (g.n_r, g.n_theta)
    nn = shape[0] * shape[1]

    psi = op.apply_boundary_data(np.array(initial, dtype=float))
    if project is not None:
        psi = op.apply_boundary_data(project(psi))
    rnorm = op.residual_norm(psi, sigma)
    r0 = max(rnorm, 1e-300)
    history = [rnorm]

    for it in range(cfg.max_iter):
        if rnorm <= cfg.abs_tol or rnorm <= cfg.rel_tol * r0:
            return NewtonResult(psi, rnorm, it, True, history)
        psi_m = op.to_modes(psi)
        prec = op.stokes_preconditioner(sigma, psi_m)
        M = LinearOperator((nn, nn),
                           matvec=lambda v: prec(v.reshape(shape)).ravel())
        if project is None:
            def jmv(v):
                return op.jacobian_matvec(psi_m, sigma, v.reshape(shape)).ravel()
        else:
            def jmv(v):
                w = op.jacobian_matvec(psi_m, sigma, project(v.reshape(shape)))
                return project(w).ravel()
        J = LinearOperator((nn, nn), matvec=jmv)
        F = op.residual(psi, sigma)
        rhs = -F if project is None else -project(F)
        dx, info = gmres(J, rhs.ravel(), rtol=cfg.krylov_tol, atol=0.0,
                         restart=cfg.krylov_max_dim,
                         maxiter=2, M=M)
        if info != 0 and log is not None:
            log(f"newton: gmres returned info={info} at iteration {it}")
        step = dx.reshape(shape)
        if project is not None:
            step = project(step)
        lam = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            trial = psi + lam * step
            tnorm = op.residual_norm(trial, sigma)
            if tnorm < rnorm:
                accepted = True
                break
            lam *= cfg.damping_factor
        if not accepted:
            raise NewtonError(
                f"no descent after {cfg.max_backtracks} backtracks "
                f"(residual {rnorm:.3e}, sigma={sigma})")
        psi, rnorm = trial, tnorm
        history.append(rnorm)
        if log is not None:
            log(f"newton: it={it + 1} |F|/R^2={rnorm:.3e} step={lam}")

    if rnorm <= cfg.abs_tol or rnorm <= cfg.rel_tol * r0:
        return NewtonResult(psi, rnorm, cfg.max_iter, True, history)
    raise NewtonError(
        f"not converged after {cfg.max_iter} iterations "
        f"(residual {rnorm:.3e}, sigma={sigma})")


def initial_guess(op: LerayOperator) -> np.ndarray:
    """Streamfunction satisfying the clamped boundary pair with mode-1
    angular structure and odd radial parity: psi = r(3 - r^2)/2 sin(theta)."""
    g = op.grid
    f = g.radii * (3.0 - g.radii**2) / 2.0
    return f[:, None] * np.sin(g.thetas)[None, :]
