"""Pressure reconstruction for converged states.

In unscaled self-similar variables (profile U on the ball of radius R) the
momentum equation is

    -Delta U - U/2 - (y . grad) U / 2 + (U . grad) U + grad P = 0.

For divergence-free U the second-derivative terms collapse to first
derivatives of the vorticity Omega = curl U:

    Delta U      = grad_perp(Omega),
    (U . grad) U = grad(|U|^2 / 2) + Omega * (-U_y, U_x),

so the Bernoulli head Q = P + |U|^2/2 satisfies the Poisson problem

    Delta Q        = U_y d_x(Omega) - U_x d_y(Omega) + Omega^2,
    dQ/dr on S_R   = -(1/R) d_theta(Omega) + U_r/2
                     + (y . grad U) . e_r / 2 + Omega U_theta,

whose data involve only first derivatives of Omega and U; this keeps the
reconstruction at the accuracy of the converged streamfunction (third
psi-derivatives evaluated at the boundary are far too noisy to use as
Neumann data).  The mean of P is fixed to zero (pressure is defined up to
a constant); the pure-Neumann m = 0 block is solved as a bordered system
with a Lagrange multiplier.

All computations run on the unit-disk grid in rescaled coordinates
y = R*ytilde, U = (sigma/R) * Utilde(ytilde); the returned array holds the
unscaled nodal pressure P(R*ytilde).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .grid import _mode_numbers
from .states import FlowState


def _cartesian_velocity(state: FlowState):
    """Unscaled Cartesian velocity components on the grid nodes."""
    op = state.operator()
    psi_m = op.to_modes(state.psi)
    ur, ut = op.velocity(psi_m)
    th = state.grid.thetas[None, :]
    scale = state.sigma / state.R
    ux = scale * (ur * np.cos(th) - ut * np.sin(th))
    uy = scale * (ur * np.sin(th) + ut * np.cos(th))
    return ux, uy


def _scalar_gradient(grid, values):
    """(d/dr, (1/r) d/dtheta) of a scalar in rescaled coordinates."""
    modes = _mode_numbers(grid.n_theta)
    vm = np.fft.fft(values, axis=1) / grid.n_theta
    dr = np.empty_like(vm)
    dth = np.empty_like(vm)
    inv_r = 1.0 / grid.radii
    for col, m in enumerate(modes):
        dr[:, col] = grid.d1(abs(m)) @ vm[:, col]
        dth[:, col] = (1j * m) * (inv_r * vm[:, col])
    n = grid.n_theta
    return (np.fft.ifft(dr * n, axis=1).real,
            np.fft.ifft(dth * n, axis=1).real)


def _advection_cartesian(state: FlowState):
    """(U . grad_y) U, Cartesian components, unscaled."""
    g = state.grid
    ux, uy = _cartesian_velocity(state)
    th = g.thetas[None, :]
    out = []
    for comp in (ux, uy):
        dr, dth = _scalar_gradient(g, comp)
        dx = np.cos(th) * dr - np.sin(th) * dth
        dy = np.sin(th) * dr + np.cos(th) * dth
        # grad_y = (1/R) grad_rescaled
        out.append((ux * dx + uy * dy) / state.R)
    return out[0], out[1]


def _vorticity(state: FlowState) -> np.ndarray:
    """Unscaled nodal vorticity Omega = curl_y U = (sigma/R^2) lap~ psi~."""
    g = state.grid
    op = state.operator()
    psi_m = op.to_modes(state.psi)
    modes = _mode_numbers(g.n_theta)
    om = np.empty_like(psi_m)
    for col, m in enumerate(modes):
        om[:, col] = g.lap_m(abs(m)) @ psi_m[:, col]
    omega = np.fft.ifft(om * g.n_theta, axis=1).real
    return (state.sigma / state.R**2) * omega


def solve_pressure(state: FlowState) -> np.ndarray:
    """Unscaled nodal pressure with zero disk mean."""
    g = state.grid
    R = state.R
    th = g.thetas[None, :]
    cb, sb = np.cos(th), np.sin(th)

    ux, uy = _cartesian_velocity(state)
    omega = _vorticity(state)
    om_r, om_t = _scalar_gradient(g, omega)     # rescaled derivatives
    om_x = (cb * om_r - sb * om_t) / R          # unscaled d_x, d_y
    om_y = (sb * om_r + cb * om_t) / R

    # Delta_y Q = U_y d_x(Omega) - U_x d_y(Omega) + Omega^2;
    # solve in rescaled coordinates: Delta~ Q = R^2 * rhs_y
    rhs = (R**2) * (uy * om_x - ux * om_y + omega**2)

    # Neumann data at r~ = 1 (dQ/dr~ = R dQ/dy_r):
    dux_r, _ = _scalar_gradient(g, ux)
    duy_r, _ = _scalar_gradient(g, uy)
    u_r = (ux * cb + uy * sb)[-1, :]
    u_t = (-ux * sb + uy * cb)[-1, :]
    # (y . grad)U = r~ d/dr~ U exactly (the R factors cancel); r~ = 1 here
    stretch_r = dux_r[-1, :] * cb[0] + duy_r[-1, :] * sb[0]
    neumann = R * (-om_t[-1, :] / R
                   + 0.5 * u_r
                   + 0.5 * stretch_r
                   + omega[-1, :] * u_t)

    modes = _mode_numbers(g.n_theta)
    rhs_m = np.fft.fft(rhs, axis=1) / g.n_theta
    neu_m = np.fft.fft(neumann) / g.n_theta
    p_m = np.empty_like(rhs_m)
    n = g.n_r
    for col, m in enumerate(modes):
        am = abs(m)
        L = np.array(g.lap_m(am), dtype=float)
        b = rhs_m[:, col].copy()
        L[n - 1, :] = g.d1(am)[n - 1, :]
        b[n - 1] = neu_m[col]
        if m == 0:
            # bordered zero-mean system: the pure Neumann m=0 block is
            # singular up to constants; the multiplier absorbs the
            # discrete compatibility defect.
            M = np.zeros((n + 1, n + 1))
            M[:n, :n] = L
            M[:n, n] = 1.0
            M[n, :n] = g.quad_w
            bb = np.concatenate([b, [0.0]])
            sol = lu_solve(lu_factor(M), bb)
            p_m[:, col] = sol[:n]
        else:
            p_m[:, col] = lu_solve(lu_factor(L), b)
    q = np.fft.ifft(p_m * g.n_theta, axis=1).real
    p = q - 0.5 * (ux**2 + uy**2)
    # remove the full-disk mean exactly
    from .grid import ScalarField, integrate_disk
    p -= integrate_disk(ScalarField(g, p)) / np.pi
    return p
