"""The rescaled Leray operator in vorticity-streamfunction form.

On the unit disk, with s = R r the unscaled similarity variable, the
streamfunction of the rescaled profile solves

    F(psi) = -Delta(Omega) - (R^2/2) (2 Omega + r dOmega/dr)
             + sigma * (u . grad) Omega  = 0,          Omega = Delta(psi),

with the clamped boundary pair

    psi(1, theta)   = b(theta)      (Dirichlet, default b = sin(theta))
    dpsi/dr(1, th)  = 0             (Neumann),

encoding full velocity Dirichlet data u_r = -(1/r) dpsi/dtheta,
u_theta = dpsi/dr.  The two outermost radial collocation rows of each
Fourier mode carry the boundary conditions.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .grid import DiskGrid, _mode_numbers


class LerayOperator:
    """Discrete residual / Jacobian of the rescaled Leray problem at fixed
    domain radius R on a given grid.  The unknown is the real nodal
    streamfunction array of shape (n_r, n_theta)."""

    def __init__(self, grid: DiskGrid, R: float):
        self.grid = grid
        self.R = float(R)
        n = grid.n_r
        self.i_bc_d = n - 1   # Dirichlet row (boundary node r = 1)
        self.i_bc_n = n - 2   # Neumann row
        self.modes = _mode_numbers(grid.n_theta)
        r = grid.radii
        # per-|m| operator blocks
        self._L = {}
        self._drift = {}      # -L^2 - (R^2/2)(2 L + diag(r) D1 L), acting on psi
        for m in range(grid.n_theta // 2 + 1):
            L = grid.lap_m(m)
            D1 = grid.d1(m)
            A = -L @ L - (self.R**2 / 2.0) * (2.0 * L + (r[:, None] * D1) @ L)
            self._L[m] = L
            self._drift[m] = A
        # Per-row equilibration scale for measuring convergence: collocation
        # rows of the fourth-order operator near the clustered inner radii
        # carry coefficients ~1/r^4, so the raw residual of a fully converged
        # state sits at eps * row-norm.  The reported residual norm divides
        # each row by max(row-norm, R^2)/R^2, making the convergence
        # tolerance a backward-error measure.
        self._row_scale = {}
        for m in range(grid.n_theta // 2 + 1):
            A = self._drift[m].copy()
            A[n - 1, :] = 0.0
            A[n - 1, n - 1] = 1.0
            A[n - 2, :] = grid.d1(m)[n - 1, :]
            self._row_scale[m] = np.maximum(
                np.abs(A).max(axis=1), self.R**2) / self.R**2
        # default boundary datum psi(1,theta) = sin(theta):
        # coefficient -i/2 at m=+1, +i/2 at m=-1
        nb = np.zeros(grid.n_theta, dtype=complex)
        nb[1] = -0.5j
        nb[-1] = 0.5j
        self.bc_dirichlet = nb

    # -- boundary data  ----------------------------------------------------

    def set_dirichlet_data(self, values_on_boundary: np.ndarray):
        """Set psi(1, theta_j) from nodal boundary values."""
        self.bc_dirichlet = np.fft.fft(np.asarray(values_on_boundary, float)) \
            / self.grid.n_theta

    # -- transforms ----------------------------------------------------------

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(values, axis=1) / self.grid.n_theta

    def to_values(self, modes: np.ndarray) -> np.ndarray:
        return np.fft.ifft(modes * self.grid.n_theta, axis=1).real

    # -- field quantities ----------------------------------------------------

    def omega_modes(self, psi_m: np.ndarray) -> np.ndarray:
        out = np.empty_like(psi_m)
        for col, m in enumerate(self.modes):
            out[:, col] = self._L[abs(m)] @ psi_m[:, col]
        return out

    def velocity(self, psi_m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Physical (u_r, u_theta) from streamfunction modes."""
        g = self.grid
        inv_r = 1.0 / g.radii
        ur_m = np.empty_like(psi_m)
        ut_m = np.empty_like(psi_m)
        for col, m in enumerate(self.modes):
            ur_m[:, col] = -(1j * m) * (inv_r * psi_m[:, col])
            ut_m[:, col] = g.d1(abs(m)) @ psi_m[:, col]
        return self.to_values(ur_m), self.to_values(ut_m)

    def _omega_derivs(self, om_m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Physical (dOmega/dr, (1/r) dOmega/dtheta)."""
        g = self.grid
        inv_r = 1.0 / g.radii
        dr_m = np.empty_like(om_m)
        dth_m = np.empty_like(om_m)
        for col, m in enumerate(self.modes):
            dr_m[:, col] = g.d1(abs(m)) @ om_m[:, col]
            dth_m[:, col] = (1j * m) * (inv_r * om_m[:, col])
        return self.to_values(dr_m), self.to_values(dth_m)

    # -- residual ------------------------------------------------------------

    def residual_modes(self, psi_m: np.ndarray, sigma: float,
                       homogeneous_bc: bool = False) -> np.ndarray:
        """Residual in Fourier space, boundary rows included."""
        g = self.grid
        F = np.empty_like(psi_m)
        for col, m in enumerate(self.modes):
            F[:, col] = self._drift[abs(m)] @ psi_m[:, col]
        if sigma != 0.0:
            om_m = self.omega_modes(psi_m)
            ur, ut = self.velocity(psi_m)
            om_r, om_t = self._omega_derivs(om_m)
            adv = ur * om_r + ut * om_t           # u.grad Omega, physical
            F += sigma * self.to_modes(adv)
        # boundary rows
        bd = 0.0 if homogeneous_bc else self.bc_dirichlet
        F[self.i_bc_d, :] = psi_m[self.i_bc_d, :] - bd
        for col, m in enumerate(self.modes):
            row = g.d1(abs(m))[self.i_bc_d, :]
            F[self.i_bc_n, col] = row @ psi_m[:, col]
        return F

    def residual(self, values: np.ndarray, sigma: float,
                 homogeneous_bc: bool = False) -> np.ndarray:
        return self.to_values(
            self.residual_modes(self.to_modes(values), sigma, homogeneous_bc))

    def residual_norm(self, values: np.ndarray, sigma: float) -> float:
        """Equilibrated infinity norm of the residual, scaled by R^2."""
        F = self.residual_modes(self.to_modes(values), sigma)
        worst = 0.0
        for col, m in enumerate(self.modes):
            worst = max(worst, float(
                np.max(np.abs(F[:, col]) / self._row_scale[abs(m)])))
        return worst / self.R**2

    # -- Jacobian ------------------------------------------------------------

    def jacobian_matvec(self, psi_m: np.ndarray, sigma: float,
                        delta_values: np.ndarray) -> np.ndarray:
        """Directional derivative of the residual at psi in direction delta.
        Boundary rows become homogeneous constraints on delta."""
        dpsi_m = self.to_modes(delta_values)
        F = np.empty_like(dpsi_m)
        for col, m in enumerate(self.modes):
            F[:, col] = self._drift[abs(m)] @ dpsi_m[:, col]
        if sigma != 0.0:
            om_m = self.omega_modes(psi_m)
            dom_m = self.omega_modes(dpsi_m)
            ur, ut = self.velocity(psi_m)
            dur, dut = self.velocity(dpsi_m)
            om_r, om_t = self._omega_derivs(om_m)
            dom_r, dom_t = self._omega_derivs(dom_m)
            adv = ur * dom_r + ut * dom_t + dur * om_r + dut * om_t
            F += sigma * self.to_modes(adv)
        g = self.grid
        F[self.i_bc_d, :] = dpsi_m[self.i_bc_d, :]
        for col, m in enumerate(self.modes):
            row = g.d1(abs(m))[self.i_bc_d, :]
            F[self.i_bc_n, col] = row @ dpsi_m[:, col]
        return self.to_values(F)

    # -- preconditioner --------------------------------------------------------

    def stokes_preconditioner(self, sigma: float = 0.0,
                              psi_m: np.ndarray | None = None,
                              shift: float = 0.0):
        """LU factors of per-mode Jacobian blocks with boundary rows.

        At sigma = 0 these are the exact Jacobian.  When a base state is
        supplied, the mode-diagonal part of the advection linearization
        (interaction with the angular-mean flow and vorticity) is included,
        which keeps Krylov iteration counts low at large sigma.

        With `shift` nonzero the blocks are those of J - shift * R^2 * Delta,
        the operator inverted in shift-invert eigenvalue iterations.
        """
        g = self.grid
        r = g.radii
        mean_terms = None
        if sigma != 0.0 and psi_m is not None:
            ur, ut = self.velocity(psi_m)
            om_m = self.omega_modes(psi_m)
            om_r, _ = self._omega_derivs(om_m)
            ur0 = np.fft.fft(ur, axis=1)[:, 0].real / g.n_theta
            ut0 = np.fft.fft(ut, axis=1)[:, 0].real / g.n_theta
            omr0 = np.fft.fft(om_r, axis=1)[:, 0].real / g.n_theta
            mean_terms = (ur0, ut0, omr0)
        factors = {}
        for m in sorted(set(self.modes.tolist())):
            am = abs(m)
            A = self._drift[am].astype(complex)
            if mean_terms is not None:
                ur0, ut0, omr0 = mean_terms
                L = self._L[am]
                D1 = g.d1(am)
                adv = (ur0[:, None] * (D1 @ L)
                       + (1j * m) * ((ut0 / r)[:, None] * L))
                adv = adv + np.diag((-1j * m) * omr0 / r)
                A = A + sigma * adv
            if shift != 0.0:
                A = A - (shift * self.R**2) * self._L[am]
            A[self.i_bc_d, :] = 0.0
            A[self.i_bc_d, self.i_bc_d] = 1.0
            A[self.i_bc_n, :] = g.d1(am)[self.i_bc_d, :]
            factors[m] = lu_factor(A)
        return _ModePreconditioner(self, factors)

    def apply_boundary_data(self, values: np.ndarray) -> np.ndarray:
        """Return a corrected field exactly satisfying the boundary rows.

        The correction solves the sigma = 0 blocks against a residual that is
        zero except in the boundary rows; since those rows are sigma-
        independent the corrected field satisfies them for every sigma.
        """
        prec = self.stokes_preconditioner()
        psi_m = self.to_modes(values)
        defect = np.zeros_like(psi_m)
        defect[self.i_bc_d, :] = psi_m[self.i_bc_d, :] - self.bc_dirichlet
        for col, m in enumerate(self.modes):
            row = self.grid.d1(abs(m))[self.i_bc_d, :]
            defect[self.i_bc_n, col] = row @ psi_m[:, col]
        corr = prec.solve_modes(defect)
        return values - self.to_values(corr)


class _ModePreconditioner:
    def __init__(self, op: LerayOperator, factors: dict):
        self.op = op
        self.factors = factors

    def solve_modes(self, rhs_m: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhs_m)
        for col, m in enumerate(self.op.modes):
            out[:, col] = lu_solve(self.factors[int(m)], rhs_m[:, col])
        return out

    def __call__(self, rhs_values: np.ndarray) -> np.ndarray:
        return self.op.to_values(self.solve_modes(self.op.to_modes(rhs_values)))
