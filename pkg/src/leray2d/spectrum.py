"""Spectrum of the linearized rescaled Leray problem.

The eigenvalue problem is the generalized pencil

    A phi = lambda R^2 B phi,        B = Delta,

where A is the linearization of the rescaled Leray operator about a base
state (with homogeneous clamped boundary rows) and phi is a streamfunction
perturbation.

Two solvers are provided.

* `stokes_spectrum` handles the zero-amplitude (Stokes) limit per angular
  mode.  The drift operator is conjugated by the Gaussian weight
  w = exp(-(R r)^2 / 4), which turns it into the Ornstein-Uhlenbeck
  operator; the conjugated pencil is well conditioned and its eigenvalues
  converge spectrally, whereas the unweighted pencil loses the Gaussian-
  localized eigenfunctions to roundoff at large R.

* `leading_spectrum` handles nonzero amplitude by matrix-free shift-invert
  Arnoldi iteration on an internally refined radial grid, preconditioned
  with per-mode factorizations.

Both report eigen-residuals, and the Stokes path certifies each eigenvalue
against a second radial resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig
from scipy.sparse.linalg import LinearOperator, eigs, gmres

from .grid import DiskGrid, build_grid
from .operator import LerayOperator
from .states import (FlowState, antisymmetric_part, resample_psi,
                     symmetric_part)

# Internal radial refinement used for eigenvalue work.  Eigenfunctions of
# the drift operator live on the unscaled length scale (a Gaussian core of
# radius ~ 1/R in disk units) and need more clustered resolution than the
# nonlinear solves; the stronger map concentrates nodes there.
EIG_N_R = 96
EIG_MAP_STRENGTH = 6.0


@dataclass
class Eigenvalue:
    value: complex
    mode: int | None          # angular mode (Stokes limit only)
    multiplicity: int = 1
    drift: float = 0.0        # |change| under radial refinement (certified)
    residual: float = 0.0     # eigenpair residual (shift-invert path)
    sector: str = ""          # 'symmetric' / 'antisymmetric' (sigma > 0)


@dataclass
class SpectrumResult:
    sigma: float
    R: float
    eigenvalues: list = field(default_factory=list)
    vectors: dict = field(default_factory=dict)   # index -> field values

    def smallest(self, k: int) -> list:
        out = []
        for ev in sorted(self.eigenvalues, key=lambda e: e.value.real):
            out.extend([ev] * ev.multiplicity)
        return out[:k]


# --------------------------------------------------------------------------
# Stokes (sigma = 0) limit: per-mode Gaussian-conjugated pencil
# --------------------------------------------------------------------------

def _ou_mode_pencil(g: DiskGrid, R: float, m: int):
    """Pencil (A, B) for mode m with Omega = w * Omega_hat, w = e^{-(Rr)^2/4}.

    Unknowns x = [psi, Omega_hat].  Conjugation maps the drift operator
    -Delta - R^2 - (R^2/2) r d/dr exactly to the Ornstein-Uhlenbeck form
    -Delta + (R^2/2) r d/dr, so the vorticity rows read
    N Omega_hat = lambda R^2 Omega_hat with N = -L + (R^2/2) diag(r) D1.
    The kinematic rows keep the weight: L psi = w Omega_hat.  The two
    outermost vorticity rows carry the clamped conditions on psi.

    The blocks are assembled with nodes ordered boundary-first (decreasing
    radius).  The QZ iteration is not permutation-invariant in floating
    point, and with the pole-dominated rows last the small Gaussian-core
    eigenvalues come out polluted at the 1e-2 level; boundary-first
    ordering reproduces them to discretization accuracy.
    """
    n = g.n_r
    flip = np.arange(n)[::-1]
    r = g.radii[flip]
    L = g.lap_m(m)[np.ix_(flip, flip)]
    D1 = g.d1(m)[np.ix_(flip, flip)]
    w = np.exp(-(R * r) ** 2 / 4.0)
    N = -L + (R**2 / 2.0) * (r[:, None] * D1)
    A = np.zeros((2 * n, 2 * n))
    B = np.zeros((2 * n, 2 * n))
    A[:n, n:] = N
    B[:n, n:] = R**2 * np.eye(n)
    A[n:, :n] = L
    A[n:, n:] = -np.diag(w)
    # clamped boundary pair replaces the outermost vorticity rows
    # (boundary node is row/column 0 in this ordering)
    A[0, :] = 0.0
    A[0, 0] = 1.0
    B[0, :] = 0.0
    A[1, :] = 0.0
    A[1, :n] = D1[0, :]
    B[1, :] = 0.0
    return A, B


def _stokes_mode_eigs(g: DiskGrid, R: float, m: int,
                      window: tuple = (-0.5, 8.0)) -> np.ndarray:
    A, B = _ou_mode_pencil(g, R, m)
    w = eig(A, B, right=False)
    w = w[np.isfinite(w)]
    w = w[(w.real > window[0]) & (w.real < window[1])
          & (np.abs(w.imag) < 1e-6 * (1.0 + np.abs(w.real)))]
    return np.sort(w.real)


def stokes_spectrum(R: float, *, max_mode: int = 8, nkeep: int = 16,
                    n_r: int = EIG_N_R,
                    map_strength: float = EIG_MAP_STRENGTH,
                    certify: bool = True,
                    certify_tol: float = 1e-4) -> SpectrumResult:
    """Eigenvalues of the zero-amplitude pencil, smallest first.

    Modes m and -m give identical radial problems, so every m > 0
    eigenvalue carries multiplicity 2 (cosine/sine pair).  With
    certify=True each eigenvalue is recomputed at a finer radial
    resolution and kept only if it moves by less than certify_tol;
    the movement is reported as `drift`.
    """
    g1 = build_grid(n_r, 8, map_strength)
    g2 = build_grid(n_r + 32, 8, map_strength) if certify else None
    found = []
    for m in range(max_mode + 1):
        lam1 = _stokes_mode_eigs(g1, R, m)
        if certify:
            lam2 = _stokes_mode_eigs(g2, R, m)
        for lv in lam1[:nkeep]:
            drift = 0.0
            if certify:
                if lam2.size == 0:
                    continue
                drift = float(np.min(np.abs(lam2 - lv)))
                if drift > certify_tol:
                    continue
            found.append(Eigenvalue(value=complex(lv), mode=m,
                                    multiplicity=1 if m == 0 else 2,
                                    drift=drift))
    found.sort(key=lambda e: e.value.real)
    return SpectrumResult(sigma=0.0, R=R, eigenvalues=found[:4 * nkeep])


# --------------------------------------------------------------------------
# sigma > 0: matrix-free shift-invert Arnoldi on the full pencil
# --------------------------------------------------------------------------

def _refine_state(state: FlowState, n_r: int, map_strength: float):
    """Base state interpolated onto the internally refined grid."""
    g = build_grid(n_r, state.grid.n_theta, map_strength)
    psi = resample_psi(state.grid, state.psi, state.R, g, state.R)
    op = LerayOperator(g, state.R)
    return op, op.apply_boundary_data(psi)


def _sector_projector(sector: str):
    if sector == "symmetric":
        return symmetric_part
    if sector == "antisymmetric":
        return antisymmetric_part
    return None


def leading_spectrum(state: FlowState, *, shift: float = 0.05,
                     k: int = 6, sector: str = "full",
                     n_r: int = EIG_N_R,
                     map_strength: float = EIG_MAP_STRENGTH,
                     gmres_tol: float = 1e-10,
                     return_vectors: bool = False) -> SpectrumResult:
    """Eigenvalues of the pencil near `shift` about a converged state.

    Shift-invert Arnoldi: Arnoldi on (A - shift R^2 B)^{-1} (R^2 B), with
    the inverse applied by preconditioned GMRES.  `sector` restricts the
    operator to the R-symmetric or R-antisymmetric invariant subspace
    (valid when the base state is symmetric).
    """
    op, psi = _refine_state(state, n_r, map_strength)
    g = op.grid
    sigma, R = state.sigma, state.R
    psi_m = op.to_modes(psi)
    shape = (g.n_r, g.n_theta)
    nn = shape[0] * shape[1]
    proj = _sector_projector(sector)

    prec = op.stokes_preconditioner(sigma, psi_m, shift=shift)
    M = LinearOperator((nn, nn),
                       matvec=lambda v: prec(v.reshape(shape)).ravel())

    def b_matvec(values):
        bm = op.omega_modes(op.to_modes(values))
        bm[op.i_bc_d, :] = 0.0
        bm[op.i_bc_n, :] = 0.0
        return op.to_values(bm)

    def a_shift_matvec(v):
        values = v.reshape(shape)
        if proj is not None:
            values = proj(values)
        out = op.jacobian_matvec(psi_m, sigma, values) \
            - (shift * R**2) * b_matvec(values)
        if proj is not None:
            out = proj(out)
        return out.ravel()

    Ashift = LinearOperator((nn, nn), matvec=a_shift_matvec)

    def op_matvec(v):
        rhs = b_matvec(v.reshape(shape) if proj is None
                       else proj(v.reshape(shape))) * R**2
        if proj is not None:
            rhs = proj(rhs)
        sol, info = gmres(Ashift, rhs.ravel(), rtol=gmres_tol, atol=0.0,
                          restart=200, maxiter=3, M=M)
        if proj is not None:
            sol = proj(sol.reshape(shape)).ravel()
        return sol

    OP = LinearOperator((nn, nn), matvec=op_matvec)
    v0 = np.cos(1.7 * np.arange(nn)) + 0.5
    if proj is not None:
        v0 = proj(v0.reshape(shape)).ravel()
    mu, V = eigs(OP, k=k, which="LM", v0=v0, maxiter=max(40 * k, 300))
    lam = shift + 1.0 / mu

    result = SpectrumResult(sigma=sigma, R=R)
    order = np.argsort(lam.real)
    for rank, i in enumerate(order):
        phi = V[:, i].real.reshape(shape)
        nphi = np.linalg.norm(phi)
        if nphi == 0.0:   # conjugate-pair partner with imaginary vector
            phi = V[:, i].imag.reshape(shape)
            nphi = np.linalg.norm(phi)
        phi = phi / nphi
        r_a = op.jacobian_matvec(psi_m, sigma, phi) \
            - lam[i].real * R**2 * b_matvec(phi)
        res = float(np.linalg.norm(r_a) /
                    max(np.linalg.norm(R**2 * b_matvec(phi)), 1e-300))
        afrac = np.linalg.norm(antisymmetric_part(phi)) / np.linalg.norm(phi)
        sect = "antisymmetric" if afrac > 0.5 else "symmetric"
        result.eigenvalues.append(Eigenvalue(
            value=complex(lam[i]), mode=None, residual=res, sector=sect))
        if return_vectors:
            result.vectors[rank] = resample_psi(
                g, phi, R, state.grid, R)
    return result


# --------------------------------------------------------------------------
# critical amplitude: zero crossing of the soft antisymmetric eigenvalue
# --------------------------------------------------------------------------

@dataclass
class CriticalPoint:
    sigma0: float
    eigenvalue: float          # residual eigenvalue at sigma0 (near zero)
    kernel_dim: int
    kernel: np.ndarray         # kernel streamfunction on the state's grid
    bracket: tuple
    history: list              # (sigma, lambda_min) pairs


def _soft_eigenvalue(state: FlowState, **kw):
    """Smallest-real antisymmetric-sector eigenvalue and its vector."""
    res = leading_spectrum(state, shift=0.02, k=4, sector="antisymmetric",
                           return_vectors=True, **kw)
    idx = int(np.argmin([e.value.real for e in res.eigenvalues]))
    lam = res.eigenvalues[idx].value.real
    near = sum(1 for e in res.eigenvalues
               if abs(e.value.real - lam) < 1e-3)
    return lam, res.vectors[idx], near


def find_critical(sigma_lo: float = 35.0, sigma_hi: float = 45.0, *,
                  tol: float = 0.02, n_r: int = 48, n_theta: int = 64,
                  log=None) -> CriticalPoint:
    """Locate the symmetry-breaking bifurcation on the symmetric branch.

    Tracks the smallest antisymmetric-sector eigenvalue of the pencil
    along the symmetric branch and bisects its zero crossing in sigma.
    """
    from .continuation import solve_at

    history = []
    cache = {}

    def branch_state(s):
        if s not in cache:
            base = max((x for x in cache if x < s), default=None)
            cache[s] = solve_at(s, n_r=n_r, n_theta=n_theta,
                                symmetric=True, log=log,
                                start=None if base is None else cache[base])
        return cache[s]

    def eigmin(s):
        lam, vec, near = _soft_eigenvalue(branch_state(s))
        history.append((s, lam))
        if log is not None:
            log(f"find-critical: sigma={s:.4f} lambda_min={lam:.6f}")
        return lam, vec, near

    lo, hi = float(sigma_lo), float(sigma_hi)
    f_lo, vec, near = eigmin(lo)
    f_hi, vec_hi, near_hi = eigmin(hi)
    if f_lo * f_hi > 0:
        raise RuntimeError(
            f"no eigenvalue sign change on [{sigma_lo}, {sigma_hi}] "
            f"(lambda({lo})={f_lo:.4f}, lambda({hi})={f_hi:.4f})")
    lam_mid = f_lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lam_mid, vec, near = eigmin(mid)
        if lam_mid * f_lo > 0:
            lo, f_lo = mid, lam_mid
        else:
            hi, f_hi = mid, lam_mid
    sigma0 = 0.5 * (lo + hi)
    return CriticalPoint(sigma0=sigma0, eigenvalue=lam_mid,
                         kernel_dim=near, kernel=vec,
                         bracket=(lo, hi), history=history)
