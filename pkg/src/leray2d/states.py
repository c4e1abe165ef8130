"""Flow states, domain-radius schedule, symmetry helpers, and resampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import DiskGrid, build_grid
from .operator import LerayOperator


def domain_radius(sigma: float) -> float:
    """R(sigma) = 100 sqrt(1 + sigma/80)."""
    return 100.0 * np.sqrt(1.0 + abs(sigma) / 80.0)


@dataclass
class FlowState:
    """One converged solution of the rescaled Leray problem."""

    sigma: float
    R: float
    grid: DiskGrid
    psi: np.ndarray               # nodal streamfunction, (n_r, n_theta)
    residual_norm: float
    symmetry: str = "unknown"     # 'symmetric' | 'asymmetric' | 'unknown'

    def operator(self) -> LerayOperator:
        return LerayOperator(self.grid, self.R)

    def omega(self) -> np.ndarray:
        op = self.operator()
        return op.to_values(op.omega_modes(op.to_modes(self.psi)))

    def velocity(self) -> tuple[np.ndarray, np.ndarray]:
        op = self.operator()
        return op.velocity(op.to_modes(self.psi))


# -- symmetry ----------------------------------------------------------------

def reflect_image(values: np.ndarray) -> np.ndarray:
    """The R-symmetry image: (R psi)(r, theta) = -psi(r, -theta).

    R is the reflection across the horizontal axis; it maps solutions to
    solutions at the same sigma and fixes the boundary datum.
    """
    n = values.shape[1]
    idx = (-np.arange(n)) % n
    return -values[:, idx]


def conjugate_image(values: np.ndarray) -> np.ndarray:
    """The sigma -> -sigma conjugacy image: psi(r, theta) -> psi(r, pi - theta).

    Reflection across the vertical axis preserves the boundary datum
    (sin(pi - theta) = sin(theta)) and reverses the sign of the quadratic
    advection term, so it maps sigma-solutions to (-sigma)-solutions.
    """
    n = values.shape[1]
    idx = (n // 2 - np.arange(n)) % n
    return values[:, idx]


def symmetric_part(values: np.ndarray) -> np.ndarray:
    """Projection onto the R-symmetric sector (pure sine series in theta)."""
    return 0.5 * (values + reflect_image(values))


def antisymmetric_part(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values - reflect_image(values))


def asymmetry_amplitude(grid: DiskGrid, values: np.ndarray) -> float:
    """L2 norm over the disk of the R-antisymmetric component."""
    from .grid import ScalarField, integrate_disk
    anti = antisymmetric_part(values)
    return float(np.sqrt(integrate_disk(ScalarField(grid, anti**2))))


def l2_norm(grid: DiskGrid, values: np.ndarray) -> float:
    from .grid import ScalarField, integrate_disk
    return float(np.sqrt(integrate_disk(ScalarField(grid, values**2))))


def relative_l2_distance(grid: DiskGrid, a: np.ndarray, b: np.ndarray) -> float:
    return l2_norm(grid, a - b) / max(l2_norm(grid, a), l2_norm(grid, b), 1e-300)


# -- resampling ----------------------------------------------------------------

def resample_psi(grid_old: DiskGrid, psi_old: np.ndarray, R_old: float,
                 grid_new: DiskGrid, R_new: float) -> np.ndarray:
    """Resample a streamfunction between domain radii / grids.

    The new field is psi_new(r, th) = psi_old(r * R_new / R_old, th) for
    arguments inside the old disk; outside it the state is clamped to the
    boundary-datum extension, whose streamfunction is sin(theta) at every
    domain radius under the adopted rescaling.
    """
    ratio = R_new / R_old
    r_query = grid_new.radii * ratio
    inside = r_query <= 1.0
    c_old = np.fft.fft(psi_old, axis=1) / grid_old.n_theta
    n_t_new = grid_new.n_theta
    c_new = np.zeros((grid_new.n_r, n_t_new), dtype=complex)
    modes_old = np.fft.fftfreq(grid_old.n_theta, 1.0 / grid_old.n_theta).astype(int)
    modes_new = np.fft.fftfreq(n_t_new, 1.0 / n_t_new).astype(int)
    col_of_new_mode = {m: i for i, m in enumerate(modes_new)}
    # boundary-datum extension coefficients: sin(theta)
    ext = {1: -0.5j, -1: 0.5j}
    for col_old, m in enumerate(modes_old):
        if m not in col_of_new_mode:
            continue
        col_new = col_of_new_mode[m]
        vals = np.zeros(grid_new.n_r, dtype=complex)
        if np.any(inside):
            re = grid_old.radial_interp(c_old[:, col_old].real, m,
                                        r_query[inside])
            im = grid_old.radial_interp(c_old[:, col_old].imag, m,
                                        r_query[inside])
            vals[inside] = re + 1j * im
        if np.any(~inside):
            vals[~inside] = ext.get(m, 0.0)
        c_new[:, col_new] = vals
    return np.fft.ifft(c_new * n_t_new, axis=1).real


def resample_to_grid(state: FlowState, grid_new: DiskGrid,
                     R_new: float | None = None) -> np.ndarray:
    return resample_psi(state.grid, state.psi, state.R, grid_new,
                        R_new if R_new is not None else state.R)
