"""Polar pseudospectral collocation on the unit disk.

Fourier in the angle, Chebyshev-type collocation in radius.  The radial
nodes are the positive half of the symmetric Chebyshev point set
t_j = cos(j*pi/(2*n_r - 1)), j = 0 .. 2*n_r - 1, mapped through

    r = g(t) = sinh(a*t) / sinh(a),

which clusters nodes at both r = 0 and r = 1 and pins r = 1 exactly.
The node r = 0 never appears; each angular mode m is differentiated with
the radial operator restricted to functions of parity (-1)**m about r = 0
("parity folding"), which removes the coordinate singularity without
one-sided stencils.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_MAP_STRENGTH = 5.4

# Fourier columns in diagnostic operators whose magnitude is below this
# fraction of the global coefficient scale are zeroed: they are float64
# rounding noise, and the m^2/r^2 pole terms would otherwise amplify them
# above the truncation error of well-resolved fields.
_COLUMN_NOISE_THRESHOLD = 1e-13


def _cheb_nodes_matrix(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev points x_k = cos(k*pi/N) and differentiation matrix, k=0..N.

    Off-diagonal entries use the trigonometric form of the node differences
    and the diagonal uses the negative-sum trick, both of which reduce
    rounding error at the clustered ends.
    """
    k = np.arange(N + 1)
    x = np.cos(np.pi * k / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** k
    i = k[:, None]
    j = k[None, :]
    dX = -2.0 * np.sin((i + j) * np.pi / (2 * N)) * np.sin((i - j) * np.pi / (2 * N))
    np.fill_diagonal(dX, 1.0)
    D = np.outer(c, 1.0 / c) / dX
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return x, D


def _radial_moments(n_nodes: int, a: float) -> np.ndarray:
    """Moments m_k = 2 * int_0^1 T_k(t) g(t) g'(t) dt for k = 0..n_nodes-1.

    Used to build quadrature weights for int_0^1 f(r) r dr.  The integrands
    are entire, so a high-order Gauss-Legendre rule is exact to machine
    precision.
    """
    ng = max(4 * n_nodes, 200)
    xg, wg = np.polynomial.legendre.leggauss(ng)
    t = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    sa = np.sinh(a)
    g = np.sinh(a * t) / sa
    gp = a * np.cosh(a * t) / sa
    k = np.arange(n_nodes)
    Tk = np.cos(k[:, None] * np.arccos(np.clip(t, -1, 1))[None, :])
    return 2.0 * Tk @ (w * g * gp)


class SizingError(ValueError):
    """Grid sizes outside the supported range."""


@dataclass(frozen=True)
class DiskGrid:
    """Immutable polar collocation grid on the unit disk."""

    n_r: int
    n_theta: int
    map_strength: float
    radii: np.ndarray          # strictly increasing, radii[-1] == 1.0
    thetas: np.ndarray         # theta_j = 2*pi*j / n_theta
    quad_w: np.ndarray         # radial weights for int_0^1 f(r) r dr
    _t: np.ndarray = field(repr=False)          # t-nodes, same order as radii
    _gp: np.ndarray = field(repr=False)         # g'(t) at the kept nodes
    _Dt: np.ndarray = field(repr=False)         # full symmetric-set Chebyshev D
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -----------------------------------------------------

    @staticmethod
    def build(n_r: int, n_theta: int,
              map_strength: float = DEFAULT_MAP_STRENGTH) -> "DiskGrid":
        if n_r < 8:
            raise SizingError(f"n_r must be >= 8, got {n_r}")
        if n_theta < 8:
            raise SizingError(f"n_theta must be >= 8, got {n_theta}")
        if n_theta % 2 != 0:
            raise SizingError(f"n_theta must be even, got {n_theta}")
        N = 2 * n_r - 1
        x, Dt = _cheb_nodes_matrix(N)
        a = float(map_strength)
        sa = np.sinh(a)
        # keep the positive half, ordered by increasing radius;
        # x[0] = 1 exactly, so reversing puts the boundary node last.
        t = x[:n_r][::-1].copy()
        g = np.sinh(a * t) / sa
        g[-1] = 1.0  # sinh(a)/sinh(a), pinned exactly
        gp = a * np.cosh(a * t) / sa
        thetas = 2.0 * np.pi * np.arange(n_theta) / n_theta
        quad_w = DiskGrid._quad_weights(n_r, a, t)
        for arr in (t, g, gp, thetas, quad_w):
            arr.setflags(write=False)
        Dt.setflags(write=False)
        return DiskGrid(n_r=n_r, n_theta=n_theta, map_strength=a,
                        radii=g, thetas=thetas, quad_w=quad_w,
                        _t=t, _gp=gp, _Dt=Dt)

    @staticmethod
    def _quad_weights(n_r: int, a: float, t: np.ndarray) -> np.ndarray:
        """Weights w_i with sum_i w_i f(r_i) = int_0^1 f(r) r dr exactly for
        f in the (even-extended) collocation space."""
        N = 2 * n_r - 1
        # Cardinal function of node i, even-extended to the symmetric set,
        # expanded in Chebyshev polynomials; its integral against g g' dt is
        # the weight.  Even extension: value 1 at t_i and at -t_i.
        n_full = N + 1
        moments = _radial_moments(n_full, a)
        # Chebyshev analysis matrix on the full symmetric grid x_k=cos(k pi/N)
        k = np.arange(n_full)
        # DCT-I style: c_j = (2/N) * sum'' f(x_k) T_j(x_k)
        T = np.cos(np.pi * np.outer(k, k) / N)
        scale = np.full(n_full, 2.0 / N)
        edge = np.ones(n_full)
        edge[0] = edge[-1] = 0.5
        # coefficients of f: c = scale * T @ (edge * f), with c_0, c_N halved
        w = np.empty(n_r)
        for i in range(n_r):
            f = np.zeros(n_full)
            # node i (increasing order) corresponds to full index n_r-1-i
            f[n_r - 1 - i] = 1.0
            f[n_full - 1 - (n_r - 1 - i)] += 1.0  # mirror (even extension)
            c = scale * (T @ (edge * f))
            c[0] *= 0.5
            c[-1] *= 0.5
            # the even extension counts each half-grid node twice
            w[i] = 0.5 * (c @ moments)
        return w

    # -- radial operators --------------------------------------------------

    def _fold(self, sign: int) -> np.ndarray:
        """Half-grid restriction of the full differentiation matrix for
        functions with f(-t) = sign * f(t)."""
        key = ("fold", sign)
        if key not in self._cache:
            n = self.n_r
            N = 2 * n - 1
            # rows: kept nodes in increasing-radius order = full indices
            # n-1-i; columns folded with the mirror node N - j.
            idx = n - 1 - np.arange(n)
            Dt = self._Dt
            M = Dt[np.ix_(idx, idx)] + sign * Dt[np.ix_(idx, N - idx)]
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    def d1(self, m: int) -> np.ndarray:
        """First radial derivative for angular mode m (parity (-1)**m)."""
        key = ("d1", m % 2)
        if key not in self._cache:
            p = (-1) ** (m % 2)
            M = (1.0 / self._gp)[:, None] * self._fold(p)
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    def d2(self, m: int) -> np.ndarray:
        """Second radial derivative for angular mode m."""
        key = ("d2", m % 2)
        if key not in self._cache:
            p = (-1) ** (m % 2)
            M = ((1.0 / self._gp)[:, None] * self._fold(-p)) @ self.d1(m)
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    def lap_m(self, m: int) -> np.ndarray:
        """Radial part of the Laplacian for angular mode m:
        d2 + (1/r) d1 - m^2/r^2."""
        key = ("lap", m)
        if key not in self._cache:
            r = self.radii
            M = self.d2(m) + (1.0 / r)[:, None] * self.d1(m)
            if m != 0:
                M = M - np.diag((m * m) / (r * r))
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    # -- interpolation -----------------------------------------------------

    def radial_interp(self, values: np.ndarray, m: int,
                      r_new: np.ndarray) -> np.ndarray:
        """Evaluate the mode-m radial interpolant at new radii in [0, 1].

        `values` has shape (n_r,) or (n_r, k) on this grid's radii.
        Uses barycentric interpolation on the parity-extended symmetric set.
        """
        from scipy.interpolate import BarycentricInterpolator
        p = (-1) ** (m % 2)
        n = self.n_r
        N = 2 * n - 1
        t_full = np.empty(N + 1)
        t_full[:n] = self._t[::-1]          # decreasing positive half
        t_full[n:] = -self._t               # increasing negative half
        vals = np.atleast_2d(values.T).T    # (n_r, k)
        v_full = np.empty((N + 1,) + vals.shape[1:], dtype=vals.dtype)
        v_full[:n] = vals[::-1]
        v_full[n:] = p * vals
        a = self.map_strength
        t_new = np.arcsinh(np.asarray(r_new) * np.sinh(a)) / a
        out = BarycentricInterpolator(t_full, v_full)(t_new)
        return out if values.ndim > 1 else np.asarray(out).reshape(np.shape(r_new))


def build_grid(n_r: int, n_theta: int,
               map_strength: float = DEFAULT_MAP_STRENGTH) -> DiskGrid:
    """Public constructor: see DiskGrid.build."""
    return DiskGrid.build(n_r, n_theta, map_strength)


@dataclass
class ScalarField:
    """A scalar function on a DiskGrid: nodal values values[i, j] =
    f(radii[i], thetas[j]), plus a Fourier-coefficient view."""

    grid: DiskGrid
    values: np.ndarray
    parity_checked: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_r, self.grid.n_theta):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_r}, {self.grid.n_theta})")

    def enforce_parity(self) -> "ScalarField":
        """Mark the field pole-regular.

        On the half-grid the mode-m radial profile is *represented* with
        parity (-1)**m about r = 0 by construction (the differentiation
        operators fold with that parity), so enforcement amounts to
        validating finiteness and flagging the field.
        """
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite nodal values")
        self.parity_checked = True
        return self

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.parity_checked)


def fourier_analyze(f: ScalarField) -> np.ndarray:
    """Discrete Fourier transform along theta; returns complex coefficients
    c[i, m] with f(r_i, theta_j) = sum_m c[i, m] exp(i m theta_j)
    (m runs over the standard FFT ordering, negative modes in the top half).
    """
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite nodal values")
    return np.fft.fft(f.values, axis=1) / f.grid.n_theta


def fourier_synthesize(grid: DiskGrid, coeffs: np.ndarray) -> ScalarField:
    """Inverse of fourier_analyze."""
    vals = np.fft.ifft(coeffs * grid.n_theta, axis=1)
    return ScalarField(grid, vals.real)


def _mode_numbers(n_theta: int) -> np.ndarray:
    return np.fft.fftfreq(n_theta, d=1.0 / n_theta).astype(int)


def _threshold_columns(coeffs: np.ndarray) -> np.ndarray:
    gmax = np.abs(coeffs).max()
    if gmax == 0.0:
        return coeffs
    out = coeffs.copy()
    colmax = np.abs(out).max(axis=0)
    out[:, colmax < _COLUMN_NOISE_THRESHOLD * gmax] = 0.0
    return out


def _require_parity(f: ScalarField):
    if not f.parity_checked:
        raise ValueError("field must be parity-enforced (call enforce_parity)")


def gradient_polar(f: ScalarField) -> tuple[ScalarField, ScalarField]:
    """Return (df/dr, (1/r) df/dtheta), both finite at all nodes."""
    _require_parity(f)
    g = f.grid
    c = _threshold_columns(fourier_analyze(f))
    modes = _mode_numbers(g.n_theta)
    dr = np.empty_like(c)
    dth = np.empty_like(c)
    inv_r = 1.0 / g.radii
    for col, m in enumerate(modes):
        am = abs(m)
        dr[:, col] = g.d1(am) @ c[:, col]
        dth[:, col] = (1j * m) * (inv_r * c[:, col])
    fr = fourier_synthesize(g, dr).enforce_parity()
    ft = fourier_synthesize(g, dth).enforce_parity()
    return fr, ft


def laplacian_polar(f: ScalarField) -> ScalarField:
    """Return Delta f = f_rr + (1/r) f_r + (1/r^2) f_theta_theta."""
    _require_parity(f)
    g = f.grid
    c = _threshold_columns(fourier_analyze(f))
    modes = _mode_numbers(g.n_theta)
    out = np.empty_like(c)
    for col, m in enumerate(modes):
        out[:, col] = g.lap_m(abs(m)) @ c[:, col]
    return fourier_synthesize(g, out).enforce_parity()


def integrate_disk(f: ScalarField) -> float:
    """Quadrature of int_disk f dA = int_0^1 int_0^2pi f(r,th) r dth dr."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite nodal values")
    g = f.grid
    return float((2.0 * np.pi / g.n_theta) * (g.quad_w @ f.values.sum(axis=1)))
