"""Deterministic SVG figures: field magnitude with streamlines, spectrum
curves, and the bifurcation diagram.

Everything is hand-rolled on purpose: fixed inputs must produce
byte-identical SVG.  The color raster is embedded as an uncompressed-level
zlib PNG; streamlines are psi-contours extracted by marching squares
(exact streamlines of a steady 2D flow); axes and curves are plain SVG
primitives.
"""

from __future__ import annotations

import base64
import struct
import zlib

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import _mode_numbers
from .states import FlowState

RASTER_N = 512


# --------------------------------------------------------------------------
# Cartesian resampling
# --------------------------------------------------------------------------

def resample_cartesian(state_grid, values: np.ndarray,
                       n: int = RASTER_N) -> np.ndarray:
    """Resample polar nodal values onto an n x n Cartesian raster over
    [-1,1]^2 (points outside the disk are NaN; row 0 is y = -1).

    Angular direction: exact Fourier synthesis.  Radial direction: the
    spectral (barycentric) interpolant sampled onto a dense uniform grid,
    then cubic interpolation.  Everything here is deterministic and
    commutes with the grid's mirror symmetries to rounding accuracy.
    """
    g = state_grid
    r_dense = np.linspace(0.0, 1.0, 4097)
    vm = np.fft.fft(values, axis=1) / g.n_theta
    modes = _mode_numbers(g.n_theta)
    dense = np.empty((r_dense.size, g.n_theta), dtype=complex)
    for col, m in enumerate(modes):
        dense[:, col] = g.radial_interp(vm[:, col].astype(complex),
                                        abs(m), r_dense)

    x = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(x, x)
    R = np.hypot(X, Y)
    T = np.arctan2(Y, X)
    inside = R <= 1.0
    r_flat = R[inside]
    t_flat = T[inside]
    spline = CubicSpline(r_dense, dense, axis=0)
    fm = spline(r_flat)                        # (npts, n_theta) mode values
    out_vals = np.zeros(r_flat.size)
    for col, m in enumerate(modes):
        out_vals += (fm[:, col] * np.exp(1j * m * t_flat)).real
    Z = np.full((n, n), np.nan)
    Z[inside] = out_vals
    return Z


def speed_magnitude(state: FlowState) -> np.ndarray:
    """|ytilde| * |Utilde| on the polar grid."""
    op = state.operator()
    ur, ut = op.velocity(op.to_modes(state.psi))
    return state.grid.radii[:, None] * np.hypot(ur, ut)


# --------------------------------------------------------------------------
# tiny PNG writer (for the embedded raster)
# --------------------------------------------------------------------------

def _png_bytes(rgb: np.ndarray) -> bytes:
    """rgb: (h, w, 3) uint8."""
    h, w, _ = rgb.shape

    def chunk(tag, payload):
        out = struct.pack(">I", len(payload)) + tag + payload
        return out + struct.pack(">I", zlib.crc32(tag + payload))

    raw = b"".join(b"\0" + rgb[i].tobytes() for i in range(h))
    return (b"\x89PNG\r\n\x1a\n"
            + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw, 6))
            + chunk(b"IEND", b""))


# viridis-like ramp (anchor colors, linear interpolation)
_RAMP = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140],
    [94, 201, 98], [253, 231, 37]], dtype=float)


def _colorize(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """NaN-aware color mapping to uint8 RGB (NaN -> white)."""
    t = (values - vmin) / max(vmax - vmin, 1e-300)
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0) * (len(_RAMP) - 1)
    i = np.minimum(t.astype(int), len(_RAMP) - 2)
    f = (t - i)[..., None]
    rgb = _RAMP[i] * (1.0 - f) + _RAMP[i + 1] * f
    rgb[np.isnan(values)] = 255.0
    return rgb.astype(np.uint8)


# --------------------------------------------------------------------------
# field + streamlines figure
# --------------------------------------------------------------------------

def plot_field(state: FlowState, out_path: str, *, n_levels: int = 15,
               raster_n: int = RASTER_N) -> None:
    """Color map of |ytilde||Utilde| with streamlines (psi contours at
    n_levels evenly spaced interior levels)."""
    from skimage.measure import find_contours

    mag = resample_cartesian(state.grid, speed_magnitude(state), raster_n)
    psi = resample_cartesian(state.grid, state.psi, raster_n)
    finite = mag[np.isfinite(mag)]
    vmin, vmax = (float(finite.min()), float(finite.max())) \
        if finite.size else (0.0, 1.0)
    rgb = _colorize(mag[::-1], vmin, vmax)          # image rows top-down
    png64 = base64.b64encode(_png_bytes(rgb)).decode()

    pf = psi[np.isfinite(psi)]
    lines = []
    if pf.size and pf.max() - pf.min() > 1e-14:
        levels = np.linspace(pf.min(), pf.max(), n_levels + 2)[1:-1]
        work = psi.copy()
        for lev in levels:
            for contour in find_contours(work, lev):
                # contour[:, 0] = row (y index), [:,1] = col (x index)
                px = contour[:, 1] / (raster_n - 1) * 1000.0
                py = (1.0 - contour[:, 0] / (raster_n - 1)) * 1000.0
                pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
                lines.append(
                    f'<polyline points="{pts}" fill="none" '
                    f'stroke="white" stroke-width="1.2" opacity="0.8"/>')

    svg = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" '
        'xmlns:xlink="http://www.w3.org/1999/xlink" '
        'width="1000" height="1000" viewBox="0 0 1000 1000">',
        f'<title>sigma={state.sigma:g} R={state.R:g} '
        f'{state.symmetry}</title>',
        '<rect width="1000" height="1000" fill="white"/>',
        '<clipPath id="disk"><circle cx="500" cy="500" r="499"/></clipPath>',
        '<g clip-path="url(#disk)">',
        f'<image x="0" y="0" width="1000" height="1000" '
        f'xlink:href="data:image/png;base64,{png64}"/>',
        *lines,
        '</g>',
        '<circle cx="500" cy="500" r="499" fill="none" stroke="black" '
        'stroke-width="2"/>',
        '</svg>', '']
    _write(out_path, "\n".join(svg))


# --------------------------------------------------------------------------
# simple line charts (spectrum, bifurcation)
# --------------------------------------------------------------------------

_W, _H, _ML, _MB, _MT, _MR = 900, 600, 80, 60, 30, 30


def _xmap(x, lo, hi):
    return _ML + (x - lo) / max(hi - lo, 1e-300) * (_W - _ML - _MR)


def _ymap(y, lo, hi):
    return _H - _MB - (y - lo) / max(hi - lo, 1e-300) * (_H - _MB - _MT)


def _chart_frame(title, xlo, xhi, ylo, yhi, xlabel, ylabel):
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<title>{title}</title>',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MB - _MT}" fill="none" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 15}" '
        f'text-anchor="middle" font-size="16">{xlabel}</text>',
        f'<text x="20" y="{(_MT + _H - _MB) / 2:.0f}" font-size="16" '
        f'text-anchor="middle" transform="rotate(-90 20 '
        f'{(_MT + _H - _MB) / 2:.0f})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = xlo + frac * (xhi - xlo)
        yv = ylo + frac * (yhi - ylo)
        parts.append(f'<text x="{_xmap(xv, xlo, xhi):.1f}" y="{_H - _MB + 18}" '
                     f'text-anchor="middle" font-size="12">{xv:.3g}</text>')
        parts.append(f'<text x="{_ML - 8}" y="{_ymap(yv, ylo, yhi):.1f}" '
                     f'text-anchor="end" font-size="12">{yv:.3g}</text>')
    return parts


def _imag_color(aim: float, amax: float) -> str:
    t = min(aim / max(amax, 1e-300), 1.0)
    r = int(30 + 200 * t)
    return f"rgb({r},40,{int(180 - 140 * t)})"


def plot_spectrum(reports: list, out_path: str) -> None:
    """Re(lambda) versus sigma, one polyline per tracked curve, colored by
    |Im lambda|; zero line; sign crossings annotated; reference gridlines
    at 1, 1.5, 2, ... ."""
    if len(reports) < 2:
        raise ValueError("need at least two spectrum reports")
    reports = sorted(reports, key=lambda r: r.sigma)
    sig = [r.sigma for r in reports]
    k = min(len(r.eigenvalues) for r in reports)
    # nearest-neighbor curve matching in the complex plane
    curves = [[(reports[0].sigma, e.value)]
              for e in reports[0].eigenvalues[:k]]
    for rep in reports[1:]:
        avail = [e.value for e in rep.eigenvalues]
        for c in curves:
            prev = c[-1][1]
            j = int(np.argmin([abs(v - prev) for v in avail]))
            c.append((rep.sigma, avail.pop(j)))

    vals = [v for c in curves for _, v in c]
    ylo = min(min(v.real for v in vals), 0.0) - 0.1
    yhi = max(v.real for v in vals) + 0.1
    amax = max((abs(v.imag) for v in vals), default=1.0)
    parts = _chart_frame("spectrum", sig[0], sig[-1], ylo, yhi,
                         "sigma", "Re(lambda)")
    for ref in np.arange(1.0, yhi, 0.5):
        y = _ymap(ref, ylo, yhi)
        parts.append(f'<line x1="{_ML}" y1="{y:.1f}" x2="{_W - _MR}" '
                     f'y2="{y:.1f}" stroke="#cccccc" stroke-width="0.6"/>')
    y0 = _ymap(0.0, ylo, yhi)
    if ylo < 0.0 < yhi:
        parts.append(f'<line x1="{_ML}" y1="{y0:.1f}" x2="{_W - _MR}" '
                     f'y2="{y0:.1f}" stroke="black" stroke-width="1.4"/>')
    for c in curves:
        aim = float(np.mean([abs(v.imag) for _, v in c]))
        pts = " ".join(f"{_xmap(s, sig[0], sig[-1]):.1f},"
                       f"{_ymap(v.real, ylo, yhi):.1f}" for s, v in c)
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{_imag_color(aim, amax)}" '
                     f'stroke-width="1.6"/>')
        for (s1, v1), (s2, v2) in zip(c, c[1:]):
            if v1.real * v2.real < 0:
                sc = s1 + (s2 - s1) * v1.real / (v1.real - v2.real)
                xc = _xmap(sc, sig[0], sig[-1])
                parts.append(f'<circle cx="{xc:.1f}" cy="{y0:.1f}" r="5" '
                             'fill="none" stroke="red" stroke-width="2"/>')
                parts.append(f'<text x="{xc + 8:.1f}" y="{y0 - 8:.1f}" '
                             f'font-size="13" fill="red">sigma0 = '
                             f'{sc:.2f}</text>')
    parts += ['</svg>', '']
    _write(out_path, "\n".join(parts))


def plot_bifurcation(points: list, out_path: str) -> None:
    """points: (sigma, asymmetry s, branch label) triples."""
    if not points:
        raise ValueError("no points to plot")
    sig = [p[0] for p in points]
    sv = [p[1] for p in points]
    xlo, xhi = min(sig), max(sig)
    yhi = max(max(sv), 1e-6) * 1.1
    parts = _chart_frame("bifurcation diagram", xlo, xhi, 0.0, yhi,
                         "sigma", "asymmetry s")
    colors = {"symmetric": "#1f588f"}
    by_label = {}
    for s, v, lab in points:
        by_label.setdefault(lab, []).append((s, v))
    for lab, pts in sorted(by_label.items()):
        pts.sort()
        color = colors.get(lab, "#b2341f")
        path = " ".join(f"{_xmap(s, xlo, xhi):.1f},{_ymap(v, 0, yhi):.1f}"
                        for s, v in pts)
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="{color}" stroke-width="1.8"/>')
        x_end, y_end = pts[-1]
        parts.append(f'<text x="{_xmap(x_end, xlo, xhi) - 5:.1f}" '
                     f'y="{_ymap(y_end, 0, yhi) - 6:.1f}" font-size="13" '
                     f'fill="{color}" text-anchor="end">{lab}</text>')
    parts += ['</svg>', '']
    _write(out_path, "\n".join(parts))


def _write(path: str, text: str) -> None:
    from .fileio import _atomic_write
    _atomic_write(path, text.encode())
