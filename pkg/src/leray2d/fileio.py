"""Serialization: binary field files, JSON manifests, CSV export.

Field files are the only binary artifact; everything else is structured
text.  All writes are atomic (write to a temporary sibling, then rename).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import struct
import subprocess
import tempfile
import time

import numpy as np

from .grid import build_grid
from .states import FlowState

MAGIC = b"LERAY2D\0"
VERSION = 1
_HEADER = struct.Struct("<8sIII dd")   # magic, version, n_r, n_theta, sigma, R


class FormatError(ValueError):
    """Malformed or unsupported field file."""


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-leray2d-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_bytes(state: FlowState) -> bytes:
    """Serialized field file contents for a state."""
    psi = np.ascontiguousarray(state.psi, dtype="<f8")
    if psi.shape != (state.grid.n_r, state.grid.n_theta):
        raise FormatError("psi shape does not match grid")
    header = _HEADER.pack(MAGIC, VERSION, state.grid.n_r,
                          state.grid.n_theta, float(state.sigma),
                          float(state.R))
    return header + psi.tobytes(order="C")    # radius-major


def write_field(path: str, state: FlowState) -> str:
    """Write a field file; returns its content hash."""
    data = field_bytes(state)
    _atomic_write(path, data)
    return hashlib.sha256(data).hexdigest()


def read_field(path: str, map_strength: float | None = None) -> FlowState:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, n_r, n_theta, sigma, R = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expect = _HEADER.size + 8 * n_r * n_theta
    if len(data) != expect:
        raise FormatError(f"{path}: size {len(data)}, expected {expect}")
    psi = np.frombuffer(data, dtype="<f8", offset=_HEADER.size) \
        .reshape(n_r, n_theta).astype(float)
    kw = {} if map_strength is None else {"map_strength": map_strength}
    grid = build_grid(int(n_r), int(n_theta), **kw)
    from .operator import LerayOperator
    from .states import asymmetry_amplitude
    amp = asymmetry_amplitude(grid, psi)
    rn = LerayOperator(grid, float(R)).residual_norm(psi, float(sigma))
    return FlowState(sigma=float(sigma), R=float(R), grid=grid, psi=psi,
                     residual_norm=rn,
                     symmetry="symmetric" if amp < 1e-8 else "asymmetric")


def file_hash(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------

def build_id() -> str:
    """git-describe-style identifier of the running code, best effort."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=10)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    from . import __version__
    return f"leray2d-{__version__}"


def provenance_record(config: dict) -> dict:
    return {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "build": build_id(),
        "config": config,
    }


def new_manifest(label: str, grid: dict, solver: dict) -> dict:
    return {"label": label, "grid": grid, "solver": solver,
            "rows": [], "provenance": []}


def manifest_row(state: FlowState, path: str | None, sha: str | None,
                 extra: dict | None = None) -> dict:
    from .states import asymmetry_amplitude
    row = {
        "sigma": state.sigma,
        "R": state.R,
        "residual_norm": state.residual_norm,
        "symmetry_defect": asymmetry_amplitude(state.grid, state.psi),
        "symmetry": state.symmetry,
        "field_file": path,
        "sha256": sha,
    }
    if extra:
        row.update(extra)
    return row


def write_manifest(path: str, manifest: dict) -> None:
    _atomic_write(path, (json.dumps(manifest, indent=1, sort_keys=True)
                         + "\n").encode())


def read_manifest(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def verify_manifest(path: str) -> list:
    """Check that every referenced field file exists and hash-matches.
    Returns a list of problem strings (empty = clean)."""
    man = read_manifest(path)
    base = os.path.dirname(os.path.abspath(path))
    problems = []
    for row in man.get("rows", []):
        fp = row.get("field_file")
        if not fp:
            continue
        full = fp if os.path.isabs(fp) else os.path.join(base, fp)
        if not os.path.exists(full):
            problems.append(f"missing field file: {fp}")
        elif row.get("sha256") and file_hash(full) != row["sha256"]:
            problems.append(f"hash mismatch: {fp}")
    return problems


# --------------------------------------------------------------------------
# CSV export
# --------------------------------------------------------------------------

def export_csv(path: str, state: FlowState) -> None:
    """One header row plus n_r * n_theta data rows; values printed with 17
    significant digits so re-import is exact in 64-bit."""
    g = state.grid
    import io as _io
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "theta", "psi"])
    for i in range(g.n_r):
        for j in range(g.n_theta):
            w.writerow([f"{g.radii[i]:.17g}", f"{g.thetas[j]:.17g}",
                        f"{state.psi[i, j]:.17g}"])
    _atomic_write(path, buf.getvalue().encode())


def import_csv(path: str) -> np.ndarray:
    """Nodal (r, theta, psi) triples from an exported CSV."""
    with open(path) as f:
        rd = csv.reader(f)
        header = next(rd)
        if header != ["r", "theta", "psi"]:
            raise FormatError(f"{path}: unexpected CSV header {header}")
        return np.array([[float(x) for x in row] for row in rd])
