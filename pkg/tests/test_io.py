"""Field-file serialization, manifests, and CSV round trips."""

import json
import os

import numpy as np
import pytest

from leray2d import fileio
from leray2d.grid import build_grid
from leray2d.states import FlowState


@pytest.fixture()
def state():
    g = build_grid(16, 16)
    rng = np.random.default_rng(42)
    psi = rng.standard_normal((g.n_r, g.n_theta))
    return FlowState(psi=psi, sigma=7.25, R=103.25, grid=g,
                     residual_norm=1e-12, symmetry="asymmetric")


def test_field_roundtrip_bit_exact(state, tmp_path):
    p = str(tmp_path / "x.field")
    fileio.write_field(p, state)
    back = fileio.read_field(p)
    assert back.psi.tobytes() == state.psi.tobytes()      # bit-identical
    assert back.sigma == state.sigma
    assert back.R == state.R
    assert back.grid.n_r == state.grid.n_r
    # writing the read-back state reproduces identical bytes
    p2 = str(tmp_path / "y.field")
    fileio.write_field(p2, back)
    assert open(p, "rb").read() == open(p2, "rb").read()


def test_field_header_layout(state, tmp_path):
    blob = fileio.field_bytes(state)
    assert blob[:8] == b"LERAY2D\0"
    import struct
    version, n_r, n_theta = struct.unpack_from("<III", blob, 8)
    sigma, R = struct.unpack_from("<dd", blob, 20)
    assert (version, n_r, n_theta) == (1, 16, 16)
    assert (sigma, R) == (7.25, 103.25)
    assert len(blob) == 36 + 16 * 16 * 8   # 8+4+4+4+8+8 header, no padding


def test_read_rejects_bad_magic(state, tmp_path):
    p = str(tmp_path / "bad.field")
    blob = bytearray(fileio.field_bytes(state))
    blob[0] = 0x58
    open(p, "wb").write(bytes(blob))
    with pytest.raises(fileio.FormatError):
        fileio.read_field(p)


def test_read_rejects_truncated(state, tmp_path):
    p = str(tmp_path / "short.field")
    open(p, "wb").write(fileio.field_bytes(state)[:-9])
    with pytest.raises(fileio.FormatError):
        fileio.read_field(p)


def test_manifest_hash_verification(state, tmp_path):
    fp = str(tmp_path / "s.field")
    sha = fileio.write_field(fp, state)
    man = fileio.new_manifest("t", {"n_r": 16, "n_theta": 16}, {})
    man["rows"].append(fileio.manifest_row(state, "s.field", sha))
    man["provenance"].append(fileio.provenance_record({"unit": "test"}))
    mp = str(tmp_path / "manifest.json")
    fileio.write_manifest(mp, man)
    assert fileio.verify_manifest(mp) == []
    # corrupt the field file -> hash mismatch reported
    with open(fp, "r+b") as f:
        f.seek(40)
        f.write(b"\xff")
    problems = fileio.verify_manifest(mp)
    assert problems and "hash mismatch" in problems[0]


def test_manifest_provenance_record(state, tmp_path):
    rec = fileio.provenance_record({"alpha": 1})
    assert "timestamp" in rec and "build" in rec
    assert rec["config"] == {"alpha": 1}


def test_csv_roundtrip_full_precision(state, tmp_path):
    p = str(tmp_path / "f.csv")
    fileio.export_csv(p, state)
    lines = open(p).read().splitlines()
    assert lines[0].split(",") == ["r", "theta", "psi"]
    assert len(lines) == 1 + 16 * 16
    arr = fileio.import_csv(p)
    assert arr.shape == (256, 3)
    assert np.array_equal(arr[:, 2].reshape(16, 16), state.psi)


def test_atomic_write_leaves_no_temp(state, tmp_path):
    p = str(tmp_path / "x.field")
    fileio.write_field(p, state)
    leftovers = [f for f in os.listdir(tmp_path) if f != "x.field"]
    assert leftovers == []


def test_manifest_is_json(state, tmp_path):
    mp = str(tmp_path / "m.json")
    fileio.write_manifest(mp, fileio.new_manifest("x", {}, {}))
    doc = json.load(open(mp))
    assert doc["label"] == "x"
