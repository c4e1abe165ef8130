"""CLI behavior: exit codes, artifacts, provenance."""

import json
import os

import numpy as np
import pytest

from leray2d import fileio
from leray2d.cli import main


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])                       # missing required --sigma
    assert exc.value.code == 2


def test_unknown_radius_rule_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--sigma", "0", "--radius-rule", "bogus",
              "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_bad_thread_cap_rejected(tmp_path, monkeypatch):
    monkeypatch.setenv("LERAY2D_THREADS", "zero")
    with pytest.raises(SystemExit):
        main(["solve", "--sigma", "0", "--out", str(tmp_path)])


def test_solve_writes_state_and_manifest(tmp_path, capsys):
    rc = main(["solve", "--sigma", "0", "--nr", "32", "--ntheta", "32",
               "--out", str(tmp_path)])
    assert rc == 0
    man = fileio.read_manifest(str(tmp_path / "manifest.json"))
    assert len(man["rows"]) == 1
    row = man["rows"][0]
    state = fileio.read_field(str(tmp_path / row["field_file"]))
    assert state.sigma == 0.0
    assert state.residual_norm < 1e-9
    # provenance appended with the resolved config
    assert man["provenance"]
    assert "timestamp" in man["provenance"][-1]
    # diagnostics go to stderr, not stdout
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "config" in captured.err


def test_export_round_trip(tmp_path):
    assert main(["solve", "--sigma", "0", "--nr", "32", "--ntheta", "32",
                 "--out", str(tmp_path)]) == 0
    man = fileio.read_manifest(str(tmp_path / "manifest.json"))
    field = str(tmp_path / man["rows"][0]["field_file"])
    csv_out = str(tmp_path / "state.csv")
    assert main(["export", "--state", field, "--csv", csv_out]) == 0
    state = fileio.read_field(field)
    back = fileio.import_csv(csv_out)    # (n_r*n_theta, 3) nodal triples
    psi = back[:, 2].reshape(state.psi.shape)
    assert np.array_equal(psi, state.psi)


def test_plot_field_from_cli(tmp_path):
    assert main(["solve", "--sigma", "0", "--nr", "32", "--ntheta", "32",
                 "--out", str(tmp_path)]) == 0
    man = fileio.read_manifest(str(tmp_path / "manifest.json"))
    field = str(tmp_path / man["rows"][0]["field_file"])
    out = str(tmp_path / "field.svg")
    assert main(["plot", "--kind", "field", "--in", field,
                 "--out", out]) == 0
    assert os.path.getsize(out) > 0


def test_missing_input_exits_1(tmp_path):
    rc = main(["export", "--state", str(tmp_path / "nope.field"),
               "--csv", str(tmp_path / "x.csv")])
    assert rc == 1
