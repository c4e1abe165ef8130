"""Command-line interface.

Subcommands: solve, continue, spectrum, find-critical, branch-switch,
verify, export, plot.  Exit codes: 0 success, 1 domain error (solver or
data problem), 2 usage error.  All diagnostics go to stderr; data goes
to files.  The environment variable LERAY2D_THREADS (positive integer)
caps worker-pool parallelism in the numerical backends.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from types import SimpleNamespace

import numpy as np

from . import fileio
from .continuation import continue_branch, schedule_sigmas, solve_at
from .newton import NewtonConfig, NewtonError
from .states import domain_radius


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _echo_config(name: str, cfg: dict) -> None:
    """Reproducibility log: every run echoes its fully resolved config."""
    _diag(f"[leray2d] {name} config: "
          + json.dumps(cfg, sort_keys=True, default=str))


def _apply_thread_cap() -> None:
    raw = os.environ.get("LERAY2D_THREADS")
    if not raw:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise SystemExit(
            f"LERAY2D_THREADS must be a positive integer, got {raw!r}")
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(limits=n)
        _diag(f"[leray2d] thread pools capped at {n}")
    except ImportError:                        # cap is best-effort
        os.environ.setdefault("OMP_NUM_THREADS", str(n))
        _diag(f"[leray2d] threadpoolctl unavailable; set OMP_NUM_THREADS={n}")


def _field_name(sigma: float, symmetry: str) -> str:
    tag = "a" if symmetry.startswith("asym") else "s"
    return f"state_{tag}_{sigma:08.3f}.field"


def _write_state(outdir: str, state, manifest: dict,
                 extra: dict | None = None) -> str:
    name = _field_name(state.sigma, state.symmetry)
    path = os.path.join(outdir, name)
    sha = fileio.write_field(path, state)
    manifest["rows"].append(fileio.manifest_row(state, name, sha, extra))
    return path


def _load_state(path: str):
    return fileio.read_field(path)


def _finish_manifest(path: str, manifest: dict, config: dict) -> None:
    manifest["provenance"].append(fileio.provenance_record(config))
    fileio.write_manifest(path, manifest)
    _diag(f"[leray2d] wrote manifest {path}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = {"sigma": args.sigma, "n_r": args.nr, "n_theta": args.ntheta,
           "radius_rule": args.radius_rule, "symmetric": args.symmetric,
           "out": args.out}
    _echo_config("solve", cfg)
    if args.radius_rule != "default":
        _diag(f"[leray2d] unknown radius rule {args.radius_rule!r}")
        raise SystemExit(2)
    os.makedirs(args.out, exist_ok=True)
    state = solve_at(args.sigma, n_r=args.nr, n_theta=args.ntheta,
                     symmetric=args.symmetric, log=_diag)
    man = fileio.new_manifest(
        "solve", {"n_r": args.nr, "n_theta": args.ntheta},
        {"newton": vars(NewtonConfig())})
    _write_state(args.out, state, man)
    _finish_manifest(os.path.join(args.out, "manifest.json"), man, cfg)
    _diag(f"[leray2d] sigma={state.sigma:g} residual="
          f"{state.residual_norm:.3e} symmetry={state.symmetry}")
    return 0


def cmd_continue(args) -> int:
    cfg = {"from": getattr(args, "from"), "to": args.to,
           "schedule": args.schedule, "symmetric": args.symmetric,
           "n_r": args.nr, "n_theta": args.ntheta,
           "keep_every": args.keep_every, "out": args.out}
    _echo_config("continue", cfg)
    os.makedirs(args.out, exist_ok=True)
    sigma_from = getattr(args, "from")
    start = _load_state(args.start_state) if args.start_state else None
    branch = continue_branch(sigma_from, args.to, schedule=args.schedule,
                             n_r=args.nr, n_theta=args.ntheta,
                             symmetric=args.symmetric, start_state=start,
                             keep_every=args.keep_every, log=_diag)
    man = fileio.new_manifest(
        "continue", {"n_r": args.nr, "n_theta": args.ntheta},
        {"newton": vars(NewtonConfig()), "schedule": args.schedule})
    kept = {round(s, 10): st for s, st in branch.states.items()}
    for pt in branch.points:
        st = kept.get(round(pt.sigma, 10))
        extra = {"energy": pt.energy,
                 "newton_iterations": pt.newton_iterations}
        if st is not None:
            name = _field_name(st.sigma, st.symmetry)
            sha = fileio.write_field(os.path.join(args.out, name), st)
            row = fileio.manifest_row(st, name, sha, extra)
        else:
            row = {"sigma": pt.sigma, "R": pt.R,
                   "residual_norm": pt.residual_norm,
                   "symmetry_defect": pt.asym_amplitude,
                   "symmetry": pt.symmetry, "field_file": None,
                   "sha256": None, **extra}
        man["rows"].append(row)
    _finish_manifest(os.path.join(args.out, "manifest.json"), man, cfg)
    _diag(f"[leray2d] {len(man['rows'])} states, "
          f"sigma in [{branch.points[0].sigma:g}, "
          f"{branch.points[-1].sigma:g}]")
    return 0


def cmd_spectrum(args) -> int:
    from .spectrum import leading_spectrum, stokes_spectrum
    cfg = {"branch": args.branch, "k": args.k, "stride": args.stride,
           "out": args.out}
    _echo_config("spectrum", cfg)
    man = fileio.read_manifest(args.branch)
    base = os.path.dirname(os.path.abspath(args.branch))
    rows = [r for r in man["rows"] if r.get("field_file")][::args.stride]
    if not rows:
        _diag("[leray2d] branch manifest has no stored field files")
        return 1
    reports = []
    for row in rows:
        state = _load_state(os.path.join(base, row["field_file"]))
        if state.sigma == 0.0:
            res = stokes_spectrum(state.R, nkeep=args.k)
        else:
            res = leading_spectrum(state, k=args.k)
        reports.append({
            "sigma": state.sigma, "R": state.R,
            "eigenvalues": [
                {"re": ev.value.real, "im": ev.value.imag,
                 "mode": ev.mode, "multiplicity": ev.multiplicity,
                 "residual": ev.residual, "sector": ev.sector}
                for ev in res.smallest(args.k)],
        })
        _diag(f"[leray2d] sigma={state.sigma:g}: lambda_min="
              f"{min(e['re'] for e in reports[-1]['eigenvalues']):.6f}")
    doc = {"label": "spectrum", "reports": reports,
           "provenance": [fileio.provenance_record(cfg)]}
    fileio.write_manifest(args.out, doc)
    _diag(f"[leray2d] wrote spectrum report {args.out}")
    return 0


def cmd_find_critical(args) -> int:
    from .spectrum import find_critical
    try:
        lo, hi = (float(x) for x in args.window.split(","))
    except ValueError:
        raise SystemExit("--window expects two comma-separated numbers")
    cfg = {"window": [lo, hi], "tol": args.tol, "out": args.out}
    _echo_config("find-critical", cfg)
    cp = find_critical(lo, hi, tol=args.tol, log=_diag)
    print(f"sigma0 = {cp.sigma0:.4f}")
    print(f"kernel dimension = {cp.kernel_dim}")
    if args.out:
        doc = {"label": "critical-point", "sigma0": cp.sigma0,
               "kernel_dim": cp.kernel_dim,
               "eigenvalue": {"re": cp.eigenvalue.real,
                              "im": cp.eigenvalue.imag},
               "provenance": [fileio.provenance_record(cfg)]}
        fileio.write_manifest(args.out, doc)
    return 0


def cmd_branch_switch(args) -> int:
    from .bifurcation import branch_switch
    from .spectrum import leading_spectrum
    cfg = {"sigma": args.sigma, "branch": args.branch, "out": args.out}
    _echo_config("branch-switch", cfg)
    man = fileio.read_manifest(args.branch)
    base = os.path.dirname(os.path.abspath(args.branch))
    rows = [r for r in man["rows"]
            if r.get("field_file") and r["symmetry"] == "symmetric"]
    if not rows:
        _diag("[leray2d] no stored symmetric states in branch manifest")
        return 1
    row = min(rows, key=lambda r: abs(r["sigma"] - args.sigma))
    sym = _load_state(os.path.join(base, row["field_file"]))
    if abs(sym.sigma - args.sigma) > 1e-9:
        _diag(f"[leray2d] re-converging at sigma={args.sigma:g} "
              f"from stored sigma={sym.sigma:g}")
        sym = solve_at(args.sigma, n_r=sym.grid.n_r,
                       n_theta=sym.grid.n_theta, symmetric=True, log=_diag)
    res = leading_spectrum(sym, sector="antisymmetric",
                           return_vectors=True)
    kernel = res.vectors[int(np.argmin(
        [abs(e.value.real) for e in res.eigenvalues]))]
    asym = branch_switch(sym, kernel, log=_diag)
    os.makedirs(args.out, exist_ok=True)
    man_out = fileio.new_manifest(
        "branch-switch", {"n_r": sym.grid.n_r, "n_theta": sym.grid.n_theta},
        {"newton": vars(NewtonConfig())})
    _write_state(args.out, asym, man_out)
    _finish_manifest(os.path.join(args.out, "manifest.json"), man_out, cfg)
    _diag(f"[leray2d] asymmetric state at sigma={asym.sigma:g}, "
          f"residual={asym.residual_norm:.3e}")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_checks
    cfg = {"state": args.state, "checks": args.checks, "out": args.out}
    _echo_config("verify", cfg)
    state = _load_state(args.state)
    names = None if args.checks == "all" else tuple(args.checks.split(","))
    checks = run_checks(state) if names is None \
        else run_checks(state, checks=names)
    for c in checks:
        _diag(f"[leray2d] {c.name}: value={c.value:.6e} "
              f"{'PASS' if c.passed else 'FAIL'} {c.note}")
    doc = {"label": "verify", "sigma": state.sigma, "R": state.R,
           "checks": [c.as_dict() for c in checks],
           "provenance": [fileio.provenance_record(cfg)]}
    out = args.out or (args.state + ".verify.json")
    fileio.write_manifest(out, doc)
    _diag(f"[leray2d] wrote report {out}")
    return 0 if all(c.passed for c in checks) else 1


def cmd_export(args) -> int:
    cfg = {"state": args.state, "csv": args.csv}
    _echo_config("export", cfg)
    state = _load_state(args.state)
    fileio.export_csv(args.csv, state)
    _diag(f"[leray2d] wrote {args.csv}")
    return 0


def cmd_plot(args) -> int:
    from . import plots
    cfg = {"kind": args.kind, "inputs": args.inputs, "out": args.out}
    _echo_config("plot", cfg)
    if args.kind == "field":
        state = _load_state(args.inputs[0])
        plots.plot_field(state, args.out)
    elif args.kind == "spectrum":
        doc = fileio.read_manifest(args.inputs[0])
        reports = [
            SimpleNamespace(
                sigma=r["sigma"],
                eigenvalues=[SimpleNamespace(value=complex(e["re"], e["im"]))
                             for e in r["eigenvalues"]])
            for r in doc["reports"]]
        plots.plot_spectrum(reports, args.out)
    else:                                      # bifurcation
        points = []
        for path in args.inputs:
            man = fileio.read_manifest(path)
            for row in man["rows"]:
                points.append((row["sigma"],
                               2.0 * row["symmetry_defect"],
                               row["symmetry"]))
        plots.plot_bifurcation(points, args.out)
    _diag(f"[leray2d] wrote {args.out}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="leray2d",
        description="Self-similar profiles of 2D Navier-Stokes on the "
                    "rescaled unit disk.")
    sub = p.add_subparsers(dest="command", required=True)

    def grid_args(sp):
        sp.add_argument("--nr", type=int, default=48)
        sp.add_argument("--ntheta", type=int, default=64)

    sp = sub.add_parser("solve", help="solve at one sigma")
    sp.add_argument("--sigma", type=float, required=True)
    grid_args(sp)
    sp.add_argument("--radius-rule", default="default")
    sp.add_argument("--symmetric", action="store_true")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("continue", help="continue a branch in sigma")
    sp.add_argument("--from", type=float, required=True)
    sp.add_argument("--to", type=float, required=True)
    sp.add_argument("--schedule", default="paper")
    sp.add_argument("--symmetric", action="store_true")
    sp.add_argument("--start-state", default=None,
                    help="field file to seed the first step")
    sp.add_argument("--keep-every", type=int, default=None,
                    help="store every k-th full field file")
    grid_args(sp)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_continue)

    sp = sub.add_parser("spectrum", help="linearization spectrum along a "
                                         "branch")
    sp.add_argument("--branch", required=True)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--out", default="spectrum.json")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("find-critical", help="locate the pitchfork sigma0")
    sp.add_argument("--window", required=True, help="A,B")
    sp.add_argument("--tol", type=float, default=0.05)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_find_critical)

    sp = sub.add_parser("branch-switch",
                        help="jump to the asymmetric branch")
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--branch", required=True)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_branch_switch)

    sp = sub.add_parser("verify", help="run analytic verification checks")
    sp.add_argument("--state", required=True)
    sp.add_argument("--checks", default="all")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export", help="CSV export of a field file")
    sp.add_argument("--state", required=True)
    sp.add_argument("--csv", required=True)
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("plot", help="SVG figures")
    sp.add_argument("--kind", required=True,
                    choices=("field", "spectrum", "bifurcation"))
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_thread_cap()
    try:
        return args.func(args)
    except (NewtonError, fileio.FormatError, RuntimeError, ValueError,
            OSError) as exc:
        _diag(f"[leray2d] error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
