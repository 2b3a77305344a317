"""Command-line entry point: ``harnack-fde <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
Every JSON artifact embeds an ``invocation`` record (argv and package
version) from which the run can be repeated.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .core_params import Profile, derive_params
from .fde_bounds import ConfigError
from .lognum import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def invocation_record(argv: Sequence[str]) -> dict:
    return {"program": "harnack-fde", "version": __version__, "argv": list(argv)}


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _add_output(p: argparse.ArgumentParser, csv_ok: bool = True) -> None:
    p.add_argument("--format", choices=("json", "csv") if csv_ok else ("json",), default="json")
    p.add_argument("--output", "-o", default=None, help="write to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="harnack-fde", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="Harnack and local-estimate constant report")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("tstar", help="threshold time pipeline")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--G", type=float, default=0.0)
    p.add_argument("--M-over", dest="M_over", type=float, default=None,
                   help="configured upper mass bound (not derived)")
    p.add_argument("--C-dnu1", dest="C_dnu1", type=float, default=1.0,
                   help="configured interpolation constant (not derived)")
    p.add_argument("--C-over", dest="C_over", type=float, default=1.0,
                   help="configured upper Barenblatt comparison constant (not derived)")
    p.add_argument("--C-under", dest="C_under", type=float, default=1.0,
                   help="configured lower Barenblatt comparison constant (not derived)")
    _add_output(p)

    p = sub.add_parser("sigma", help="weighted series of the Moser iteration")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output(p, csv_ok=False)

    p = sub.add_parser("gn-disk", help="optimal constant of the disk inequality by shooting")
    p.add_argument("--bracket", type=float, nargs=2, default=(5.0, 10.0), metavar=("A_LO", "A_HI"))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--sweep", type=float, nargs=3, default=None, metavar=("A_LO", "A_HI", "N"),
                   help="emit (a, s(a)) rows instead")
    p.add_argument("--profile-csv", default=None, help="write the critical profile as CSV")
    _add_output(p)

    p = sub.add_parser("simulate", help="evolve a radial scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--snapshot-dir", default=None, help="write one CSV per snapshot here")
    _add_output(p)

    p = sub.add_parser("verify", help="run inequality verification suites")
    from .suites import SUITES
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--config", required=True)
    _add_output(p, csv_ok=False)
    return ap


def cmd_constants(a) -> tuple[str, int]:
    from .report import constants_report
    rep = constants_report(derive_params(a.d, a.m, Profile.FDE_BOUNDS))
    return (rep.to_csv() if a.format == "csv" else rep.dumps(a.invocation)), EXIT_OK


def cmd_tstar(a) -> tuple[str, int]:
    from .report import threshold_report
    from .threshold import ThresholdInputs, run_threshold
    p = derive_params(a.d, a.m, Profile.THRESHOLD)
    inp = ThresholdInputs(p, a.eps, a.A, a.G, a.M_over, a.C_dnu1, a.C_over, a.C_under)
    rep = threshold_report(run_threshold(inp))
    return (rep.to_csv() if a.format == "csv" else rep.dumps(a.invocation)), EXIT_OK


def cmd_sigma(a) -> tuple[str, int]:
    from .harnack import sigma_series
    s = sigma_series(a.d, a.tol)
    return dumps({"d": a.d, "tol": a.tol, "value": s.value, "log_value": s.log_value,
                  "tail_bound": s.tail_bound, "n_terms": s.n_terms,
                  "invocation": a.invocation}), EXIT_OK


def cmd_gn_disk(a) -> tuple[str, int]:
    from . import gn_disk
    if a.sweep is not None:
        lo, hi, n = a.sweep
        rows = gn_disk.sweep(lo, hi, int(n), a.tol)
        if a.format == "csv":
            return gn_disk.sweep_csv(rows), EXIT_OK
        return dumps({"a": rows[:, 0], "s": rows[:, 1], "invocation": a.invocation}), EXIT_OK
    dc = gn_disk.disk_constant(tuple(a.bracket), a.tol)
    if a.profile_csv:
        _emit(dc.result.profile.to_csv(), a.profile_csv)
    out = {"a_star": dc.a_star, "C": dc.C, "C_ode": dc.C_ode,
           "energy_residual": dc.energy_residual,
           "sign_changes": dc.result.sign_changes, "s_of_a_star": dc.result.s_of_a}
    if a.format == "csv":
        return "name,value\n" + "".join(f"{k},{v!r}\n" for k, v in out.items()), EXIT_OK
    out["invocation"] = a.invocation
    return dumps(out), EXIT_OK


def cmd_simulate(a) -> tuple[str, int]:
    import os
    from .fde_sim import barenblatt_exact, evolve, load_scenario
    sc = load_scenario(a.config)
    sol = evolve(sc.config, sc.initial)
    if a.snapshot_dir:
        os.makedirs(a.snapshot_dir, exist_ok=True)
        for t, f in zip(sol.times, sol.snapshots):
            _emit(f.to_csv(), os.path.join(a.snapshot_dir, f"snapshot_t{t:.6g}.csv"))
    if a.format == "csv":
        lines = ["t,mass,u_center"] + [f"{float(t)!r},{float(m)!r},{float(f.values[0])!r}" for t, m, f in
                                       zip(sol.times, sol.mass_series, sol.snapshots)]
        return "\n".join(lines) + "\n", EXIT_OK
    out = {"scenario": sc.raw, "times": sol.times, "mass": sol.mass_series,
           "relative_mass_drift": sol.relative_mass_drift(), "n_steps": sol.n_steps,
           "n_halvings": sol.n_halvings, "u_center": [f.values[0] for f in sol.snapshots],
           "invocation": a.invocation}
    if sc.raw["initial"]["type"] == "barenblatt":
        t0 = float(sc.raw["initial"].get("params", {}).get("t0", 1.0))
        errs = []
        for t, f in zip(sol.times, sol.snapshots):
            ex = barenblatt_exact(sc.config, t, t0)
            errs.append(float(np.max(np.abs(f.values - ex)) / np.max(ex)))
        out["barenblatt_linf_relative_error"] = errs
    return dumps(out), EXIT_OK


def cmd_verify(a) -> tuple[str, int]:
    from .suites import load_config, run_suite
    rep = run_suite(load_config(a.config), a.suite)
    for v in rep.failures():
        sys.stderr.write(f"FAIL {v.name} slack={v.slack:.6g} bar={v.error_bar:.3g} {v.details}\n")
    out = rep.to_json()
    out["suite"] = a.suite
    out["invocation"] = a.invocation
    return dumps(out), EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {"constants": cmd_constants, "tstar": cmd_tstar, "sigma": cmd_sigma,
            "gn-disk": cmd_gn_disk, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args.invocation = invocation_record(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (DomainError, ConfigError, ValueError, OverflowError, FileNotFoundError) as exc:
        sys.stderr.write(f"harnack-fde {args.command}: error: {exc}\n")
        return EXIT_USAGE
    _emit(text, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
