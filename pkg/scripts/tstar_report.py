"""Threshold-time reports over a small (d, m, eps) table, one JSON file per row."""
import argparse
import pathlib

from harnack_fde import Profile, derive_params
from harnack_fde.report import threshold_report
from harnack_fde.threshold import ThresholdInputs, run_threshold

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out-dir", default="tstar_reports")
ap.add_argument("--eps", type=float, nargs="+", default=[1e-3, 1e-4, 1e-6])
args = ap.parse_args()

out = pathlib.Path(args.out_dir)
out.mkdir(parents=True, exist_ok=True)
for d, m in [(1, 0.6), (2, 0.75), (3, 5 / 6), (5, 0.9)]:
    p = derive_params(d, m, Profile.THRESHOLD)
    for eps in args.eps:
        res = run_threshold(ThresholdInputs(p, eps))
        rep = threshold_report(res)
        path = out / f"tstar_d{d}_m{m:.4f}_eps{eps:g}.json"
        path.write_text(rep.dumps())
        ts = res.tstar.t_star
        print(f"d={d} m={m:.4f} eps={eps:g}: t_star level {ts.level} mag {ts.mag:.6e}")
