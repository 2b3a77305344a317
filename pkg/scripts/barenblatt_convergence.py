"""Grid-refinement study of the radial solver against the exact Barenblatt solution."""
import argparse
import time

import numpy as np

from harnack_fde.fde_sim import SolverConfig, barenblatt_exact, barenblatt_initial, evolve

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--d", type=int, default=3)
ap.add_argument("--m", type=float, default=5 / 6)
ap.add_argument("--r-max", type=float, default=30.0)
ap.add_argument("--t-end", type=float, default=1.0)
ap.add_argument("--N", type=int, nargs="+", default=[100, 200, 400, 800])
args = ap.parse_args()

print("N,linf_rel_error,factor,mass_drift,steps,seconds")
prev = None
for N in args.N:
    cfg = SolverConfig(d=args.d, m=args.m, r_max=args.r_max, N=N, t_end=args.t_end, dt_factor=2.0)
    t0 = time.perf_counter()
    sol = evolve(cfg, barenblatt_initial(cfg))
    secs = time.perf_counter() - t0
    ex = barenblatt_exact(cfg, args.t_end)
    err = float(np.max(np.abs(sol.snapshots[-1].values - ex)) / np.max(ex))
    factor = "" if prev is None else f"{prev / err:.4f}"
    print(f"{N},{err:.6e},{factor},{sol.relative_mass_drift():.2e},{sol.n_steps},{secs:.2f}")
    prev = err
