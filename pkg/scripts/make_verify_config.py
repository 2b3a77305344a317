"""Write configs/verify_suite.json, the documented scenario set for the verify command."""
import json
import pathlib

times = [0.02, 0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0]
barenblatt = {
    "name": "barenblatt d=3 m=5/6",
    "d": 3, "m": 5 / 6, "grid": {"r_max": 30.0, "N": 400}, "times": times, "dt_factor": 2.0,
    "initial": {"type": "barenblatt", "params": {"t0": 1.0}},
    "checks": {
        "herrero_pierre": [
            {"R": R, "r": r, "t": t, "tau": tau, "rho0": 2 * R / r}
            for (R, r, t, tau) in [(0.5, 1.0, 0.1, 0.05), (0.5, 1.0, 0.05, 0.1), (1.0, 1.0, 1.0, 0.5),
                                   (1.0, 2.0, 0.5, 1.0), (1.0, 3.0, 2.0, 0.0), (2.0, 2.0, 0.25, 0.25),
                                   (2.0, 4.0, 1.5, 0.02), (3.0, 1.0, 2.0, 1.5)]
        ],
        "local_upper": [{"R": R, "t": t} for R, t in [(1.0, 0.1), (1.0, 1.0), (2.0, 0.5), (4.0, 2.0)]],
    },
}
indicator3 = {
    "name": "indicator d=3 m=5/6",
    "d": 3, "m": 5 / 6, "grid": {"r_max": 20.0, "N": 400}, "times": times, "dt_factor": 2.0,
    "initial": {"type": "indicator", "params": {"radius": 1.0, "height": 1.0, "edge": 0.2}},
    "checks": {
        "herrero_pierre": [
            {"R": R, "r": r, "t": t, "tau": tau, "rho0": 2 * R / r}
            for (R, r, t, tau) in [(0.5, 1.0, 0.5, 0.0), (1.0, 1.0, 0.1, 1.0),
                                   (1.0, 2.0, 2.0, 0.25), (1.5, 1.0, 0.02, 0.5)]
        ],
        "local_upper": [{"R": R, "t": t} for R, t in [(1.0, 0.05), (2.0, 0.5)]],
        "local_lower": [{"R": 1.0, "t": t} for t in [0.02, 0.1, 0.5, 2.0]],
        "aleksandrov": [{"R": 1.0, "lambda": 3.0, "t": 0.1, "r": 2.0},
                        {"R": 1.0, "lambda": 5.0, "t": 1.0, "r": 3.0}],
    },
}
indicator2 = {
    "name": "indicator d=2 m=0.7",
    "d": 2, "m": 0.7, "grid": {"r_max": 20.0, "N": 400}, "times": times, "dt_factor": 2.0,
    "initial": {"type": "indicator", "params": {"radius": 2.0, "height": 2.0, "edge": 0.5}},
    "checks": {
        "local_upper": [{"R": 4.0, "t": 0.25}, {"R": 3.0, "t": 1.0}],
        "local_lower": [{"R": 2.0, "t": t} for t in [0.05, 0.25, 1.0, 2.0]],
        "aleksandrov": [{"R": 2.0, "lambda": 3.0, "t": 0.5, "r": 2.0}],
    },
}
bump1 = {
    "name": "bump d=1 m=0.5",
    "d": 1, "m": 0.5, "grid": {"r_max": 30.0, "N": 400}, "times": times, "dt_factor": 2.0,
    "initial": {"type": "bump", "params": {"height": 1.0, "center": 0.0, "width": 1.0, "kind": "cos"}},
    "checks": {"aleksandrov": [{"R": 1.0, "lambda": 4.0, "t": 0.5, "r": 1.0}]},
}
config = {
    "scenarios": [barenblatt, indicator3, indicator2, bump1],
    "truncation": [{"R1": R1, "R0": R0, "d": d, "samples": 10000, "seed": d}
                   for R1, R0, d in [(1.0, 2.0, 1), (0.5, 1.0, 2), (1.0, 1.5, 3), (2.0, 5.0, 5)]],
    "entropy": [
        {"d": d, "m": m, "n": 4097, "cases": [
            {"amplitudes": [a, -a / 2], "centers": [0.0, c], "widths": [1.0, 0.5 * c], "kind": "gauss"}
            for a in amps for c in (1.0, 2.5)]}
        for d, m, amps in [(3, 0.8, (5e-4, 0.05, 0.2)), (2, 0.7, (5e-4, 0.05, 0.2)),
                           (1, 0.7, (5e-4, 0.05, 0.2))]
    ],
}
out = pathlib.Path(__file__).resolve().parents[1] / "configs" / "verify_suite.json"
out.write_text(json.dumps(config, indent=2) + "\n")
print(out)
