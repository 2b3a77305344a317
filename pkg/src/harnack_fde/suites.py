"""Verification suites driven by a JSON configuration.

Layout::

    {"scenarios": [<scenario>, ...],          # see fde_sim.scenario_from_dict
     "truncation": [{"R1", "R0", "d", "samples", "seed"}, ...],
     "entropy": [{"d", "m", "n", "cases": [{"amplitudes", "centers", "widths", "kind"}]}]}

Each scenario carries a ``checks`` mapping with lists of keyword sets for
``herrero_pierre`` (R, r, t, tau, rho0), ``local_upper`` (R, t),
``local_lower`` (R, t) and ``aleksandrov`` (R, lambda, t, r).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from .core_params import Profile, derive_params
from .entropy import (RadialField, barenblatt, eep_check, fisher_information, free_energy,
                      radial_grid, tube_perturbation)
from .fde_bounds import positivity_constants, smoothing_kappa_bar
from .fde_sim import (Verdict, evolve, scenario_from_dict, verify_aleksandrov,
                      verify_herrero_pierre, verify_local_lower, verify_local_upper,
                      verify_truncation_bounds)

SUITES = ("herrero-pierre", "bounds", "aleksandrov", "entropy", "truncation", "all")


@dataclass
class SuiteReport:
    verdicts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failures(self) -> list:
        return [v for v in self.verdicts if not v.passed]

    def count(self, name: str) -> int:
        return sum(v.name == name for v in self.verdicts)

    def to_json(self) -> dict:
        return {"passed": self.passed, "verdicts": [v.to_json() for v in self.verdicts]}


@lru_cache(maxsize=None)
def local_constants(d: int, m: float):
    """(kbar, kappa, kappa_star) for the local estimates at (d, m)."""
    p = derive_params(d, m, Profile.FDE_BOUNDS)
    sc = smoothing_kappa_bar(p)
    pos = positivity_constants(p, sc.kbar)
    return sc.kbar, pos.kappa, pos.kappa_star


def _wants(suite: str, name: str) -> bool:
    return suite == "all" or suite == name


def _run_scenario(obj: dict, suite: str, out: SuiteReport) -> None:
    checks = obj.get("checks", {})
    active = {
        "herrero_pierre": _wants(suite, "herrero-pierre"),
        "local_upper": _wants(suite, "bounds"),
        "local_lower": _wants(suite, "bounds"),
        "aleksandrov": _wants(suite, "aleksandrov"),
    }
    if not any(active[k] and checks.get(k) for k in active):
        return
    sc = scenario_from_dict(obj)
    sol = evolve(sc.config, sc.initial, companion=True)
    d, m = sc.config.d, sc.config.m
    label = obj.get("name", f"d={d}, m={m}")
    kbar, kappa, kstar = local_constants(d, m)
    for k in checks.get("herrero_pierre", []) if active["herrero_pierre"] else []:
        v = verify_herrero_pierre(sol, k["R"], k["r"], k["t"], k["tau"], k["rho0"])
        out.verdicts.append(_tag(v, label))
    for k in checks.get("local_upper", []) if active["local_upper"] else []:
        out.verdicts.append(_tag(verify_local_upper(sol, k["R"], k["t"], kbar), label))
    for k in checks.get("local_lower", []) if active["local_lower"] else []:
        out.verdicts.append(_tag(verify_local_lower(sol, k["R"], k["t"], kappa, kstar), label))
    for k in checks.get("aleksandrov", []) if active["aleksandrov"] else []:
        v = verify_aleksandrov(sol, k["R"], k["lambda"], k["t"], k.get("r"))
        out.verdicts.append(_tag(v, label))


def _tag(v: Verdict, label: str) -> Verdict:
    v.details["scenario"] = label
    return v


def entropy_verdicts(case: dict) -> list:
    """Barenblatt zero check plus one EEP check per tube perturbation."""
    p = derive_params(int(case["d"]), float(case["m"]), Profile.ENTROPY)
    grid = radial_grid(p, n=int(case.get("n", 4097)))
    B = RadialField(grid, barenblatt(grid, p), p.d)
    F0, F0_err = free_energy(B, p)
    I0, I0_err = fisher_information(B, p)
    bar0 = max(F0_err + I0_err, 1e-12)
    out = [Verdict("entropy_zero", abs(F0) + abs(I0), 0.0, -(abs(F0) + abs(I0)), bar0,
                   abs(F0) + abs(I0) <= bar0, {"d": p.d, "m": p.m})]
    for c in case.get("cases", []):
        pert = tube_perturbation(p, grid, c["amplitudes"], c["centers"], c["widths"],
                                 c.get("kind", "gauss"))
        improved = pert.eps_tube < p.chi * p.eta and not (p.d == 1 and p.m <= 0.5)
        ev = eep_check(pert.field, pert.eps_tube, p, None if improved else 4.0)
        out.append(Verdict("eep", ev.target * ev.F, ev.I, ev.slack, ev.error_bar, ev.passed,
                           {"d": p.d, "m": p.m, "eps_tube": ev.eps_tube, "ratio": ev.ratio,
                            "target": ev.target, "improved": improved}))
    return out


def run_suite(config: dict, suite: str = "all") -> SuiteReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    out = SuiteReport()
    for obj in config.get("scenarios", []):
        _run_scenario(obj, suite, out)
    if _wants(suite, "truncation"):
        for k in config.get("truncation", []):
            out.verdicts.append(verify_truncation_bounds(k["R1"], k["R0"], int(k["d"]),
                                                         int(k.get("samples", 10_000)),
                                                         int(k.get("seed", 0))))
    if _wants(suite, "entropy"):
        for case in config.get("entropy", []):
            out.verdicts.extend(entropy_verdicts(case))
    return out


def load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
