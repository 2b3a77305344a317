"""Provenance-annotated constant reports with JSON and CSV export."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import jsonschema

from .core_params import ParamSet, barenblatt_mass
from .fde_bounds import (aleksandrov_Ad, bracket_checks, kappa_star,
                         positivity_constants, smoothing_kappa_bar)
from .harnack import harnack_constants, log_estimate_c2
from .lognum import TowerScalar, as_tower

# Entry name -> label of the defining display. This table is the only
# place where display labels appear in the package.
EQUATION_LABELS = {
    "moser_c1": "Eq.(Lem.Moser.constant)",
    "log_estimate_c2": "Eq.(Lem.Log.Est.Ineq.a)",
    "sigma": "Eq.(sigma)",
    "kappa0_log": "Eq.(BGM.Lemma.ineq)",
    "kappa0_under_log": "Eq.(BGM.Lemma.ineq)",
    "c0": "Eq.(c_0)",
    "log_h": "Eq.(h)",
    "log_h_verbose": "Eq.(h)",
    "log_hbar": "Eq.(h-bar)",
    "nu": "Eq.(nu)",
    "log_nu": "Eq.(nu)",
    "K_sobolev": "Table 1",
    "beta": "Eq.(beta)",
    "c3_herrero_pierre": "Eq.(C3.constant)",
    "kbar": "Eq.(kappa)",
    "kbar_alt": "Eq.(kappa)",
    "A_d": "Eq.(AD)",
    "kappa": "Eq.(kappaExpr-kappastarExpr)",
    "kappa_star": "Eq.(kappaExpr-kappastarExpr)",
    "mass": "Eq.(47)",
    "M_under": "Eq.(47)",
    "eps_under": "Eq.(47)",
    "eps_over": "Eq.(54)",
    "eps_md": "Eq.(59)",
    "R_at_eps": "Eq.(21)",
    "rho_under": "Eq.(52)",
    "rho_over": "Eq.(57)",
    "rho": "Eq.(60)",
    "t0": "Eq.(34)",
    "c_time": "Eq.(36)",
    "t_bar": "Eq.(36)",
    "T_under": "Eq.(51)",
    "T_over": "Eq.(56)",
    "T": "Eq.(60)",
    "lambda0": "Eq.(73)",
    "lambda1": "Eq.(73)",
    "log_hbar_threshold": "Eq.(67)",
    "log_nu_threshold": "Eq.(67)",
    "theta": "Eq.(78)",
    "c2_gradient": "Eq.(71)",
    "K": "Eq.(84)",
    "eps_kappa1_over": "Eq.(89)",
    "eps_kappa1_under": "Eq.(89)",
    "eps_a_kappa2": "Eq.(89)",
    "eps_kappa3": "Eq.(89)",
    "c_star": "Eq.(89)",
    "a_exp": "Eq.(t.star.simplified)",
    "t_star": "Eq.(t.star.simplified)",
}

TOWER_SCHEMA = {
    "type": "object",
    "required": ["sign", "level", "mag"],
    "properties": {
        "sign": {"enum": [-1, 0, 1]},
        "level": {"enum": [0, 1, 2]},
        "mag": {"type": "number"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["inputs", "entries"],
    "properties": {
        "inputs": {"type": "object"},
        "notes": {"type": "object"},
        "invocation": {"type": "object"},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "equation_label", "value", "provenance", "error_note"],
                "properties": {
                    "name": {"type": "string"},
                    "equation_label": {"enum": sorted(set(EQUATION_LABELS.values()))},
                    "value": TOWER_SCHEMA,
                    "provenance": {"type": "array", "items": {"type": "string"}},
                    "error_note": {"type": "string"},
                    "configured": {"type": "boolean"},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class ReportEntry:
    name: str
    equation_label: str
    value: TowerScalar
    provenance: tuple[str, ...]
    error_note: str = ""
    configured: bool = False

    def to_json(self) -> dict:
        return {"name": self.name, "equation_label": self.equation_label,
                "value": self.value.to_json(), "provenance": list(self.provenance),
                "error_note": self.error_note, "configured": self.configured}


@dataclass
class ConstantReport:
    """Ordered entries; every provenance name must be an input or an earlier entry."""
    inputs: dict
    entries: list[ReportEntry] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    configured_inputs: tuple[str, ...] = ()

    def add(self, name: str, value, provenance: Iterable[str] = (), error_note: str = "") -> None:
        if name in self.names():
            raise ValueError(f"duplicate entry {name!r}")
        if name not in EQUATION_LABELS:
            raise KeyError(f"no equation label for {name!r}")
        known = set(self.inputs) | self.names()
        prov = tuple(provenance)
        missing = [p for p in prov if p not in known]
        if missing:
            raise ValueError(f"{name}: unknown provenance {missing}")
        # transitive: anything computed from a configured input is not fully derived
        configured = any(p in self.configured_inputs or (p in self.names() and self[p].configured)
                         for p in prov)
        self.entries.append(ReportEntry(name, EQUATION_LABELS[name], as_tower(value), prov,
                                        error_note, configured))

    def names(self) -> set[str]:
        return {e.name for e in self.entries}

    def __getitem__(self, name: str) -> ReportEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> dict:
        notes = dict(self.notes)
        if self.configured_inputs:
            notes["configured_inputs"] = ("configured, not derived: "
                                          + ", ".join(self.configured_inputs))
        return {"inputs": self.inputs, "notes": notes,
                "entries": [e.to_json() for e in self.entries]}

    def dumps(self, invocation: Optional[dict] = None) -> str:
        obj = self.to_json()
        if invocation is not None:
            obj["invocation"] = invocation
        validate_report(obj)
        return json.dumps(obj, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "sign", "level", "mag"])
        for e in self.entries:
            w.writerow([e.name, e.value.sign, e.value.level, repr(e.value.mag)])
        return buf.getvalue()


def validate_report(obj: dict) -> None:
    """Schema check plus the ordering rule that makes provenance acyclic."""
    jsonschema.validate(obj, REPORT_SCHEMA)
    seen = set(obj["inputs"])
    for e in obj["entries"]:
        for p in e["provenance"]:
            if p not in seen:
                raise jsonschema.ValidationError(f"{e['name']}: provenance {p!r} not defined earlier")
        seen.add(e["name"])


def constants_report(p: ParamSet) -> ConstantReport:
    """Harnack and local-estimate constants for (d, m)."""
    rep = ConstantReport(inputs={"d": p.d, "m": p.m})
    hc = harnack_constants(p)
    sc = smoothing_kappa_bar(p)
    pos = positivity_constants(p, sc.kbar)
    add = rep.add
    add("K_sobolev", p.K, ["d", "m"])
    add("beta", p.beta_smoothing, ["d", "m"])
    add("sigma", hc.sigma, ["d"], f"series tail <= {hc.sigma_tail:.3e}")
    add("log_estimate_c2", log_estimate_c2(p.d), ["d"])
    add("moser_c1", hc.c1_moser, ["d", "K_sobolev"])
    add("c0", hc.c0, ["d", "K_sobolev"])
    add("kappa0_log", hc.kappa0_log, ["moser_c1", "log_estimate_c2", "sigma"])
    add("kappa0_under_log", hc.kappa0_under_log, ["moser_c1", "log_estimate_c2", "sigma"])
    add("log_h", hc.log_h, ["c0", "sigma", "log_estimate_c2"])
    add("log_h_verbose", hc.log_h_verbose, ["moser_c1", "sigma", "log_estimate_c2"],
        f"c0 >= c1: {hc.c0_ge_c1}")
    add("log_hbar", hc.log_hbar, ["log_h"], "lambda0 = lambda1 = 1")
    add("log_nu", hc.log_nu, ["log_hbar"])
    add("nu", hc.nu, ["log_nu"], "approximate zero when nu underflows" if hc.nu.approximate else "")
    add("c3_herrero_pierre", sc.c3_hp, ["d", "m"], "rho0 = 2")
    add("kbar", sc.kbar, ["d", "m", "beta", "K_sobolev"],
        f"log-series tail <= {sc.log_series_tail:.3e}")
    add("kbar_alt", sc.kbar_alt, ["d", "m", "beta", "K_sobolev", "c3_herrero_pierre"])
    add("A_d", aleksandrov_Ad(p.d), ["d"])
    add("kappa", pos.kappa, ["kbar"])
    add("kappa_star", kappa_star(p), ["d", "m"])
    rep.notes["bracket_checks"] = bracket_checks(p, sc)
    rep.notes["mass"] = barenblatt_mass(p) if p.m > p.mc else None
    return rep


def threshold_report(res) -> ConstantReport:
    """Report for a :class:`~harnack_fde.threshold.ThresholdResult`."""
    inp = res.inputs
    p = inp.params
    configured = ["C_dnu1", "C_over", "C_under"] + (["M_over"] if inp.M_over is not None else [])
    rep = ConstantReport(
        inputs={"d": p.d, "m": p.m, "eps": inp.eps, "A": inp.A, "G": inp.G,
                "M_over": inp.M_over, "C_dnu1": inp.C_dnu1, "C_over": inp.C_over,
                "C_under": inp.C_under},
        configured_inputs=tuple(configured),
    )
    add = rep.add
    sc = res.smoothing
    add("kbar", sc.kbar, ["d", "m"])
    add("kappa", res.kappa, ["kbar"])
    add("kappa_star", res.kappa_star, ["d", "m"])
    add("mass", res.mass, ["d", "m"])
    add("M_under", res.M_under, ["kappa", "kappa_star", "mass"])
    add("eps_under", res.eps_under, ["M_under", "mass"],
        f"1 - eps_under = {res.one_minus_eps_under!r}")
    if res.eps_over is not None:
        add("eps_over", res.eps_over, ["M_over", "mass"])
    add("eps_md", res.eps_md, ["eps_under"] + (["eps_over"] if res.eps_over is not None else []),
        "M_over not configured; eps_over omitted" if res.eps_over is None else "")
    add("R_at_eps", 1.0, [], "R(0) = 1; R(t) = (1 + alpha t)^(1/alpha)")
    add("rho_under", res.rho.rho_under, ["eps", "eps_under"])
    add("rho_over", res.rho.rho_over, ["eps"],
        f"closed-form bracket [{res.rho.over_lower:.6g}, {res.rho.over_upper:.6g}]")
    add("rho", res.rho.rho, ["rho_under", "rho_over"])
    add("t0", res.times.t0, ["A"])
    add("c_time", res.times.c, ["kbar"])
    add("t_bar", res.times.t_bar, ["c_time", "t0"])
    add("T_under", res.times.T_under, ["kappa_star", "A", "eps"])
    add("T_over", res.times.T_over, ["t_bar", "eps"])
    add("T", res.times.T, ["T_under", "T_over"])
    lam_note = "annulus sup over k >= 1 taken as the k -> infinity limit; inner cylinder at k = 1"
    add("lambda0", res.lambdas.lambda0, ["C_over", "m"], lam_note)
    add("lambda1", res.lambdas.lambda1, ["C_under", "m"], lam_note)
    add("log_h", res.harnack.log_h, ["d"])
    add("log_hbar_threshold", res.log_hbar, ["log_h", "lambda0", "lambda1"])
    add("log_nu_threshold", res.log_nu, ["log_hbar_threshold"],
        "first-order expansion in 1/hbar; relative error below 1/hbar")
    add("theta", res.theta, ["log_nu_threshold"],
        "approximate zero; ln theta is used downstream" if res.theta.approximate else "")
    add("c2_gradient", res.c2_gradient, ["d", "m"])
    add("K", res.K, ["log_nu_threshold", "theta", "C_dnu1", "kbar", "mass", "c2_gradient"],
        "2^nu/(2^nu-1) from its small-nu expansion, absolute error <= nu/2")
    cs = res.cstar
    add("eps_kappa1_over", cs.term1_over.value, ["c_time", "eps_md"],
        f"grid sup {cs.term1_over.grid_sup!r}, endpoint limit {cs.term1_over.limit!r}")
    add("eps_kappa1_under", cs.term1_under.value, ["kappa_star", "eps_md"],
        f"grid sup {cs.term1_under.grid_sup!r}, limit eps -> 0 {cs.term1_under.limit!r}")
    add("eps_a_kappa2", cs.term2, ["K", "theta"], "eps-independent")
    add("eps_kappa3", cs.term3.value, ["eps_md"],
        f"grid sup {cs.term3.grid_sup!r}, limit eps -> 0 {cs.term3.limit!r}")
    add("c_star", cs.c_star, ["eps_kappa1_over", "eps_kappa1_under", "eps_a_kappa2", "eps_kappa3"])
    add("a_exp", res.a_exp, ["theta", "m"])
    add("t_star", res.tstar.t_star, ["c_star", "a_exp", "eps", "A", "G"],
        f"bracket 1 + A^(1-m) + G^(alpha/2) = {res.tstar.bracket!r}")
    rep.notes.update(res.notes)
    rep.notes["eps_grid"] = [cs.eps_lo, cs.eps_hi]
    return rep
