import csv
import io
import json

import jsonschema
import pytest

from harnack_fde.core_params import Profile, derive_params
from harnack_fde.report import (EQUATION_LABELS, ConstantReport, constants_report,
                                threshold_report, validate_report)
from harnack_fde.threshold import ThresholdInputs, run_threshold


@pytest.fixture(scope="module")
def reports():
    c = constants_report(derive_params(3, 5 / 6, Profile.FDE_BOUNDS))
    t = threshold_report(run_threshold(ThresholdInputs(derive_params(3, 5 / 6), 1e-3,
                                                       M_over=5.0)))
    return c, t


def _acyclic(obj):
    graph = {e["name"]: e["provenance"] for e in obj["entries"]}
    state = {}

    def visit(n):
        if state.get(n) == 1:
            return False
        if state.get(n) == 2 or n not in graph:
            return True
        state[n] = 1
        ok = all(visit(q) for q in graph[n])
        state[n] = 2
        return ok

    return all(visit(n) for n in graph)


def test_schema_and_labels(reports):
    labels = set(EQUATION_LABELS.values())
    for rep in reports:
        obj = json.loads(rep.dumps({"argv": []}))
        validate_report(obj)
        assert all(e["equation_label"] in labels for e in obj["entries"])
        assert _acyclic(obj)
        names = [e["name"] for e in obj["entries"]]
        assert len(names) == len(set(names))


def test_deterministic(reports):
    c, _ = reports
    again = constants_report(derive_params(3, 5 / 6, Profile.FDE_BOUNDS))
    assert c.dumps() == again.dumps()


def test_configured_flags(reports):
    _, t = reports
    obj = t.to_json()
    assert "M_over" in obj["notes"]["configured_inputs"]
    assert t["lambda0"].configured and t["eps_over"].configured
    assert not t["kbar"].configured


def test_csv_roundtrip(reports):
    c, _ = reports
    rows = list(csv.DictReader(io.StringIO(c.to_csv())))
    assert [r["name"] for r in rows] == [e.name for e in c.entries]
    for r, e in zip(rows, c.entries):
        assert int(r["level"]) == e.value.level and float(r["mag"]) == e.value.mag


def test_add_rejects_bad_entries():
    rep = ConstantReport(inputs={"d": 3})
    with pytest.raises(KeyError):
        rep.add("not_a_constant", 1.0, ["d"])
    with pytest.raises(ValueError):
        rep.add("sigma", 1.0, ["undefined"])
    rep.add("sigma", 1.0, ["d"])
    with pytest.raises(ValueError):
        rep.add("sigma", 2.0, ["d"])


def test_validation_catches_forward_reference(reports):
    c, _ = reports
    obj = c.to_json()
    obj["entries"][0]["provenance"] = [obj["entries"][-1]["name"]]
    with pytest.raises(jsonschema.ValidationError):
        validate_report(obj)
    obj = c.to_json()
    obj["entries"][0]["equation_label"] = "bogus"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(obj)
