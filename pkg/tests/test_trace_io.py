"""Trace CSV round trips and the JSON report schema."""

import json

import jsonschema
import numpy as np
import pytest

from restartagd import (REPORT_SCHEMA, SolverParams, TerminationPolicy,
                        TraceRecord, make_problem, read_trace_csv,
                        report_to_dict, run, write_report_json,
                        write_trace_csv)


def sample_records():
    return [
        TraceRecord(K=1, epoch=1, k=1, n_oracle=6, f_x=3.25,
                    grad_norm_monitor=1.5, grad_norm_ybar=None,
                    L=1e-3, M=1e-16, S_k=4.0, event="Step"),
        TraceRecord(K=2, epoch=1, k=2, n_oracle=10, f_x=0.125,
                    grad_norm_monitor=0.25, grad_norm_ybar=0.75,
                    L=1e-3, M=0.5, S_k=4.5, event="RestartSuccessful"),
        TraceRecord(K=3, epoch=2, k=1, n_oracle=15,
                    f_x=0.1 + 0.2,                  # not a round float
                    grad_norm_monitor=1e-300, grad_norm_ybar=5e-324,
                    L=9e-4, M=0.5, S_k=0.015625, event="Terminated"),
    ]


def test_trace_csv_round_trip_is_exact(tmp_path):
    path = str(tmp_path / "trace.csv")
    recs = sample_records()
    write_trace_csv(path, recs)
    back = read_trace_csv(path)
    assert back == recs          # dataclass equality, field for field


def test_trace_csv_preserves_missing_certificates(tmp_path):
    path = str(tmp_path / "trace.csv")
    write_trace_csv(path, sample_records())
    back = read_trace_csv(path)
    assert back[0].grad_norm_ybar is None
    assert back[1].grad_norm_ybar == 0.75


def test_trace_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bogus.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_trace_csv(str(path))


def test_real_run_trace_round_trips(tmp_path):
    spec = make_problem("rosenbrock")
    rep = run(spec.objective, spec.x_init,
              SolverParams(termination=TerminationPolicy(eps=1e-4,
                                                         max_iterations=200)))
    path = str(tmp_path / "trace.csv")
    write_trace_csv(path, rep.trace)
    assert read_trace_csv(path) == rep.trace


def test_report_dict_validates_against_schema(tmp_path):
    spec = make_problem("rosenbrock")
    rep = run(spec.objective, spec.x_init,
              SolverParams(termination=TerminationPolicy(eps=1e-4,
                                                         max_iterations=500)))
    doc = report_to_dict(rep, problem="rosenbrock", solver="proposed",
                         params={"l_init": 1e-3}, trace_path="trace.csv",
                         wall_seconds=0.25)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["n_oracle"] == doc["n_value"] + doc["n_grad"]

    out = tmp_path / "report.json"
    write_report_json(str(out), doc)
    assert json.loads(out.read_text()) == doc


def test_schema_rejects_malformed_reports():
    spec = make_problem("rosenbrock")
    rep = run(spec.objective, spec.x_init,
              SolverParams(termination=TerminationPolicy(max_iterations=3)))
    doc = report_to_dict(rep, problem="rosenbrock", solver="proposed",
                         params={})
    bad = dict(doc, reason="GaveUp")
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, REPORT_SCHEMA)
    bad = dict(doc, solver="sgd")
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, REPORT_SCHEMA)
    bad = {k: v for k, v in doc.items() if k != "certified_grad_norm"}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, REPORT_SCHEMA)


def test_solution_serializes_as_plain_floats():
    spec = make_problem("quadratic", dim=3)
    rep = run(spec.objective, spec.x_init,
              SolverParams(termination=TerminationPolicy(max_iterations=2)))
    doc = report_to_dict(rep, problem="quadratic", solver="proposed", params={})
    assert all(isinstance(v, float) for v in doc["solution"])
    assert np.asarray(doc["solution"]).shape == (3,)
