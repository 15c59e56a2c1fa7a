"""End-to-end CLI tests: run, grid, plot, verify, exit codes, config files."""

import filecmp
import json
import os

import jsonschema
import pytest

from restartagd import REPORT_SCHEMA, read_trace_csv
from restartagd.cli import main


def read_report(out_dir):
    with open(os.path.join(out_dir, "report.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# run


def test_run_writes_trace_and_report(tmp_path, capsys):
    out = str(tmp_path / "cell")
    rc = main(["run", "--problem", "rosenbrock", "--solver", "proposed",
               "--l-init", "100", "--eps", "1e-4", "--out", out])
    assert rc == 0
    doc = read_report(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["reason"] == "EpsReached"
    assert doc["certified_grad_norm"] <= 1e-4
    records = read_trace_csv(os.path.join(out, "trace.csv"))
    assert len(records) == doc["total_K"]
    shown = capsys.readouterr().out
    assert "reason=EpsReached" in shown


def test_run_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rc = main(["run", "--problem", "quadratic", "--solver", "gd",
               "--l-init", "1.0", "--eps", "1e-6"])
    assert rc == 0
    assert os.path.exists(tmp_path / "runs" / "quadratic_gd" / "report.json")


def test_run_eps_zero_disables_gradient_stop(tmp_path):
    out = str(tmp_path / "cell")
    rc = main(["run", "--problem", "rosenbrock", "--solver", "proposed",
               "--l-init", "100", "--eps", "0", "--max-iterations", "5",
               "--out", out])
    assert rc == 0
    doc = read_report(out)
    assert doc["reason"] == "BudgetExhausted"
    assert doc["total_K"] == 5
    assert doc["params"]["eps"] is None


def test_run_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "run:\n"
        "  problem: quadratic\n"
        "  solver: proposed\n"
        "  l_init: 5.0\n"
        "  max_iterations: 4\n"
        "  eps: 0.0\n"
    )
    out = str(tmp_path / "cell")
    rc = main(["run", "--config", str(cfg), "--l-init", "2.0", "--out", out])
    assert rc == 0
    doc = read_report(out)
    assert doc["params"]["l_init"] == 2.0          # flag wins
    assert doc["total_K"] == 4                      # config survives elsewhere


def test_run_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("run:\n  learning_rate: 0.1\n")
    rc = main(["run", "--config", str(cfg)])
    assert rc == 2
    assert "unknown config key" in capsys.readouterr().err


def test_run_rejects_unknown_solver_in_config(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("run:\n  solver: adam\n")
    rc = main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert rc == 2


def test_run_rejects_missing_config_file(tmp_path):
    rc = main(["run", "--config", str(tmp_path / "nope.yaml")])
    assert rc == 2


def test_run_rejects_unknown_problem_flag():
    with pytest.raises(SystemExit):
        main(["run", "--problem", "styblinski"])


def test_run_oracle_failure_keeps_partial_trace(tmp_path, capsys):
    # A fixed step constant far below Rosenbrock's curvature diverges; the
    # run must exit 3 and leave the rows it completed on disk.
    out = str(tmp_path / "cell")
    rc = main(["run", "--problem", "rosenbrock", "--solver", "ll2022",
               "--l-init", "100", "--out", out])
    assert rc == 3
    assert "oracle failure" in capsys.readouterr().err
    records = read_trace_csv(os.path.join(out, "trace.csv"))
    assert len(records) > 0
    assert not os.path.exists(os.path.join(out, "report.json"))


# ---------------------------------------------------------------------------
# grid


GRID_CFG = """
grid:
  problem: quadratic
  dim: 6
  solvers: [proposed, gd]
  l_init: [1.0, 4.0]
  m0: [1.0]
  thresholds: [1e-2, 1e-6]
  eps: 1e-6
  max_oracle_calls: 10000
"""


def test_grid_summary_and_cells(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(GRID_CFG)
    out = str(tmp_path / "grid")
    rc = main(["grid", "--config", str(cfg), "--out", out])
    assert rc == 0

    with open(os.path.join(out, "summary.csv"), "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    assert header == ["problem", "solver", "l_init", "m0", "reason",
                      "certified_grad_norm", "n_oracle",
                      "calls_to_0.01", "calls_to_1e-06", "error"]
    # proposed runs the m0 axis, gd collapses it: 2 + 2 cells
    assert len(lines) == 1 + 4

    for tag in ("proposed_L1_M1", "proposed_L4_M1", "gd_L1", "gd_L4"):
        assert os.path.exists(os.path.join(out, tag, "trace.csv"))
        doc = read_report(os.path.join(out, tag))
        jsonschema.validate(doc, REPORT_SCHEMA)
        # the L=1 cells land on the exact minimizer (zero gradient)
        assert doc["reason"] in ("EpsReached", "Stationary")

    rows = [line.split(",") for line in lines[1:]]
    hit_col = header.index("calls_to_1e-06")
    assert all(row[hit_col] != "" for row in rows)
    assert "wrote" in capsys.readouterr().out


def test_grid_parallel_matches_serial(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(GRID_CFG)
    serial = str(tmp_path / "serial")
    parallel = str(tmp_path / "parallel")
    assert main(["grid", "--config", str(cfg), "--out", serial]) == 0
    assert main(["grid", "--config", str(cfg), "--out", parallel,
                 "--parallel", "2"]) == 0
    assert filecmp.cmp(os.path.join(serial, "summary.csv"),
                       os.path.join(parallel, "summary.csv"), shallow=False)
    assert filecmp.cmp(os.path.join(serial, "proposed_L4_M1", "trace.csv"),
                       os.path.join(parallel, "proposed_L4_M1", "trace.csv"),
                       shallow=False)


def test_grid_rejects_unknown_solver(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("grid:\n  solvers: [rmsprop]\n")
    rc = main(["grid", "--config", str(cfg), "--out", str(tmp_path / "g")])
    assert rc == 2


# ---------------------------------------------------------------------------
# plot


def test_plot_renders_svg(tmp_path):
    out_a = str(tmp_path / "fast")
    out_b = str(tmp_path / "slow")
    assert main(["run", "--problem", "rosenbrock", "--solver", "proposed",
                 "--l-init", "100", "--eps", "1e-4", "--out", out_a]) == 0
    assert main(["run", "--problem", "rosenbrock", "--solver", "gd",
                 "--l-init", "100", "--eps", "1e-4", "--out", out_b]) == 0
    svg = str(tmp_path / "fig" / "compare.svg")
    rc = main(["plot", os.path.join(out_a, "trace.csv"),
               os.path.join(out_b, "trace.csv"),
               "--out", svg, "--title", "comparison"])
    assert rc == 0
    text = open(svg, "r", encoding="utf-8").read()
    assert "<svg" in text
    assert "fast" in text and "slow" in text     # labels from directory names
    assert "comparison" in text


def test_plot_rejects_unreadable_trace(tmp_path):
    rc = main(["plot", str(tmp_path / "missing.csv")])
    assert rc == 2


# ---------------------------------------------------------------------------
# verify


def test_verify_passes_with_true_constants(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "verify:\n"
        "  problems: [quadratic, cosine_sum]\n"
        "  dim: 3\n"
        "  samples: 300\n"
    )
    rc = main(["verify", "--config", str(cfg)])
    assert rc == 0
    shown = capsys.readouterr().out
    assert shown.count("PASS") == 6      # 3 suites x 2 problems
    assert "FAIL" not in shown


def test_verify_catches_understated_curvature(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "verify:\n"
        "  problems: [cosine_sum]\n"
        "  dim: 2\n"
        "  samples: 500\n"
        "  m_scale: 0.5\n"
    )
    rc = main(["verify", "--config", str(cfg)])
    assert rc == 1
    shown = capsys.readouterr().out
    assert "FAIL" in shown
    assert "witness" in shown


def test_verify_rejects_bad_sample_count():
    assert main(["verify", "--samples", "0"]) == 2
