"""Benchmark harness CLI: ``run`` one solve, ``grid`` a parameter sweep,
``plot`` traces to SVG, ``verify`` the smoothness inequalities by sampling.

Settings come from an optional YAML config file (sections named after the
subcommands) overridden by command-line flags; flags always win.  Exit codes:
0 success, 1 verify found a violated inequality, 2 bad configuration,
3 the objective produced a non-finite value or gradient.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import baselines, checks
from . import solver as agd
from .oracle import OracleError
from .problems import PROBLEM_NAMES, ProblemSpec, make_problem
from .svgplot import write_traces_svg
from .trace import (RunReport, TraceRecord, read_trace_csv, report_to_dict,
                    write_report_json, write_trace_csv)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ORACLE = 3

SOLVER_NAMES = ("proposed", "gd", "ll2022")


class ConfigError(Exception):
    pass


RUN_DEFAULTS = {
    "problem": "rosenbrock",
    "solver": "proposed",
    "m_variant": "practical",
    "certify_mode": "OnCandidate",
    "l_init": 1e-3,
    "m0": 1e-16,
    "alpha": 2.0,
    "beta": 0.9,
    "eps": 1e-6,
    "max_oracle_calls": 100_000,
    "max_iterations": None,
    "max_seconds": None,
    "ll_eps": 1e-16,
    "seed": 0,
    "out": None,
    "dim": None,
    "lam": 1.0,
    "rank": None,
    "fraction": 0.3,
    "data_path": None,
}

GRID_DEFAULTS = {
    "problem": "rosenbrock",
    "solvers": ["proposed", "gd"],
    "l_init": [1e2, 1e3, 1e4],
    "m0": [1.0, 10.0, 100.0],
    "m_variant": "practical",
    "certify_mode": "OnCandidate",
    "alpha": 2.0,
    "beta": 0.9,
    "eps": 1e-6,
    "max_oracle_calls": 100_000,
    "max_iterations": None,
    "max_seconds": None,
    "ll_eps": 1e-16,
    "thresholds": [1e-2, 1e-4, 1e-6],
    "seed": 0,
    "out": "runs/grid",
    "dim": None,
    "lam": 1.0,
    "rank": None,
    "fraction": 0.3,
    "data_path": None,
}

VERIFY_DEFAULTS = {
    "problems": ["quadratic", "cosine_sum", "rosenbrock"],
    "samples": 10_000,
    "seed": 0,
    "box": 10.0,
    "l_scale": 1.0,
    "m_scale": 1.0,
    "dim": None,
    "lam": 1.0,
}


def _load_config(path: Optional[str], section: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}")
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    sec = doc.get(section, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{path}: section {section!r} must be a mapping")
    return sec


def _settings(defaults: dict, config: dict, flags: dict) -> dict:
    merged = dict(defaults)
    for key, val in config.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}")
        merged[key] = val
    for key, val in flags.items():
        if val is not None:
            merged[key] = val
    return merged


def _make_problem(s: dict, problem: Optional[str] = None) -> ProblemSpec:
    name = problem or s["problem"]
    try:
        return make_problem(
            name, seed=int(s["seed"]), dim=s.get("dim"), lam=float(s.get("lam", 1.0)),
            rank=s.get("rank"), fraction=float(s.get("fraction", 0.3)),
            data_path=s.get("data_path"),
        )
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc))


def _termination(s: dict) -> agd.TerminationPolicy:
    eps = s["eps"]
    if eps is not None and float(eps) == 0.0:
        eps = None  # 0 disables the gradient-norm stop
    try:
        return agd.TerminationPolicy(
            eps=None if eps is None else float(eps),
            max_oracle_calls=None if s["max_oracle_calls"] is None else int(s["max_oracle_calls"]),
            max_iterations=None if s["max_iterations"] is None else int(s["max_iterations"]),
            max_seconds=None if s["max_seconds"] is None else float(s["max_seconds"]),
            certify_mode=s["certify_mode"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _execute(spec: ProblemSpec, s: dict) -> Tuple[RunReport, dict]:
    pol = _termination(s)
    name = s["solver"]
    try:
        if name == "proposed":
            params = agd.SolverParams(
                l_init=float(s["l_init"]), m0=float(s["m0"]),
                alpha=float(s["alpha"]), beta=float(s["beta"]),
                m_variant=s["m_variant"], termination=pol,
            )
        elif name == "gd":
            params = baselines.GdParams(
                l_init=float(s["l_init"]), alpha=float(s["alpha"]),
                beta=float(s["beta"]), termination=pol,
            )
        elif name == "ll2022":
            params = baselines.LL2022Params(
                l_f=float(s["l_init"]), m_f=float(s["m0"]),
                eps=float(s["ll_eps"]), termination=pol,
            )
        else:
            raise ConfigError(f"unknown solver {name!r}")
    except ValueError as exc:
        raise ConfigError(str(exc))

    if name == "proposed":
        report = agd.run(spec.objective, spec.x_init, params)
        doc = {"l_init": params.l_init, "m0": params.m0, "alpha": params.alpha,
               "beta": params.beta, "m_variant": params.m_variant}
    elif name == "gd":
        report = baselines.gd_run(spec.objective, spec.x_init, params)
        doc = {"l_init": params.l_init, "alpha": params.alpha, "beta": params.beta}
    else:
        report = baselines.ll2022_run(spec.objective, spec.x_init, params)
        doc = {"l_f": params.l_f, "m_f": params.m_f, "tuned_eps": params.eps,
               "momentum": params.momentum}
    doc.update({
        "eps": pol.eps, "max_oracle_calls": pol.max_oracle_calls,
        "max_iterations": pol.max_iterations, "max_seconds": pol.max_seconds,
        "certify_mode": pol.certify_mode, "seed": int(s["seed"]),
    })
    return report, doc


def cmd_run(args: argparse.Namespace) -> int:
    flags = {k: getattr(args, k) for k in
             ("problem", "solver", "m_variant", "l_init", "m0", "alpha", "beta",
              "eps", "max_oracle_calls", "max_iterations", "max_seconds",
              "seed", "out")}
    s = _settings(RUN_DEFAULTS, _load_config(args.config, "run"), flags)
    spec = _make_problem(s)
    out_dir = s["out"] or os.path.join("runs", f"{spec.name}_{s['solver']}")
    os.makedirs(out_dir, exist_ok=True)
    trace_path = os.path.join(out_dir, "trace.csv")
    report_path = os.path.join(out_dir, "report.json")

    try:
        report, params_doc = _execute(spec, s)
    except OracleError as exc:
        partial = getattr(exc, "partial_trace", [])
        write_trace_csv(trace_path, partial)
        print(f"error: oracle failure: {exc}", file=sys.stderr)
        print(f"partial trace ({len(partial)} rows) written to {trace_path}",
              file=sys.stderr)
        return EXIT_ORACLE

    write_trace_csv(trace_path, report.trace)
    doc = report_to_dict(report, problem=spec.name, solver=s["solver"],
                         params=params_doc, trace_path=trace_path)
    write_report_json(report_path, doc)
    print(f"{spec.name} / {s['solver']}: reason={report.reason} "
          f"certified_grad_norm={report.certified_grad_norm:.6e} "
          f"n_oracle={report.n_oracle} epochs={report.total_epochs}")
    print(f"wrote {trace_path} and {report_path}")
    return EXIT_OK


def _calls_to_thresholds(records: Sequence[TraceRecord],
                         thresholds: Sequence[float]) -> List[Optional[int]]:
    hits: List[Optional[int]] = [None] * len(thresholds)
    best = math.inf
    for rec in records:
        cert = rec.grad_norm_monitor
        if rec.grad_norm_ybar is not None:
            cert = min(cert, rec.grad_norm_ybar)
        if cert < best:
            best = cert
            for i, thr in enumerate(thresholds):
                if hits[i] is None and best <= thr:
                    hits[i] = rec.n_oracle
    return hits


def _grid_worker(payload: dict) -> dict:
    s = payload["settings"]
    spec = _make_problem(s)
    cell_dir = payload["cell_dir"]
    os.makedirs(cell_dir, exist_ok=True)
    trace_path = os.path.join(cell_dir, "trace.csv")
    row = {
        "problem": spec.name, "solver": s["solver"],
        "l_init": repr(float(s["l_init"])),
        "m0": "" if s["m0"] is None else repr(float(s["m0"])),
        "reason": "", "certified_grad_norm": "", "n_oracle": "", "error": "",
    }
    thresholds = payload["thresholds"]
    try:
        report, params_doc = _execute(spec, s)
    except OracleError as exc:
        partial = getattr(exc, "partial_trace", [])
        write_trace_csv(trace_path, partial)
        row["error"] = str(exc)
        for thr in thresholds:
            row[_thr_col(thr)] = ""
        return row
    write_trace_csv(trace_path, report.trace)
    doc = report_to_dict(report, problem=spec.name, solver=s["solver"],
                         params=params_doc, trace_path=trace_path)
    write_report_json(os.path.join(cell_dir, "report.json"), doc)
    row["reason"] = report.reason
    row["certified_grad_norm"] = repr(float(report.certified_grad_norm))
    row["n_oracle"] = str(report.n_oracle)
    for thr, hit in zip(thresholds, _calls_to_thresholds(report.trace, thresholds)):
        row[_thr_col(thr)] = "" if hit is None else str(hit)
    return row


def _thr_col(thr: float) -> str:
    return f"calls_to_{thr:g}"


def cmd_grid(args: argparse.Namespace) -> int:
    flags = {"out": args.out, "seed": args.seed}
    s = _settings(GRID_DEFAULTS, _load_config(args.config, "grid"), flags)
    solvers = s["solvers"]
    if isinstance(solvers, str):
        solvers = [solvers]
    for name in solvers:
        if name not in SOLVER_NAMES:
            raise ConfigError(f"unknown solver {name!r}")
    l_values = [float(v) for v in np.atleast_1d(s["l_init"])]
    m_values = [float(v) for v in np.atleast_1d(s["m0"])]
    thresholds = [float(v) for v in s["thresholds"]]
    out_dir = s["out"]
    os.makedirs(out_dir, exist_ok=True)

    payloads = []
    for solver_name in solvers:
        m_axis = [None] if solver_name == "gd" else m_values
        for l_val in l_values:
            for m_val in m_axis:
                cell = dict(s)
                cell["solver"] = solver_name
                cell["l_init"] = l_val
                cell["m0"] = m_val
                tag = f"{solver_name}_L{l_val:g}" + ("" if m_val is None else f"_M{m_val:g}")
                payloads.append({
                    "settings": cell,
                    "cell_dir": os.path.join(out_dir, tag),
                    "thresholds": thresholds,
                })

    if args.parallel and args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            rows = list(pool.map(_grid_worker, payloads))
    else:
        rows = [_grid_worker(p) for p in payloads]

    columns = ["problem", "solver", "l_init", "m0", "reason",
               "certified_grad_norm", "n_oracle"]
    columns += [_thr_col(t) for t in thresholds]
    columns += ["error"]
    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    for row in rows:
        status = row["error"] or row["reason"]
        print(f"{row['solver']:9s} l_init={row['l_init']:>8s} m0={row['m0']:>8s} "
              f"-> {status} (n_oracle={row['n_oracle']})")
    print(f"wrote {summary_path}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    series = []
    for path in args.traces:
        try:
            records = read_trace_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read trace {path}: {exc}")
        label = os.path.basename(os.path.dirname(path)) or os.path.basename(path)
        series.append((label, records))
    out = args.out or "trace.svg"
    out_parent = os.path.dirname(out)
    if out_parent:
        os.makedirs(out_parent, exist_ok=True)
    write_traces_svg(out, series, title=args.title or "")
    print(f"wrote {out}")
    return EXIT_OK


def _box_constants(spec: ProblemSpec, half_width: float) -> Tuple[float, float]:
    """Curvature constants to verify against: the problem's own if declared,
    else conservative bounds over the sampling box (Rosenbrock only)."""
    if spec.known_L is not None and spec.known_M is not None:
        return spec.known_L, spec.known_M
    if spec.name == "rosenbrock":
        b = half_width
        return 202.0 + 1200.0 * b * b + 800.0 * b, 2400.0 * b + 1200.0
    raise ConfigError(f"no curvature constants available for {spec.name!r}")


def cmd_verify(args: argparse.Namespace) -> int:
    flags = {"samples": args.samples, "seed": args.seed}
    s = _settings(VERIFY_DEFAULTS, _load_config(args.config, "verify"), flags)
    samples = int(s["samples"])
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    box = float(s["box"])
    if box <= 0:
        raise ConfigError("box must be positive")
    names = s["problems"]
    if isinstance(names, str):
        names = [names]

    rng = np.random.default_rng(int(s["seed"]))
    failures = 0
    for name in names:
        spec = _make_problem(s, problem=name)
        obj = spec.objective
        L, M = _box_constants(spec, box)
        L *= float(s["l_scale"])
        M *= float(s["m_scale"])
        lo, hi = -box, box

        suites = {"descent_lemma": None, "trapezoid": None, "jensen_gradient": None}
        for check_name in suites:
            worst = math.inf
            bad = None
            for _ in range(samples):
                if check_name == "descent_lemma":
                    x = rng.uniform(lo, hi, obj.dim)
                    y = rng.uniform(lo, hi, obj.dim)
                    rep = checks.check_descent_lemma(obj, x, y, L)
                elif check_name == "trapezoid":
                    x = rng.uniform(lo, hi, obj.dim)
                    y = rng.uniform(lo, hi, obj.dim)
                    rep = checks.check_trapezoid(obj, x, y, M)
                else:
                    n = int(rng.integers(2, 6))
                    pts = [rng.uniform(lo, hi, obj.dim) for _ in range(n)]
                    w = rng.dirichlet(np.ones(n))
                    w = w / w.sum()
                    rep = checks.check_jensen_gradient(obj, pts, w, M)
                if rep.slack < worst:
                    worst = rep.slack
                    if not rep.holds and bad is None:
                        bad = rep
                if not rep.holds and bad is None:
                    bad = rep
            verdict = "PASS" if bad is None else "FAIL"
            print(f"{verdict} {check_name} on {name}: {samples} samples, "
                  f"worst slack={worst:.3e}")
            if bad is not None:
                failures += 1
                pts = ", ".join(np.array2string(np.asarray(wit), precision=6)
                                for wit in bad.witness)
                print(f"     witness: lhs={bad.lhs:.6e} rhs={bad.rhs:.6e} at {pts}")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restartagd",
        description="Benchmark harness for restarted accelerated gradient descent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one solver on one problem")
    runp.add_argument("--config", help="YAML config file (section 'run')")
    runp.add_argument("--problem", choices=PROBLEM_NAMES)
    runp.add_argument("--solver", choices=SOLVER_NAMES)
    runp.add_argument("--m-variant", dest="m_variant",
                      choices=(agd.M_PRACTICAL, agd.M_THEORETICAL))
    runp.add_argument("--l-init", dest="l_init", type=float,
                      help="initial step constant (L_f for ll2022)")
    runp.add_argument("--m0", type=float,
                      help="initial curvature estimate (M_f for ll2022)")
    runp.add_argument("--alpha", type=float)
    runp.add_argument("--beta", type=float)
    runp.add_argument("--eps", type=float, help="certified gradient target; 0 disables")
    runp.add_argument("--max-oracle-calls", dest="max_oracle_calls", type=int)
    runp.add_argument("--max-iterations", dest="max_iterations", type=int)
    runp.add_argument("--max-seconds", dest="max_seconds", type=float)
    runp.add_argument("--seed", type=int)
    runp.add_argument("--out", help="output directory")
    runp.set_defaults(func=cmd_run)

    gridp = sub.add_parser("grid", help="sweep solver parameters on one problem")
    gridp.add_argument("--config", help="YAML config file (section 'grid')")
    gridp.add_argument("--out")
    gridp.add_argument("--seed", type=int)
    gridp.add_argument("--parallel", type=int, default=1,
                       help="worker processes (same results as serial)")
    gridp.set_defaults(func=cmd_grid)

    plotp = sub.add_parser("plot", help="render trace CSVs to a two-panel SVG")
    plotp.add_argument("traces", nargs="+", help="trace.csv paths")
    plotp.add_argument("--out", help="output SVG path")
    plotp.add_argument("--title")
    plotp.set_defaults(func=cmd_plot)

    verp = sub.add_parser("verify", help="sample-test the smoothness inequalities")
    verp.add_argument("--config", help="YAML config file (section 'verify')")
    verp.add_argument("--samples", type=int)
    verp.add_argument("--seed", type=int)
    verp.set_defaults(func=cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
