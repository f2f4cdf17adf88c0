"""Command-line surface: fit, simulate, benchmark, tune-lambda, transform, eval.

Exit codes: 0 success, 2 usage error (argparse or invalid combination),
3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .benchmark import BenchmarkSpec, report_to_csv, report_to_json, run_benchmark
from .fitting import NumericalError, fit, map_labels
from .metrics import (
    adjusted_rand_index,
    align_and_mse,
    balanced_accuracy,
    lambda_stability_curve,
    state_conditional_stats,
)
from .simulate import SimulationConfig, sample_series, scenario_preset
from .transforms import TransformSpec, apply_transforms
from .types import GOWER, SQUARED_EUCLIDEAN, FitConfig

USAGE_ERROR = 2
DATA_ERROR = 3
NUMERICAL_ERROR = 4

_DISTANCE = {"gower": GOWER, "euclidean": SQUARED_EUCLIDEAN}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyjump",
                                     description="Soft and hard temporal "
                                                 "clustering with a jump penalty")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the model to a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--lambda", dest="penalty", type=float, required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--distance", choices=sorted(_DISTANCE), default="gower")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic series")
    p.add_argument("--scenario", choices=["soft", "hard"], required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("benchmark", help="Monte Carlo grid study")
    p.add_argument("--scenario", choices=["soft", "hard"], required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--lambda-grid", default="0:1:0.05",
                   help="min:max:step or comma-separated values")
    p.add_argument("--m-grid", default="1.01,1.25,1.5,1.75,2",
                   help="comma-separated values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True,
                   help="output stem; writes <out>.json and <out>.csv")

    p = sub.add_parser("tune-lambda", help="stability curve over the penalty grid")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--lambda-step", type=float, default=0.1)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("transform", help="feature engineering pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="compare estimates against ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--metrics", required=True,
                   help="comma-separated subset of mse,ari,bacc,stats")
    p.add_argument("--out", required=True)
    return parser


def _grid(text: str):
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        n = int(round((hi - lo) / step)) + 1
        return tuple(round(lo + i * step, 10) for i in range(n))
    return tuple(float(v) for v in text.split(","))


def _cmd_fit(args) -> int:
    schema = fio.load_column_specs(args.schema)
    data, _ = fio.read_csv(args.input, schema)
    cfg = FitConfig(
        n_states=args.k, fuzziness=args.m, jump_penalty=args.penalty,
        distance_mode=_DISTANCE[args.distance], restarts=args.restarts,
        max_outer_iter=args.max_iter, outer_tol=args.tol, seed=args.seed)
    result = fit(data, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fio.write_memberships_csv(out / "memberships.csv", result.memberships)
    fio.write_prototypes_json(out / "prototypes.json", result.prototypes)
    fio.write_fit_metrics_json(out / "metrics.json", result)
    print(f"objective {result.objective!r} after {result.iterations_used} iterations")
    return 0


def _cmd_simulate(args) -> int:
    preset = scenario_preset(args.scenario)
    if args.tau is not None:
        preset["noise_scale"] = args.tau
    if args.phi is not None:
        preset["persistence"] = args.phi
    cfg = SimulationConfig(n_states=args.k, n_features=args.p, n_steps=args.t,
                           correlation=args.rho, seed=args.seed, **preset)
    fio.write_series_csv(args.out, sample_series(cfg))
    print(f"wrote {args.t} rows to {args.out}")
    return 0


def _cmd_benchmark(args) -> int:
    spec = BenchmarkSpec(
        scenario=args.scenario, n_states=args.k, n_steps=args.t,
        n_features=args.p, replicas=args.replicas,
        penalty_grid=_grid(args.lambda_grid),
        fuzziness_grid=_grid(args.m_grid), base_seed=args.seed)
    report = run_benchmark(spec, workers=args.workers)
    stem = args.out[:-5] if args.out.endswith(".json") else args.out
    report_to_json(report, stem + ".json")
    report_to_csv(report, stem + ".csv")
    best = report.best
    print(f"best cell lambda={best.penalty} m={best.fuzziness} "
          f"mean_mse={best.mean_mse:.6f} sd={best.sd_mse:.6f}")
    return 0


def _cmd_tune_lambda(args) -> int:
    schema = fio.load_column_specs(args.schema)
    data, _ = fio.read_csv(args.input, schema)
    n = int(round((args.lambda_max - args.lambda_min) / args.lambda_step)) + 1
    grid = [round(args.lambda_min + i * args.lambda_step, 10) for i in range(n)]
    cfg = FitConfig(n_states=args.k, fuzziness=args.m, jump_penalty=0.0,
                    restarts=args.restarts, seed=args.seed)
    curve = lambda_stability_curve(data, args.k, args.m, grid, cfg)
    fio.write_table_csv(args.out, ["lambda", "mse_to_next"],
                        [[c[0] for c in curve], [c[1] for c in curve]])
    print(f"wrote {len(curve)} curve points to {args.out}")
    return 0


def _cmd_transform(args) -> int:
    with open(args.spec) as fh:
        doc = json.load(fh)
    specs = [TransformSpec(op=s["op"], sources=tuple(s["sources"]),
                           output=s["output"], window=s.get("window"),
                           which=s.get("which"))
             for s in doc.get("transforms", [])]
    keep = tuple(doc.get("keep", ()))
    with open(args.input, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    columns = {}
    for i, name in enumerate(header):
        raw = [row[i] for row in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = np.array(raw, dtype=object)
    table, _ = apply_transforms(columns, specs, keep=keep)
    fio.write_table_csv(args.out, list(table), [list(v) for v in table.values()])
    print(f"wrote {len(next(iter(table.values())))} rows to {args.out}")
    return 0


def _load_probs_or_labels(path):
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    if any(name.startswith("s_") for name in header):
        probs = fio.read_memberships_csv(path)
        return probs, map_labels(probs)
    if any(name.startswith("pi_") for name in header):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            head = next(reader)
            cols = [i for i, name in enumerate(head) if name.startswith("pi_")]
            probs = np.array([[float(row[i]) for i in cols] for row in reader])
        return probs, map_labels(probs)
    # label values are categorical identifiers: densify to 0-based codes so
    # files with 1-based labels compare cleanly against MAP labels
    labels = fio.read_labels_csv(path)
    return None, np.unique(labels, return_inverse=True)[1]


def _cmd_eval(args) -> int:
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(wanted) - {"mse", "ari", "bacc", "stats"}
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    results = {}
    if "stats" in wanted:
        # truth holds the raw series here; est supplies the labels
        _, labels = _load_probs_or_labels(args.est)
        with open(args.truth, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            series = np.array([[float(v) for v in row] for row in reader])
        stats = state_conditional_stats(series, labels)
        results["stats"] = {
            str(state): {
                "count": st.count,
                "mean": dict(zip(header, map(float, st.mean))),
                "sd": dict(zip(header, map(float, st.sd))),
                "corr": [[None if np.isnan(v) else float(v) for v in row]
                         for row in st.corr],
                "constant_columns": [header[i] for i in st.constant_columns],
            } for state, st in stats.items()}
    others = [m for m in wanted if m != "stats"]
    if others:
        est_probs, est_labels = _load_probs_or_labels(args.est)
        truth_probs, truth_labels = _load_probs_or_labels(args.truth)
        for metric in others:
            if metric == "mse":
                if est_probs is None or truth_probs is None:
                    raise ValueError("mse needs probability CSVs on both sides")
                mse, perm = align_and_mse(est_probs, truth_probs)
                results["mse"] = {"value": mse, "permutation": list(perm)}
            elif metric == "ari":
                results["ari"] = adjusted_rand_index(truth_labels, est_labels)
            else:
                results["bacc"] = balanced_accuracy(truth_labels, est_labels)
    with open(args.out, "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {sorted(results)} to {args.out}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "simulate": _cmd_simulate,
    "benchmark": _cmd_benchmark,
    "tune-lambda": _cmd_tune_lambda,
    "transform": _cmd_transform,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except fio.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, KeyError) as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
