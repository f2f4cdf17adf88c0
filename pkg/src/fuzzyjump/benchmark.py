"""Monte Carlo benchmark: simulate replicas, fit a hyperparameter grid, aggregate.

Each (replica, penalty, fuzziness) cell is an independent task keyed by
its coordinates, so serial and parallel execution aggregate identically.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .fitting import fit
from .metrics import align_and_mse
from .simulate import SimulationConfig, sample_series, scenario_preset
from .types import DataMatrix, FeatureSchema, FitConfig


@dataclass(frozen=True)
class BenchmarkSpec:
    scenario: str
    n_states: int
    n_steps: int
    n_features: int
    replicas: int
    penalty_grid: tuple[float, ...]
    fuzziness_grid: tuple[float, ...]
    base_seed: int = 0
    correlation: float = 0.0
    restarts: int = 10

    def __post_init__(self):
        scenario_preset(self.scenario)
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if not self.penalty_grid or not self.fuzziness_grid:
            raise ValueError("grids must be non-empty")
        object.__setattr__(self, "penalty_grid",
                           tuple(float(v) for v in self.penalty_grid))
        object.__setattr__(self, "fuzziness_grid",
                           tuple(float(v) for v in self.fuzziness_grid))


@dataclass(frozen=True)
class CellResult:
    penalty: float
    fuzziness: float
    mean_mse: float
    sd_mse: float
    replica_mse: tuple[float, ...]


@dataclass(frozen=True)
class BenchmarkReport:
    spec: BenchmarkSpec
    cells: tuple[CellResult, ...]
    best: CellResult
    elapsed_seconds: float
    seconds_per_fit: float

    def cell(self, penalty: float, fuzziness: float) -> CellResult:
        for c in self.cells:
            if c.penalty == penalty and c.fuzziness == fuzziness:
                return c
        raise KeyError((penalty, fuzziness))


def _seed_from(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def replica_series(spec: BenchmarkSpec, replica: int):
    preset = scenario_preset(spec.scenario)
    cfg = SimulationConfig(
        n_states=spec.n_states,
        n_features=spec.n_features,
        n_steps=spec.n_steps,
        correlation=spec.correlation,
        seed=_seed_from(spec.base_seed, replica),
        **preset,
    )
    return sample_series(cfg)


def _run_cell(args):
    spec, replica, penalty, fuzziness = args
    series = replica_series(spec, replica)
    schema = FeatureSchema.continuous([f"y_{i + 1}" for i in range(spec.n_features)])
    data = DataMatrix(schema, series.y)
    cfg = FitConfig(
        n_states=spec.n_states,
        fuzziness=fuzziness,
        jump_penalty=penalty,
        restarts=spec.restarts,
        seed=_seed_from(spec.base_seed, replica, 7),
    )
    result = fit(data, cfg)
    mse, _ = align_and_mse(result.memberships, series.pi_true)
    return (replica, penalty, fuzziness), mse


def run_benchmark(spec: BenchmarkSpec, workers: int = 1) -> BenchmarkReport:
    """Simulate, fit every grid cell on every replica, and aggregate.

    Deterministic given spec.base_seed regardless of worker count.
    """
    tasks = [(spec, r, lam, m)
             for r in range(spec.replicas)
             for lam in spec.penalty_grid
             for m in spec.fuzziness_grid]
    started = time.perf_counter()
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, mse in pool.map(_run_cell, tasks, chunksize=4):
                results[key] = mse
    else:
        for task in tasks:
            key, mse = _run_cell(task)
            results[key] = mse
    elapsed = time.perf_counter() - started

    cells = []
    for lam in spec.penalty_grid:
        for m in spec.fuzziness_grid:
            mses = np.array([results[(r, lam, m)] for r in range(spec.replicas)])
            sd = float(mses.std(ddof=1)) if spec.replicas > 1 else 0.0
            cells.append(CellResult(
                penalty=lam, fuzziness=m,
                mean_mse=float(mses.mean()), sd_mse=sd,
                replica_mse=tuple(float(v) for v in mses),
            ))
    best = min(cells, key=lambda c: (c.mean_mse, c.penalty, c.fuzziness))
    return BenchmarkReport(
        spec=spec,
        cells=tuple(cells),
        best=best,
        elapsed_seconds=elapsed,
        seconds_per_fit=elapsed / len(tasks),
    )


def report_to_json(report: BenchmarkReport, path):
    doc = {
        "spec": asdict(report.spec),
        "cells": [asdict(c) for c in report.cells],
        "best": asdict(report.best),
        "elapsed_seconds": report.elapsed_seconds,
        "seconds_per_fit": report.seconds_per_fit,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def report_to_csv(report: BenchmarkReport, path):
    """Long-format table: one row per grid cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["penalty", "fuzziness", "mean_mse", "sd_mse"])
        for c in report.cells:
            writer.writerow([repr(c.penalty), repr(c.fuzziness),
                             repr(c.mean_mse), repr(c.sd_mse)])
