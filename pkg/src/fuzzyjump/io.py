"""CSV ingestion, schema files, and result serialization.

Ingestion is strict: the header must match the declared columns, every
cell must parse, and missing values are rejected with row/column
diagnostics. Floats are written with repr so a write/read cycle is a
fixed point.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .fitting import FitResult, map_labels
from .types import DataMatrix, Feature, FeatureSchema, PrototypeSet

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Malformed input file or cell content."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str = CONTINUOUS
    role: str = "feature"

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.role not in ("feature", "passthrough"):
            raise ValueError(f"unknown column role {self.role!r}")


def load_column_specs(path) -> list[ColumnSpec]:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise DataError("schema file must hold a JSON array of column specs")
    specs = [ColumnSpec(name=c["name"], kind=c.get("kind", CONTINUOUS),
                        role=c.get("role", "feature")) for c in doc]
    names = [c.name for c in specs]
    if len(set(names)) != len(names):
        raise DataError("duplicate column names in schema")
    if not any(c.role == "feature" for c in specs):
        raise DataError("schema declares no feature columns")
    return specs


def read_csv(path, schema: list[ColumnSpec]):
    """Parse a CSV against the declared columns.

    Returns (DataMatrix, passthrough) where passthrough maps column
    names to raw string lists. Categorical levels are interned in
    first-occurrence order.
    """
    try:
        fh = open(path, newline="")
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        expected = [c.name for c in schema]
        if header != expected:
            raise DataError(f"{path}: header {header!r} does not match "
                            f"schema columns {expected!r}")
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")

    features = [c for c in schema if c.role == "feature"]
    col_index = {c.name: i for i, c in enumerate(schema)}
    levels: dict[str, list[str]] = {c.name: [] for c in features
                                    if c.kind == CATEGORICAL}
    values = np.empty((len(rows), len(features)))
    for r, row in enumerate(rows):
        if len(row) != len(schema):
            raise DataError(f"{path}: row {r + 2} has {len(row)} cells, "
                            f"expected {len(schema)}")
        for j, col in enumerate(features):
            cell = row[col_index[col.name]].strip()
            if cell == "":
                raise DataError(f"{path}: missing value at row {r + 2}, "
                                f"column {col.name!r}")
            if col.kind == CONTINUOUS:
                try:
                    parsed = float(cell)
                except ValueError:
                    raise DataError(f"{path}: cannot parse {cell!r} at row "
                                    f"{r + 2}, column {col.name!r}") from None
                if not np.isfinite(parsed):
                    raise DataError(f"{path}: missing value at row {r + 2}, "
                                    f"column {col.name!r}")
                values[r, j] = parsed
            else:
                interned = levels[col.name]
                if cell not in interned:
                    interned.append(cell)
                values[r, j] = interned.index(cell)

    feats = tuple(
        Feature(c.name) if c.kind == CONTINUOUS
        else Feature(c.name, tuple(levels[c.name]))
        for c in features)
    data = DataMatrix(FeatureSchema(feats), values)
    passthrough = {c.name: [row[col_index[c.name]] for row in rows]
                   for c in schema if c.role == "passthrough"}
    return data, passthrough


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table_csv(path, header, columns):
    """Write equal-length columns; floats via repr for exact round-trips."""
    length = len(columns[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in range(length):
            writer.writerow([_format(col[r]) for col in columns])


def write_data_csv(path, data: DataMatrix, passthrough=None):
    """Inverse of read_csv for the feature columns (plus passthrough)."""
    passthrough = passthrough or {}
    header = list(passthrough) + list(data.schema.names)
    columns = [passthrough[name] for name in passthrough]
    for p, feat in enumerate(data.schema.features):
        col = data.values[:, p]
        if feat.is_categorical:
            columns.append([feat.levels[int(v)] for v in col])
        else:
            columns.append(list(col))
    write_table_csv(path, header, columns)


def write_memberships_csv(path, memberships: np.ndarray):
    labels = map_labels(memberships)
    n_states = memberships.shape[1]
    header = ["t"] + [f"s_{k + 1}" for k in range(n_states)] + ["map_label"]
    columns = [list(range(1, memberships.shape[0] + 1))]
    columns += [list(memberships[:, k]) for k in range(n_states)]
    columns.append([int(v) + 1 for v in labels])
    write_table_csv(path, header, columns)


def read_memberships_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        state_cols = [i for i, name in enumerate(header) if name.startswith("s_")]
        if not state_cols:
            raise DataError(f"{path}: no s_* columns found")
        rows = [[float(row[i]) for i in state_cols] for row in reader]
    return np.array(rows)


def read_labels_csv(path, column=None) -> np.ndarray:
    """Single label column, or the named column of a wider file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if column is None:
            column = "label" if "label" in header else header[-1]
        if column not in header:
            raise DataError(f"{path}: no column {column!r}")
        i = header.index(column)
        labels = [row[i] for row in reader]
    try:
        return np.array([int(v) for v in labels])
    except ValueError:
        return np.array([float(v) for v in labels]).astype(int)


def write_prototypes_json(path, prototypes: PrototypeSet):
    doc = {}
    for k in range(prototypes.n_states):
        entry = {}
        for p, feat in enumerate(prototypes.schema.features):
            v = prototypes.values[k, p]
            entry[feat.name] = feat.levels[int(v)] if feat.is_categorical else float(v)
        doc[f"state_{k + 1}"] = entry
    if prototypes.reseeded:
        doc["reseeded_states"] = [k + 1 for k in prototypes.reseeded]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_fit_metrics_json(path, result: FitResult):
    doc = {
        "objective": result.objective,
        "objective_trace": [float(v) for v in result.objective_trace],
        "restart_objectives": [float(v) for v in result.restart_objectives],
        "iterations_used": result.iterations_used,
        "seed": result.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_series_csv(path, series):
    """Simulated series as y_*, pi_*, label columns."""
    n_feat = series.y.shape[1]
    n_states = series.pi_true.shape[1]
    header = ([f"y_{i + 1}" for i in range(n_feat)]
              + [f"pi_{k + 1}" for k in range(n_states)] + ["label"])
    columns = [list(series.y[:, i]) for i in range(n_feat)]
    columns += [list(series.pi_true[:, k]) for k in range(n_states)]
    columns.append([int(v) + 1 for v in series.component_labels])
    write_table_csv(path, header, columns)
