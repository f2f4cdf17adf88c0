"""Feature-engineering transforms and the alignment pipeline.

Differencing and rolling transforms consume rows at the head of the
series; the pipeline records each column's warm-up and truncates every
output consistently so the final design matrix stays rectangular.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

SIGN_LEVELS = ("plus", "minus", "zero")


def log_return(prices) -> np.ndarray:
    """ln(P_t) - ln(P_{t-1}); requires strictly positive prices."""
    p = np.asarray(prices, dtype=float)
    if (p <= 0).any():
        raise ValueError("prices must be positive")
    return np.diff(np.log(p))


def rolling_std(x, window: int) -> np.ndarray:
    """Trailing-window sample standard deviation (denominator window-1).

    The first window-1 positions have no value and are dropped, so the
    output has length T - window + 1.
    """
    arr = np.asarray(x, dtype=float)
    if window < 2:
        raise ValueError("window must be at least 2")
    if arr.shape[0] < window:
        raise ValueError("window exceeds the series length")
    frames = np.lib.stride_tricks.sliding_window_view(arr, window)
    return frames.std(axis=1, ddof=1)


def sign_diff(x) -> list[str]:
    """Sign of consecutive differences as categorical values.

    Normally a two-level variable; an exact zero difference gets its own
    level and triggers a warning.
    """
    arr = np.asarray(x, dtype=float)
    if arr.shape[0] < 2:
        raise ValueError("need at least two values")
    diffs = np.diff(arr)
    if (diffs == 0).any():
        warnings.warn("zero difference encountered; emitting a third 'zero' level")
    return ["plus" if d > 0 else "minus" if d < 0 else "zero" for d in diffs]


def _plateau_runs(arr: np.ndarray):
    starts = [0]
    for i in range(1, arr.shape[0]):
        if arr[i] != arr[i - 1]:
            starts.append(i)
    values = arr[np.array(starts)]
    return np.array(starts), values


def local_extrema(x, which: str) -> np.ndarray:
    """Value of the nearest strict local extremum for every position.

    Plateaus collapse to their first index; an interior run is an
    extremum when strictly below (min) or above (max) both neighboring
    runs. Distance ties prefer the earlier index. A series with no
    interior extremum falls back to the global min or max everywhere.
    """
    arr = np.asarray(x, dtype=float)
    if arr.shape[0] < 3:
        raise ValueError("need at least three values")
    if which not in ("min", "max"):
        raise ValueError("which must be 'min' or 'max'")
    starts, values = _plateau_runs(arr)
    idx = []
    for i in range(1, len(starts) - 1):
        if which == "min":
            hit = values[i] < values[i - 1] and values[i] < values[i + 1]
        else:
            hit = values[i] > values[i - 1] and values[i] > values[i + 1]
        if hit:
            idx.append(starts[i])
    if not idx:
        fallback = arr.min() if which == "min" else arr.max()
        return np.full(arr.shape[0], fallback)
    positions = np.array(idx)
    t = np.arange(arr.shape[0])
    dist = np.abs(t[:, None] - positions[None, :])
    nearest = np.argmin(dist, axis=1)  # argmin takes the earlier index on ties
    return arr[positions[nearest]]


def relative_phase(m_a, node_a, peri_a, m_b, node_b, peri_b) -> np.ndarray:
    """Element sum difference of two (anomaly, node, pericenter) triples, mod 2pi."""
    series = [np.asarray(v, dtype=float) for v in
              (m_a, node_a, peri_a, m_b, node_b, peri_b)]
    length = series[0].shape[0]
    if any(s.shape != (length,) for s in series):
        raise ValueError("all six series must share their length")
    theta = (series[0] + series[1] + series[2]) - (series[3] + series[4] + series[5])
    return np.mod(theta, TWO_PI)


@dataclass(frozen=True)
class TransformSpec:
    """One derived column: operation, source column(s), output name."""

    op: str
    sources: tuple[str, ...]
    output: str
    window: int | None = None
    which: str | None = None

    N_SOURCES = {"log_return": 1, "rolling_std": 1, "sign_diff": 1,
                 "local_extrema": 1, "relative_phase": 6}

    def __post_init__(self):
        if self.op not in self.N_SOURCES:
            raise ValueError(f"unknown transform {self.op!r}")
        object.__setattr__(self, "sources", tuple(self.sources))
        if len(self.sources) != self.N_SOURCES[self.op]:
            raise ValueError(f"{self.op} takes {self.N_SOURCES[self.op]} source(s)")
        if self.op == "rolling_std" and (self.window is None or self.window < 2):
            raise ValueError("rolling_std needs a window >= 2")
        if self.op == "local_extrema" and self.which not in ("min", "max"):
            raise ValueError("local_extrema needs which of 'min' or 'max'")


#: per-op rows consumed at the head of the series
_WARMUP = {"log_return": 1, "sign_diff": 1, "local_extrema": 0, "relative_phase": 0}


def apply_transforms(columns: dict, specs: list[TransformSpec], keep=()):
    """Run the transforms and align everything to a common head offset.

    ``columns`` maps names to equal-length numeric arrays and is
    extended in order, so later specs may consume earlier outputs.
    Returns (table, categorical_levels) where table maps output and kept
    column names to arrays truncated to the shared length.
    """
    work = {name: np.asarray(col) for name, col in columns.items()}
    warmup = {name: 0 for name in work}
    categorical: dict[str, tuple[str, ...]] = {}

    for spec in specs:
        for src in spec.sources:
            if src not in work:
                raise ValueError(f"unknown source column {spec.sources!r}")
            if src in categorical:
                raise ValueError(f"{spec.op} cannot consume categorical {src!r}")
        if spec.output in work:
            raise ValueError(f"duplicate output column {spec.output!r}")
        src_arrays = [work[s] for s in spec.sources]
        base = max(warmup[s] for s in spec.sources)
        if len(spec.sources) > 1:
            # multi-source ops need their inputs on a shared offset
            src_arrays = [a[base - warmup[s]:] if warmup[s] < base else a
                          for a, s in zip(src_arrays, spec.sources)]
        if spec.op == "log_return":
            out = log_return(src_arrays[0])
            off = base + 1
        elif spec.op == "rolling_std":
            out = rolling_std(src_arrays[0], spec.window)
            off = base + spec.window - 1
        elif spec.op == "sign_diff":
            out = np.array(sign_diff(src_arrays[0]), dtype=object)
            categorical[spec.output] = SIGN_LEVELS
            off = base + 1
        elif spec.op == "local_extrema":
            out = local_extrema(src_arrays[0], spec.which)
            off = base
        else:
            out = relative_phase(*src_arrays)
            off = base
        work[spec.output] = out
        warmup[spec.output] = off

    emitted = [s.output for s in specs] + [k for k in keep if k not in
                                           {s.output for s in specs}]
    for name in keep:
        if name not in work:
            raise ValueError(f"unknown keep column {name!r}")
    final = max(warmup[name] for name in emitted) if emitted else 0
    table = {}
    for name in emitted:
        col = work[name]
        table[name] = col[final - warmup[name]:] if warmup[name] < final else col
    lengths = {len(v) for v in table.values()}
    if len(lengths) > 1:
        raise AssertionError("alignment produced ragged columns")
    return table, categorical
