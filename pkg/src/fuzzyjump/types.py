"""Domain types: feature schema, data matrix, memberships, configuration.

Values are stored in a single float64 matrix; categorical entries hold the
integer index of their level (interned at ingestion in first-occurrence
order). All objects are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

GOWER = "gower"
SQUARED_EUCLIDEAN = "squared_euclidean"

MEMBERSHIP_SUM_TOL = 1e-9
MEMBERSHIP_CLAMP = 1e-12


@dataclass(frozen=True)
class Feature:
    """One column of the schema. ``levels is None`` marks a continuous feature."""

    name: str
    levels: tuple[str, ...] | None = None

    @property
    def is_categorical(self) -> bool:
        return self.levels is not None


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        if len(self.features) < 1:
            raise ValueError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        for f in self.features:
            if f.is_categorical and len(f.levels) == 0:
                raise ValueError(f"categorical feature {f.name!r} has no levels")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def continuous_mask(self) -> np.ndarray:
        return np.array([not f.is_categorical for f in self.features], dtype=bool)

    @property
    def all_continuous(self) -> bool:
        return all(not f.is_categorical for f in self.features)

    @staticmethod
    def continuous(names) -> "FeatureSchema":
        """Convenience constructor for an all-continuous schema."""
        return FeatureSchema(tuple(Feature(n) for n in names))


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DataMatrix:
    """T x P observation matrix tied to a schema. No missing entries."""

    schema: FeatureSchema
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if vals.shape[1] != self.schema.n_features:
            raise ValueError("column count does not match schema")
        if vals.shape[0] < 1:
            raise ValueError("data matrix is empty")
        for p, feat in enumerate(self.schema.features):
            col = vals[:, p]
            if not np.isfinite(col).all():
                raise ValueError(f"non-finite entry in feature {feat.name!r}")
            if feat.is_categorical:
                if not (col == np.round(col)).all():
                    raise ValueError(f"non-integer level index in {feat.name!r}")
                if col.min() < 0 or col.max() >= len(feat.levels):
                    raise ValueError(f"level index out of range in {feat.name!r}")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FeatureRanges:
    """Per-feature normalizing ranges; NaN marks categorical slots."""

    sigma: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if sig.ndim != 1:
            raise ValueError("sigma must be a vector")
        cont = ~np.isnan(sig)
        if (sig[cont] < 0).any():
            raise ValueError("ranges must be nonnegative")
        object.__setattr__(self, "sigma", _freeze(sig))

    def continuous_mask(self) -> np.ndarray:
        return ~np.isnan(self.sigma)


@dataclass(frozen=True)
class PrototypeSet:
    """K x P state prototypes in the same encoding as the data matrix.

    ``reseeded`` lists states whose weight mass vanished during an update
    and were re-drawn from a random data row.
    """

    schema: FeatureSchema
    values: np.ndarray
    reseeded: tuple[int, ...] = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != self.schema.n_features:
            raise ValueError("prototype shape does not match schema")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n_states(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FitConfig:
    """Model hyperparameters and solver settings.

    fuzziness >= 1 is the exponent on memberships in the fit term;
    jump_penalty >= 0 weights the squared L1 difference of consecutive
    membership rows. The squared-Euclidean distance mode requires an
    all-continuous schema.
    """

    n_states: int
    fuzziness: float
    jump_penalty: float
    distance_mode: str = GOWER
    restarts: int = 10
    max_outer_iter: int = 50
    outer_tol: float = 1e-8
    pgd_max_iter: int = 200
    pgd_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.n_states < 2:
            raise ValueError("n_states must be at least 2")
        if self.fuzziness < 1.0:
            raise ValueError("fuzziness must be >= 1")
        if self.jump_penalty < 0.0:
            raise ValueError("jump_penalty must be >= 0")
        if self.distance_mode not in (GOWER, SQUARED_EUCLIDEAN):
            raise ValueError(f"unknown distance mode {self.distance_mode!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def normalize_memberships(s: np.ndarray) -> np.ndarray:
    """Clamp tiny negative entries to zero and renormalize each row.

    Entries below the -1e-12 floor are a genuine error rather than
    round-off and are rejected.
    """
    arr = np.array(s, dtype=float)
    if arr.ndim != 2:
        raise ValueError("membership matrix must be 2-d")
    if (arr < -MEMBERSHIP_CLAMP).any():
        raise ValueError("membership entries below the clamping floor")
    arr[arr < 0.0] = 0.0
    sums = arr.sum(axis=1, keepdims=True)
    if (sums <= 0.0).any():
        raise ValueError("membership row sums to zero")
    return arr / sums


def validate_memberships(s: np.ndarray) -> np.ndarray:
    """Check row-stochasticity within tolerance; returns the array unchanged."""
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 2:
        raise ValueError("membership matrix must be 2-d")
    if (arr < -MEMBERSHIP_CLAMP).any():
        raise ValueError("negative membership entry")
    if np.abs(arr.sum(axis=1) - 1.0).max() > MEMBERSHIP_SUM_TOL:
        raise ValueError("membership row does not sum to 1")
    return arr
