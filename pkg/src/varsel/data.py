"""Core immutable data containers: feature table and feature subsets.

Feature indices are 1-based everywhere in the public API, matching the
labeling used in reports (feature 113 is the 113th column of the table).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, InvalidSubsetError


@dataclass(frozen=True)
class Dataset:
    """An N x R feature table with one numeric target vector.

    Invariants enforced at construction: N >= R + 1 (one more row than
    features plus the intercept), all entries finite, unique labels.
    """

    features: np.ndarray
    target: np.ndarray
    labels: tuple[str, ...]
    target_label: str = "target"

    def __post_init__(self):
        # own private copies: they get frozen, and callers keep their arrays
        features = np.array(self.features, dtype=float)
        target = np.array(self.target, dtype=float)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "labels", tuple(self.labels))
        if features.ndim != 2:
            raise ConfigError("features must be a 2-D array")
        n, r = features.shape
        if target.shape != (n,):
            raise ConfigError(
                f"target length {target.shape} does not match {n} feature rows"
            )
        if len(self.labels) != r:
            raise ConfigError(f"{len(self.labels)} labels for {r} feature columns")
        if len(set(self.labels)) != r:
            raise ConfigError("feature labels must be unique")
        if n < r + 1:
            raise ConfigError(
                f"need at least R+1 rows: got N={n} rows for R={r} features"
            )
        if not np.isfinite(features).all() or not np.isfinite(target).all():
            raise ConfigError("non-finite entries in features or target")
        features.setflags(write=False)
        target.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def feature_column(self, index: int) -> np.ndarray:
        """Column for a 1-based feature index."""
        if not 1 <= index <= self.n_features:
            raise InvalidSubsetError(
                f"feature index {index} outside [1, {self.n_features}]"
            )
        return self.features[:, index - 1]

    def label_of(self, index: int) -> str:
        if not 1 <= index <= self.n_features:
            raise InvalidSubsetError(
                f"feature index {index} outside [1, {self.n_features}]"
            )
        return self.labels[index - 1]


@dataclass(frozen=True)
class FeatureSubset:
    """Ordered list of M distinct 1-based feature indices."""

    indices: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        indices = tuple(int(k) for k in self.indices)
        object.__setattr__(self, "indices", indices)
        if len(set(indices)) != len(indices):
            raise InvalidSubsetError(f"duplicate indices in subset {indices}")
        if any(k < 1 for k in indices):
            raise InvalidSubsetError(f"indices must be >= 1, got {indices}")

    @property
    def m(self) -> int:
        return len(self.indices)

    def validate_against(self, dataset: Dataset) -> None:
        bad = [k for k in self.indices if k > dataset.n_features]
        if bad:
            raise InvalidSubsetError(
                f"indices {bad} outside [1, {dataset.n_features}]"
            )

    def sorted(self) -> "FeatureSubset":
        return FeatureSubset(tuple(sorted(self.indices)))

    def replace_position(self, position: int, index: int) -> "FeatureSubset":
        """New subset with the 1-based position set to a new feature index."""
        if not 1 <= position <= self.m:
            raise InvalidSubsetError(f"position {position} outside [1, {self.m}]")
        items = list(self.indices)
        items[position - 1] = index
        return FeatureSubset(tuple(items))


def normalize_columns(values: np.ndarray, mode: str) -> np.ndarray:
    """Column-wise feature normalization used at ingestion.

    ``zscore`` centers and scales to unit (population) standard deviation,
    ``minmax`` maps the observed range onto [0, 1]; constant columns map to
    zero in both modes.
    """
    if mode == "none":
        return np.array(values, dtype=float)
    values = np.array(values, dtype=float)
    if mode == "zscore":
        mean = values.mean(axis=0)
        std = values.std(axis=0)
        safe = np.where(std > 0, std, 1.0)
        out = (values - mean) / safe
        out[:, std == 0] = 0.0
        return out
    if mode == "minmax":
        lo = values.min(axis=0)
        hi = values.max(axis=0)
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        out = (values - lo) / safe
        out[:, span == 0] = 0.0
        return out
    raise ConfigError(f"unknown normalization mode {mode!r}")


def make_dataset(
    features: Sequence[Sequence[float]] | np.ndarray,
    target: Sequence[float] | np.ndarray,
    labels: Sequence[str] | None = None,
    target_label: str = "target",
    normalize: str = "none",
) -> Dataset:
    """Convenience constructor with optional normalization and default labels."""
    features = normalize_columns(np.asarray(features, dtype=float), normalize)
    if labels is None:
        labels = tuple(f"x{k}" for k in range(1, features.shape[1] + 1))
    return Dataset(features, np.asarray(target, dtype=float), tuple(labels),
                   target_label)
