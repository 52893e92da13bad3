"""Standardization, IQR outlier/extreme flagging, and SMOTE oversampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, PatientRecord
from .errors import DataError


@dataclass(frozen=True)
class ScalingParams:
    """Per-numeric-feature mean/std fitted on training data only."""

    names: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.names) == len(self.means) == len(self.stds)):
            raise DataError("scaling params: mismatched lengths")
        for name, s in zip(self.names, self.stds):
            if not s > 0:
                raise DataError(f"scaling params: std must be > 0 for {name!r}")


def fit_standardizer(train: Dataset) -> ScalingParams:
    """Sample mean/std (n-1 denominator) of every numeric feature."""
    if len(train) < 2:
        raise DataError("standardizer needs at least two records")
    names, means, stds = [], [], []
    for name in train.schema.numeric_names:
        col = train.X[:, train.schema.index_of(name)]
        std = float(np.std(col, ddof=1))
        if std == 0.0:
            raise DataError(f"zero-variance feature {name!r} cannot be standardized")
        names.append(name)
        means.append(float(np.mean(col)))
        stds.append(std)
    return ScalingParams(tuple(names), tuple(means), tuple(stds))


def apply_standardizer(params: ScalingParams, d: Dataset) -> Dataset:
    """Map numeric feature x to (x - mean)/std; binary/ordinal untouched."""
    if params.names != d.schema.numeric_names:
        raise DataError(
            f"schema mismatch: params cover {params.names}, "
            f"dataset has numeric features {d.schema.numeric_names}"
        )
    X = d.X.copy()
    for name, mean, std in zip(params.names, params.means, params.stds):
        j = d.schema.index_of(name)
        X[:, j] = (X[:, j] - mean) / std
    records = [
        PatientRecord(values=X[i], label=r.label, synthetic=r.synthetic)
        for i, r in enumerate(d.records)
    ]
    return Dataset(d.schema, records, provenance=d.provenance).with_provenance(
        "standardized"
    )


@dataclass(frozen=True)
class OutlierRow:
    name: str
    q1: float
    q3: float
    iqr: float
    outlier_indices: tuple[int, ...]  # beyond the outlier band, inside the extreme band
    extreme_indices: tuple[int, ...]  # beyond the extreme band

    @property
    def outlier_count(self) -> int:
        return len(self.outlier_indices)

    @property
    def extreme_count(self) -> int:
        return len(self.extreme_indices)


@dataclass(frozen=True)
class OutlierReport:
    rows: tuple[OutlierRow, ...]
    n_records: int

    def row(self, name: str) -> OutlierRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        lines = ["feature,q1,q3,iqr,outliers,outlier_pct,extremes,extreme_pct"]
        for r in self.rows:
            lines.append(
                f"{r.name},{r.q1:g},{r.q3:g},{r.iqr:g},"
                f"{r.outlier_count},{100.0 * r.outlier_count / self.n_records:.2f},"
                f"{r.extreme_count},{100.0 * r.extreme_count / self.n_records:.2f}"
            )
        return "\n".join(lines) + "\n"


def iqr_flag(
    d: Dataset, outlier_factor: float = 1.5, extreme_factor: float = 3.0
) -> OutlierReport:
    """Flag values outside [Q1 - f*IQR, Q3 + f*IQR] per feature.

    Advisory only: nothing is deleted (standardization, not removal, is the
    downstream remedy).  A value beyond the extreme band counts as extreme;
    otherwise beyond the outlier band counts as outlier.
    """
    if len(d) == 0:
        raise DataError("cannot flag outliers on an empty dataset")
    if not 0 < outlier_factor <= extreme_factor:
        raise DataError("need 0 < outlier_factor <= extreme_factor")
    rows = []
    for j, f in enumerate(d.schema.features):
        col = d.X[:, j]
        q1, q3 = np.quantile(col, [0.25, 0.75])
        iqr = float(q3 - q1)
        out_lo, out_hi = q1 - outlier_factor * iqr, q3 + outlier_factor * iqr
        ext_lo, ext_hi = q1 - extreme_factor * iqr, q3 + extreme_factor * iqr
        is_extreme = (col < ext_lo) | (col > ext_hi)
        is_outlier = ((col < out_lo) | (col > out_hi)) & ~is_extreme
        rows.append(
            OutlierRow(
                name=f.name,
                q1=float(q1),
                q3=float(q3),
                iqr=iqr,
                outlier_indices=tuple(int(i) for i in np.flatnonzero(is_outlier)),
                extreme_indices=tuple(int(i) for i in np.flatnonzero(is_extreme)),
            )
        )
    return OutlierReport(rows=tuple(rows), n_records=len(d))


@dataclass(frozen=True)
class SmoteConfig:
    """k_neighbors defaults to 5, the original SMOTE convention."""

    k_neighbors: int = 5
    target: str = "balance"  # "balance" | "percentage"
    percentage: int = 100  # used when target == "percentage"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise DataError("smote: k_neighbors must be >= 1")
        if self.target not in ("balance", "percentage"):
            raise DataError(f"smote: unknown target {self.target!r}")
        if self.target == "percentage" and self.percentage < 1:
            raise DataError("smote: percentage must be a positive integer")


def _distance_scaling(d: Dataset, numeric_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean/std for the distance metric; zero-variance columns fall back to
    std 1 so degenerate toy datasets still have a defined metric."""
    means = d.X[:, numeric_idx].mean(axis=0)
    stds = d.X[:, numeric_idx].std(axis=0, ddof=1)
    stds = np.where((stds > 0) & np.isfinite(stds), stds, 1.0)
    return means, stds


def smote(d: Dataset, cfg: SmoteConfig) -> Dataset:
    """Append synthetic minority records on parent-neighbor segments.

    Parents cycle round-robin over a seeded shuffle of the minority class.
    Neighbors are the k nearest minority instances by Euclidean distance over
    standardized numeric features.  Numeric coordinates interpolate with one
    u ~ U[0,1] per synthetic point; binary/ordinal values copy the parent or
    the neighbor with probability 1/2 per feature.  Originals are preserved
    untouched; synthetics carry a provenance mark.
    """
    if d.y is None:
        raise DataError("smote needs a fully labeled dataset")
    counts = d.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise DataError("smote needs both classes present")
    minority_label = 0 if counts[0] < counts[1] else 1
    minority = np.flatnonzero(d.y == minority_label)
    m = minority.shape[0]
    if cfg.k_neighbors >= m:
        raise DataError(
            f"smote: k_neighbors ({cfg.k_neighbors}) must be < minority class size ({m})"
        )
    if cfg.target == "balance":
        synth_count = int(max(counts.values()) - m)
    else:
        synth_count = m * cfg.percentage // 100

    numeric_idx = np.array(
        [d.schema.index_of(n) for n in d.schema.numeric_names], dtype=np.int64
    )
    cat_idx = np.array(
        [j for j in range(len(d.schema.features)) if j not in set(numeric_idx.tolist())],
        dtype=np.int64,
    )

    # k nearest minority neighbors per minority point (self excluded by index)
    if numeric_idx.size:
        means, stds = _distance_scaling(d, numeric_idx)
        Z = (d.X[np.ix_(minority, numeric_idx)] - means) / stds
    else:
        Z = np.zeros((m, 0))
    diff = Z[:, None, :] - Z[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    neighbors = np.empty((m, cfg.k_neighbors), dtype=np.int64)
    for i in range(m):
        order = np.argsort(dist[i], kind="stable")
        order = order[order != i]
        neighbors[i] = order[: cfg.k_neighbors]

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    perm = rng.permutation(m)
    new_records = list(d.records)
    for s in range(synth_count):
        pi = perm[s % m]
        parent = d.X[minority[pi]]
        nbr = d.X[minority[neighbors[pi, int(rng.integers(cfg.k_neighbors))]]]
        u = float(rng.uniform())
        values = parent.copy()
        if numeric_idx.size:
            values[numeric_idx] = parent[numeric_idx] + u * (
                nbr[numeric_idx] - parent[numeric_idx]
            )
        for j in cat_idx:
            if rng.uniform() < 0.5:
                values[j] = nbr[j]
        new_records.append(
            PatientRecord(values=values, label=minority_label, synthetic=True)
        )
    note = (
        f"smote(k={cfg.k_neighbors}, target={cfg.target}"
        + (f" {cfg.percentage}%" if cfg.target == "percentage" else "")
        + f", seed={cfg.seed}): +{synth_count} synthetic records"
    )
    return Dataset(d.schema, new_records, provenance=d.provenance).with_provenance(note)
