"""Uniform model contract: raw-unit inputs in, (label, p_positive) out.

Models that need standardized inputs (MLP, KNN) carry ScalingParams fitted
on their training data and apply them internally, so every model consumes
the same raw-unit feature vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..dataset import Dataset, FeatureSchema, PatientRecord
from ..errors import DataError, TrainingError
from ..preprocess import ScalingParams, fit_standardizer


@dataclass(frozen=True)
class TrainingMeta:
    seed: int | None
    hyperparams: dict[str, Any]
    train_size: int
    flags: tuple[str, ...] = ()  # e.g. "weak_learner_at_chance", "diverged"


class Model:
    """Base for all trained models.

    Subclasses implement ``_proba_std(X)`` over (already scaled) matrices;
    the base class handles raw-unit scaling, record validation, and the
    payload round-trip used by bundles.
    """

    kind: str = "base"

    def __init__(
        self,
        schema: FeatureSchema,
        scaling: ScalingParams | None,
        meta: TrainingMeta,
    ) -> None:
        self.schema = schema
        self.scaling = scaling
        self.meta = meta

    @property
    def feature_list(self) -> tuple[str, ...]:
        return self.schema.feature_names

    # -- prediction ------------------------------------------------------

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _scale(self, X: np.ndarray) -> np.ndarray:
        if self.scaling is None or not self.scaling.names:
            return X
        X = np.array(X, dtype=np.float64, copy=True)
        for name, mean, std in zip(
            self.scaling.names, self.scaling.means, self.scaling.stds
        ):
            j = self.schema.index_of(name)
            X[:, j] = (X[:, j] - mean) / std
        return X

    def proba_batch(self, X_raw: np.ndarray) -> np.ndarray:
        """p_positive per row of a raw-unit (n, p) matrix."""
        X_raw = np.asarray(X_raw, dtype=np.float64)
        if X_raw.ndim != 2 or X_raw.shape[1] != len(self.schema.features):
            raise DataError(
                f"expected (n, {len(self.schema.features)}) matrix, got {X_raw.shape}"
            )
        p = np.asarray(self._proba_std(self._scale(X_raw)), dtype=np.float64)
        return np.clip(p, 0.0, 1.0)

    def predict_batch(self, X_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.proba_batch(X_raw)
        return (p >= 0.5).astype(np.int64), p

    # -- serialization ---------------------------------------------------

    def payload(self) -> dict[str, Any]:
        """Kind-specific JSON-safe parameter payload."""
        raise NotImplementedError

    @classmethod
    def from_payload(
        cls,
        payload: dict[str, Any],
        schema: FeatureSchema,
        scaling: ScalingParams | None,
        meta: TrainingMeta,
    ) -> "Model":
        raise NotImplementedError


def vector_from_mapping(
    schema: FeatureSchema,
    fields: Mapping[str, float],
    allow_out_of_range: bool = False,
    allow_extra: bool = False,
) -> np.ndarray:
    """Validate a name->value mapping against ``schema`` and order it.

    Errors name every offending field: missing features, unknown extras
    (unless allowed), non-numeric values, and out-of-range values (unless
    the override flag is set).
    """
    missing = [f.name for f in schema.features if f.name not in fields]
    if missing:
        raise DataError(f"missing feature(s): {', '.join(missing)}")
    if not allow_extra:
        extra = [k for k in fields if k not in schema.feature_names]
        if extra:
            raise DataError(f"unknown field(s): {', '.join(sorted(extra))}")
    values = np.empty(len(schema.features), dtype=np.float64)
    for j, f in enumerate(schema.features):
        v = fields[f.name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DataError(f"feature {f.name!r} must be a number, got {v!r}")
        values[j] = float(v)
        if not np.isfinite(values[j]):
            raise DataError(f"feature {f.name!r} must be finite, got {v!r}")
    if not allow_out_of_range:
        bad = [
            f"{f.name} (valid {f.valid_range[0]:g}..{f.valid_range[1]:g})"
            for j, f in enumerate(schema.features)
            if not f.in_range(values[j])
        ]
        if bad:
            raise DataError(f"out-of-range value(s): {', '.join(bad)}")
    return values


def predict(
    model: Model,
    record: PatientRecord | Mapping[str, float] | np.ndarray,
    allow_out_of_range: bool = False,
) -> tuple[int, float]:
    """(label, p_positive) for one record; label = 1 iff p_positive >= 0.5."""
    if isinstance(record, PatientRecord):
        values = record.values
        if record.out_of_range and not allow_out_of_range:
            raise DataError(
                f"out-of-range value(s): {', '.join(record.out_of_range)}"
            )
    elif isinstance(record, Mapping):
        values = vector_from_mapping(model.schema, record, allow_out_of_range)
    else:
        values = np.asarray(record, dtype=np.float64)
    if values.shape != (len(model.schema.features),):
        raise DataError(
            f"expected {len(model.schema.features)} values, got {values.shape}"
        )
    labels, p = model.predict_batch(values.reshape(1, -1))
    return int(labels[0]), float(p[0])


def resolve_scaling(
    d: Dataset, scaling: ScalingParams | None, needed: bool
) -> ScalingParams | None:
    """Scaling passed in by the pipeline wins; otherwise fit on the training
    data when the model kind needs standardized inputs."""
    if scaling is not None:
        if scaling.names != d.schema.numeric_names:
            raise TrainingError(
                "scaling params do not cover this schema's numeric features"
            )
        return scaling
    if needed and d.schema.numeric_names:
        return fit_standardizer(d)
    return None


def require_training_data(d: Dataset) -> None:
    if len(d) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if d.y is None:
        raise TrainingError("cannot train on unlabeled records")


def training_matrix(d: Dataset, scaling: ScalingParams | None) -> np.ndarray:
    """The dataset's matrix in the units the model will see at predict time."""
    if scaling is None or not scaling.names:
        return d.X
    X = d.X.copy()
    for name, mean, std in zip(scaling.names, scaling.means, scaling.stds):
        j = d.schema.index_of(name)
        X[:, j] = (X[:, j] - mean) / std
    return X
