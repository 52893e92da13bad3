"""K-nearest neighbors over standardized features (lazy model)."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import Model, TrainingMeta, require_training_data, resolve_scaling, training_matrix


@dataclass(frozen=True)
class KNNHyperparams:
    k: int = 5

    def __post_init__(self) -> None:
        if self.k < 1 or self.k % 2 == 0:
            raise TrainingError("knn: k must be a positive odd integer")


class KNNModel(Model):
    kind = "knn"

    def __init__(self, schema, scaling, meta, Xtr: np.ndarray, ytr: np.ndarray, k: int) -> None:
        super().__init__(schema, scaling, meta)
        self.Xtr = np.asarray(Xtr, dtype=np.float64)
        self.ytr = np.asarray(ytr, dtype=np.int64)
        self.k = k

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        # squared Euclidean distances query x train; stable argsort breaks
        # distance ties by lower training-record index
        d2 = (
            np.sum(X**2, axis=1, keepdims=True)
            - 2.0 * X @ self.Xtr.T
            + np.sum(self.Xtr**2, axis=1)
        )
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return self.ytr[order].mean(axis=1)

    def payload(self) -> dict[str, Any]:
        return {"X": self.Xtr.tolist(), "y": self.ytr.tolist(), "k": self.k}

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "KNNModel":
        return cls(schema, scaling, meta, payload["X"], payload["y"], payload["k"])


def train_knn(
    d: Dataset,
    hp: KNNHyperparams | None = None,
    scaling: ScalingParams | None = None,
) -> KNNModel:
    """Stores the standardized training matrix; prediction is the majority
    label among the k nearest neighbors (k odd, so never tied), with
    p_positive the positive vote fraction."""
    hp = hp or KNNHyperparams()
    require_training_data(d)
    if hp.k > len(d):
        raise TrainingError(f"knn: k ({hp.k}) exceeds record count ({len(d)})")
    scaling = resolve_scaling(d, scaling, needed=True)
    X = training_matrix(d, scaling)
    meta = TrainingMeta(seed=None, hyperparams=asdict(hp), train_size=len(d))
    return KNNModel(d.schema, scaling, meta, X, d.y, hp.k)
