"""Random forest: bagged gain-ratio trees with per-node feature subsampling."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import Model, TrainingMeta, require_training_data, resolve_scaling, training_matrix
from .tree import TreeHyperparams, _predict_into, build_root


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    features_per_split: int | None = None  # None -> floor(sqrt(p))
    bootstrap: bool = True
    min_leaf: int = 1
    max_depth: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise TrainingError("forest: n_trees must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise TrainingError("forest: features_per_split must be >= 1")


class ForestModel(Model):
    kind = "forest"

    def __init__(self, schema, scaling, meta, roots: list[dict[str, Any]]) -> None:
        super().__init__(schema, scaling, meta)
        self.roots = roots

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0], dtype=np.float64)
        buf = np.empty(X.shape[0], dtype=np.float64)
        idx = np.arange(X.shape[0])
        for root in self.roots:
            _predict_into(root, X, idx, buf)
            total += buf
        return total / len(self.roots)

    def payload(self) -> dict[str, Any]:
        return {"roots": self.roots}

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "ForestModel":
        return cls(schema, scaling, meta, payload["roots"])


def train_forest(
    d: Dataset,
    hp: ForestHyperparams | None = None,
    scaling: ScalingParams | None = None,
) -> ForestModel:
    """Each tree fits a seeded bootstrap sample (same size as the data) with
    ``features_per_split`` candidate features drawn uniformly per node; the
    forest prediction is the mean of tree probabilities.  Trees are indexed
    by seed-stream position, so the model is a pure function of (data, hp)."""
    hp = hp or ForestHyperparams()
    require_training_data(d)
    scaling = resolve_scaling(d, scaling, needed=False)
    X = training_matrix(d, scaling)
    n, p = X.shape
    mf = hp.features_per_split or max(1, int(math.isqrt(p)))
    if mf > p:
        raise TrainingError(
            f"forest: features_per_split ({mf}) exceeds feature count ({p})"
        )
    kinds = tuple(f.kind for f in d.schema.features)
    tree_hp = TreeHyperparams(min_leaf=hp.min_leaf, max_depth=hp.max_depth, prune=False)

    roots = []
    for ss in np.random.SeedSequence(hp.seed).spawn(hp.n_trees):
        rng = np.random.default_rng(ss)
        idx = rng.integers(0, n, size=n) if hp.bootstrap else np.arange(n)
        roots.append(
            build_root(
                X[idx], d.y[idx], kinds, tree_hp, rng=rng, max_features=mf
            )
        )
    meta = TrainingMeta(seed=hp.seed, hyperparams=asdict(hp), train_size=n)
    return ForestModel(d.schema, scaling, meta, roots)
