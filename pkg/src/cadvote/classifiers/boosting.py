"""AdaBoost.M1 over gain-ratio decision stumps (or shallow trees)."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import Model, TrainingMeta, require_training_data, resolve_scaling, training_matrix
from .tree import TreeHyperparams, _predict_into, build_root

_EPS_ERR = 1e-10


@dataclass(frozen=True)
class AdaBoostHyperparams:
    n_rounds: int = 50
    weak_depth: int = 1  # 1 = decision stumps
    seed: int = 0  # kept for the uniform trainer contract; fitting is deterministic

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise TrainingError("adaboost: n_rounds must be >= 1")
        if self.weak_depth < 1:
            raise TrainingError("adaboost: weak_depth must be >= 1")


def _hard_labels(root: dict[str, Any], X: np.ndarray) -> np.ndarray:
    p = np.empty(X.shape[0], dtype=np.float64)
    _predict_into(root, X, np.arange(X.shape[0]), p)
    return (p >= 0.5).astype(np.int64)


class AdaBoostModel(Model):
    kind = "adaboost"

    def __init__(self, schema, scaling, meta, alphas, roots) -> None:
        super().__init__(schema, scaling, meta)
        self.alphas: list[float] = alphas
        self.roots: list[dict[str, Any]] = roots

    def margins(self, X_std: np.ndarray) -> np.ndarray:
        """Sum of alpha_t * h_t with h in {-1, +1}; sign decides the label."""
        m = np.zeros(X_std.shape[0], dtype=np.float64)
        for alpha, root in zip(self.alphas, self.roots):
            h = _hard_labels(root, X_std)
            m += alpha * (2.0 * h - 1.0)
        return m

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        # logistic squashing of the margin; >= 0.5 exactly when margin >= 0
        return 1.0 / (1.0 + np.exp(-2.0 * self.margins(X)))

    def payload(self) -> dict[str, Any]:
        return {"alphas": self.alphas, "roots": self.roots}

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "AdaBoostModel":
        return cls(schema, scaling, meta, payload["alphas"], payload["roots"])


def train_adaboost(
    d: Dataset,
    hp: AdaBoostHyperparams | None = None,
    scaling: ScalingParams | None = None,
) -> AdaBoostModel:
    """Weights start uniform; each round fits a weak tree on weighted data,
    computes weighted error eps_t and alpha_t = ln((1-eps_t)/eps_t)/2, then
    scales misclassified weights up and correct ones down and renormalizes.
    Stops early on eps_t = 0 (perfect member kept) or eps_t >= 0.5 (member
    dropped, unless it is round 1 — then it is kept with a warning flag so
    the model is non-empty)."""
    hp = hp or AdaBoostHyperparams()
    require_training_data(d)
    scaling = resolve_scaling(d, scaling, needed=False)
    X = training_matrix(d, scaling)
    y = d.y
    n = y.shape[0]
    kinds = tuple(f.kind for f in d.schema.features)
    weak_hp = TreeHyperparams(min_leaf=1, max_depth=hp.weak_depth, prune=False)

    w = np.full(n, 1.0 / n, dtype=np.float64)
    alphas: list[float] = []
    roots: list[dict[str, Any]] = []
    flags: tuple[str, ...] = ()
    y_sign = 2.0 * y - 1.0
    for t in range(hp.n_rounds):
        root = build_root(X, y, kinds, weak_hp, sample_weight=w)
        h = _hard_labels(root, X)
        eps = float(np.sum(w[h != y]))
        eps_c = min(max(eps, _EPS_ERR), 1.0 - _EPS_ERR)
        alpha = 0.5 * np.log((1.0 - eps_c) / eps_c)
        if eps >= 0.5:
            if t == 0:
                alphas.append(float(alpha))
                roots.append(root)
                flags = ("weak_learner_at_chance",)
            break
        alphas.append(float(alpha))
        roots.append(root)
        if eps == 0.0:
            break
        w = w * np.exp(-alpha * y_sign * (2.0 * h - 1.0))
        w = w / w.sum()

    meta = TrainingMeta(
        seed=hp.seed, hyperparams=asdict(hp), train_size=n, flags=flags
    )
    return AdaBoostModel(d.schema, scaling, meta, alphas, roots)
