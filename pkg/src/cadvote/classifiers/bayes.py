"""Naive Bayes: per-class Gaussians on numerics, Laplace tables on categoricals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import Model, TrainingMeta, require_training_data, resolve_scaling, training_matrix


@dataclass(frozen=True)
class NBHyperparams:
    var_floor: float = 1e-9

    def __post_init__(self) -> None:
        if not self.var_floor > 0:
            raise TrainingError("naive bayes: var_floor must be > 0")


def _category_space(kind: str, valid_range: tuple[float, float]) -> list[float]:
    lo, hi = valid_range
    if math.isfinite(lo) and math.isfinite(hi) and hi - lo <= 32:
        return [float(v) for v in range(int(lo), int(hi) + 1)]
    return []  # open-ended: cardinality falls back to observed values


class NaiveBayesModel(Model):
    kind = "naive_bayes"

    def __init__(self, schema, scaling, meta, params: dict[str, Any]) -> None:
        super().__init__(schema, scaling, meta)
        self.params = params  # {"log_priors": [2], "features": [per-feature dict]}

    def _log_likelihood(self, X: np.ndarray, c: int) -> np.ndarray:
        ll = np.full(X.shape[0], self.params["log_priors"][c], dtype=np.float64)
        for j, fp in enumerate(self.params["features"]):
            col = X[:, j]
            if fp["kind"] == "gaussian":
                mu = fp["mean"][c]
                var = fp["var"][c]
                ll += -0.5 * np.log(2.0 * np.pi * var) - (col - mu) ** 2 / (2.0 * var)
            else:
                default = fp["log_default"][c]
                keys = np.asarray(fp["values"], dtype=np.float64)
                if keys.size == 0:
                    ll += default
                    continue
                logp = np.asarray(fp["logp"][c], dtype=np.float64)
                idx = np.clip(np.searchsorted(keys, col), 0, keys.size - 1)
                hit = keys[idx] == col
                ll += np.where(hit, logp[idx], default)
        return ll

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        lp0 = self._log_likelihood(X, 0)
        lp1 = self._log_likelihood(X, 1)
        return np.exp(lp1 - np.logaddexp(lp0, lp1))

    def payload(self) -> dict[str, Any]:
        return {"params": self.params}

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "NaiveBayesModel":
        return cls(schema, scaling, meta, payload["params"])


def train_naive_bayes(
    d: Dataset,
    hp: NBHyperparams | None = None,
    scaling: ScalingParams | None = None,
) -> NaiveBayesModel:
    """Numeric features: per-class mean/variance (variance floored so a
    constant column stays usable).  Binary/ordinal features: Laplace-smoothed
    frequency tables with the schema's category cardinality, so categories
    unseen in training keep a nonzero likelihood."""
    hp = hp or NBHyperparams()
    require_training_data(d)
    counts = d.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise TrainingError("naive bayes needs both classes present")
    scaling = resolve_scaling(d, scaling, needed=False)
    X = training_matrix(d, scaling)
    y = d.y

    n = len(d)
    log_priors = [math.log(counts[c] / n) for c in (0, 1)]
    features = []
    for j, f in enumerate(d.schema.features):
        col = X[:, j]
        if f.kind == "numeric":
            mean, var = [], []
            for c in (0, 1):
                cc = col[y == c]
                mean.append(float(np.mean(cc)))
                var.append(float(max(np.var(cc), hp.var_floor)))
            features.append({"kind": "gaussian", "mean": mean, "var": var})
        else:
            space = _category_space(f.kind, f.valid_range)
            observed = sorted(set(np.unique(col).tolist()) | set(space))
            V = len(observed)
            logp = []
            log_default = []
            for c in (0, 1):
                cc = col[y == c]
                nc = cc.shape[0]
                row = [
                    math.log((float(np.sum(cc == v)) + 1.0) / (nc + V))
                    for v in observed
                ]
                logp.append(row)
                log_default.append(math.log(1.0 / (nc + V)))
            features.append(
                {
                    "kind": "categorical",
                    "values": observed,
                    "logp": logp,
                    "log_default": log_default,
                }
            )
    params = {"log_priors": log_priors, "features": features}
    meta = TrainingMeta(seed=None, hyperparams=asdict(hp), train_size=n)
    return NaiveBayesModel(d.schema, scaling, meta, params)
