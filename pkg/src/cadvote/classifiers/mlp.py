"""Multilayer perceptron: sigmoid throughout, squared-error loss, full-batch
gradient descent with momentum.  Weight update per epoch:

    v <- momentum * v - learning_rate * grad;   w <- w + v

Initialization is seeded uniform in [-0.5, 0.5].  ``init_params``,
``forward`` and ``loss_and_grads`` are module-level so the analytic gradient
can be checked against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import Model, TrainingMeta, require_training_data, resolve_scaling, training_matrix

Params = list[tuple[np.ndarray, np.ndarray]]  # [(W: out x in, b: out), ...]


@dataclass(frozen=True)
class MLPHyperparams:
    hidden_layers: tuple[int, ...] | None = None  # None -> (ceil((p + 2) / 2),)
    learning_rate: float = 0.3
    momentum: float = 0.2
    epochs: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hidden_layers is not None and any(h < 1 for h in self.hidden_layers):
            raise TrainingError("mlp: hidden layer sizes must be >= 1")
        if not self.learning_rate > 0:
            raise TrainingError("mlp: learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise TrainingError("mlp: momentum must be in [0, 1)")
        if self.epochs < 1:
            raise TrainingError("mlp: epochs must be >= 1")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(sizes: list[int], seed: int) -> Params:
    """Uniform [-0.5, 0.5] weights and biases, layer by layer (W then b)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    params: Params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        W = rng.uniform(-0.5, 0.5, size=(fan_out, fan_in))
        b = rng.uniform(-0.5, 0.5, size=fan_out)
        params.append((W, b))
    return params


def forward(params: Params, X: np.ndarray) -> np.ndarray:
    """Network output in (0, 1), one value per row of X."""
    A = X
    for W, b in params:
        A = _sigmoid(A @ W.T + b)
    return A[:, 0]


def loss_and_grads(
    params: Params, X: np.ndarray, y: np.ndarray
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Squared-error loss L = sum((o - y)^2) / (2n) and its gradients."""
    n = X.shape[0]
    acts = [X]
    A = X
    for W, b in params:
        A = _sigmoid(A @ W.T + b)
        acts.append(A)
    out = acts[-1][:, 0]
    loss = float(np.sum((out - y) ** 2) / (2.0 * n))

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params)  # type: ignore[list-item]
    # dL/da at the output, then backprop through sigmoid: delta = dL/da * a(1-a)
    dA = (acts[-1] - y[:, None]) / n
    for layer in range(len(params) - 1, -1, -1):
        a = acts[layer + 1]
        delta = dA * a * (1.0 - a)
        grads[layer] = (delta.T @ acts[layer], delta.sum(axis=0))
        if layer > 0:
            dA = delta @ params[layer][0]
    return loss, grads


class MLPModel(Model):
    kind = "mlp"

    def __init__(self, schema, scaling, meta, params: Params) -> None:
        super().__init__(schema, scaling, meta)
        self.params = params

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        return forward(self.params, X)

    def payload(self) -> dict[str, Any]:
        return {
            "layers": [
                {"W": W.tolist(), "b": b.tolist()} for W, b in self.params
            ]
        }

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "MLPModel":
        params = [
            (np.asarray(l["W"], dtype=np.float64), np.asarray(l["b"], dtype=np.float64))
            for l in payload["layers"]
        ]
        return cls(schema, scaling, meta, params)


def train_mlp(
    d: Dataset,
    hp: MLPHyperparams | None = None,
    scaling: ScalingParams | None = None,
) -> MLPModel:
    """Numeric inputs are standardized (params fitted here unless supplied).
    A loss increase beyond 1e-6 between epochs flags the run divergent in
    ``meta.flags``; a non-finite loss aborts, naming the epoch."""
    hp = hp or MLPHyperparams()
    require_training_data(d)
    scaling = resolve_scaling(d, scaling, needed=True)
    X = training_matrix(d, scaling)
    y = d.y.astype(np.float64)
    p = X.shape[1]
    hidden = (
        hp.hidden_layers
        if hp.hidden_layers is not None
        else (math.ceil((p + 2) / 2),)
    )
    sizes = [p, *hidden, 1]
    params = init_params(sizes, hp.seed)

    velocity = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    prev_loss = math.inf
    diverged = False
    for epoch in range(1, hp.epochs + 1):
        loss, grads = loss_and_grads(params, X, y)
        if not math.isfinite(loss):
            raise TrainingError(f"mlp diverged at epoch {epoch}: non-finite loss")
        if loss > prev_loss + 1e-6:
            diverged = True
        prev_loss = loss
        new_params: Params = []
        new_velocity = []
        for (W, b), (vW, vb), (gW, gb) in zip(params, velocity, grads):
            vW = hp.momentum * vW - hp.learning_rate * gW
            vb = hp.momentum * vb - hp.learning_rate * gb
            new_params.append((W + vW, b + vb))
            new_velocity.append((vW, vb))
        params, velocity = new_params, new_velocity
    final_loss, _ = loss_and_grads(params, X, y)
    if not math.isfinite(final_loss):
        raise TrainingError(f"mlp diverged at epoch {hp.epochs}: non-finite loss")
    if final_loss > prev_loss + 1e-6:
        diverged = True

    meta = TrainingMeta(
        seed=hp.seed,
        hyperparams={
            "hidden_layers": list(hidden),
            "learning_rate": hp.learning_rate,
            "momentum": hp.momentum,
            "epochs": hp.epochs,
            "seed": hp.seed,
        },
        train_size=len(d),
        flags=("diverged",) if diverged else (),
    )
    return MLPModel(d.schema, scaling, meta, params)
