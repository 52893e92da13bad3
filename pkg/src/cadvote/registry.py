"""Model-kind registry and (de)serialization helpers shared by bundles,
evaluation, and the CLI."""

from __future__ import annotations

from dataclasses import asdict
from typing import Any

from .classifiers.base import Model, TrainingMeta
from .classifiers.bayes import NaiveBayesModel, NBHyperparams, train_naive_bayes
from .classifiers.boosting import AdaBoostHyperparams, AdaBoostModel, train_adaboost
from .classifiers.forest import ForestHyperparams, ForestModel, train_forest
from .classifiers.mlp import MLPHyperparams, MLPModel, train_mlp
from .classifiers.neighbors import KNNHyperparams, KNNModel, train_knn
from .classifiers.tree import TreeHyperparams, TreeModel, train_tree
from .ensemble import VotingModel
from .errors import BundleError, TrainingError
from .preprocess import ScalingParams

MODEL_CLASSES: dict[str, type[Model]] = {
    "tree": TreeModel,
    "forest": ForestModel,
    "adaboost": AdaBoostModel,
    "mlp": MLPModel,
    "naive_bayes": NaiveBayesModel,
    "knn": KNNModel,
    "voting": VotingModel,
}

MEMBER_TRAINERS = {
    "tree": train_tree,
    "forest": train_forest,
    "adaboost": train_adaboost,
    "mlp": train_mlp,
    "naive_bayes": train_naive_bayes,
    "knn": train_knn,
}

HYPERPARAM_TYPES = {
    "tree": TreeHyperparams,
    "forest": ForestHyperparams,
    "adaboost": AdaBoostHyperparams,
    "mlp": MLPHyperparams,
    "naive_bayes": NBHyperparams,
    "knn": KNNHyperparams,
}


def hyperparams_from_dict(kind: str, values: dict[str, Any] | None):
    """Build the kind's hyperparams dataclass from a plain dict (JSON side),
    coercing list-valued fields back to tuples."""
    if kind not in HYPERPARAM_TYPES:
        raise TrainingError(f"unknown classifier kind {kind!r}")
    hp_type = HYPERPARAM_TYPES[kind]
    if not values:
        return hp_type()
    fields = hp_type.__dataclass_fields__
    unknown = sorted(set(values) - set(fields))
    if unknown:
        raise TrainingError(f"{kind}: unknown hyperparameter(s) {', '.join(unknown)}")
    coerced = {
        k: tuple(v) if isinstance(v, list) else v for k, v in values.items()
    }
    return hp_type(**coerced)


def hyperparams_to_dict(hp: Any) -> dict[str, Any] | None:
    if hp is None:
        return None
    d = asdict(hp)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def scaling_to_dict(s: ScalingParams | None) -> dict[str, Any] | None:
    if s is None:
        return None
    return {"names": list(s.names), "means": list(s.means), "stds": list(s.stds)}


def scaling_from_dict(d: dict[str, Any] | None) -> ScalingParams | None:
    if d is None:
        return None
    return ScalingParams(tuple(d["names"]), tuple(d["means"]), tuple(d["stds"]))


def meta_to_dict(m: TrainingMeta) -> dict[str, Any]:
    return {
        "seed": m.seed,
        "hyperparams": m.hyperparams,
        "train_size": m.train_size,
        "flags": list(m.flags),
    }


def meta_from_dict(d: dict[str, Any]) -> TrainingMeta:
    return TrainingMeta(
        seed=d.get("seed"),
        hyperparams=d.get("hyperparams", {}),
        train_size=d.get("train_size", 0),
        flags=tuple(d.get("flags", ())),
    )


def model_class(kind: str) -> type[Model]:
    if kind not in MODEL_CLASSES:
        raise BundleError(f"unknown model kind {kind!r}")
    return MODEL_CLASSES[kind]
