"""Six from-scratch binary classifiers with a uniform train/predict contract."""

from .base import Model, TrainingMeta, predict
from .bayes import NBHyperparams, train_naive_bayes
from .boosting import AdaBoostHyperparams, train_adaboost
from .forest import ForestHyperparams, train_forest
from .mlp import MLPHyperparams, train_mlp
from .neighbors import KNNHyperparams, train_knn
from .tree import TreeHyperparams, train_tree

__all__ = [
    "Model",
    "TrainingMeta",
    "predict",
    "TreeHyperparams",
    "train_tree",
    "ForestHyperparams",
    "train_forest",
    "AdaBoostHyperparams",
    "train_adaboost",
    "MLPHyperparams",
    "train_mlp",
    "NBHyperparams",
    "train_naive_bayes",
    "KNNHyperparams",
    "train_knn",
]
