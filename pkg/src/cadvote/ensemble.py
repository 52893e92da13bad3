"""Majority-voting ensemble over independently trained member classifiers.

Hard votes decide the label; the mean member probability is reported as a
diagnostic only.  With an even member count and a split vote, the
``confidence`` tie-break picks the side whose supporters are more certain
(higher mean |p - 0.5|); ``fixed`` picks a configured label.  The default
composition is {mlp, forest, adaboost}, three members, so no tie path runs.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from .dataset import Dataset, PatientRecord
from .errors import TrainingError
from .preprocess import ScalingParams
from .classifiers.base import Model, TrainingMeta, predict as predict_one

DEFAULT_MEMBER_KINDS = ("mlp", "forest", "adaboost")


def _member_trainers() -> dict[str, Any]:
    from .classifiers import (
        train_adaboost,
        train_forest,
        train_knn,
        train_mlp,
        train_naive_bayes,
        train_tree,
    )

    return {
        "tree": train_tree,
        "forest": train_forest,
        "adaboost": train_adaboost,
        "mlp": train_mlp,
        "naive_bayes": train_naive_bayes,
        "knn": train_knn,
    }


class VotingModel(Model):
    kind = "voting"

    def __init__(
        self,
        schema,
        scaling,
        meta,
        members: list[Model],
        tie_break: str = "confidence",
        fixed_label: int = 1,
    ) -> None:
        super().__init__(schema, scaling, meta)
        if len(members) < 2:
            raise TrainingError("ensemble requires >= 2 members")
        if tie_break not in ("confidence", "fixed"):
            raise TrainingError(f"unknown tie_break {tie_break!r}")
        for m in members:
            if m.feature_list != self.feature_list:
                raise TrainingError("all members must share one feature list")
        self.members = members
        self.tie_break = tie_break
        self.fixed_label = int(fixed_label)

    # -- voting ----------------------------------------------------------

    def member_probas(self, X_raw: np.ndarray) -> np.ndarray:
        """(n_members, n_records) member probabilities on raw-unit input."""
        return np.vstack([m.proba_batch(X_raw) for m in self.members])

    def vote_batch(
        self, X_raw: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(labels, mean_p, member_labels, member_p) for a raw-unit matrix."""
        member_p = self.member_probas(np.asarray(X_raw, dtype=np.float64))
        member_labels = (member_p >= 0.5).astype(np.int64)
        pos = member_labels.sum(axis=0)
        neg = member_labels.shape[0] - pos
        labels = np.where(pos > neg, 1, 0).astype(np.int64)
        tied = pos == neg
        if np.any(tied):
            if self.tie_break == "fixed":
                labels[tied] = self.fixed_label
            else:
                conf = np.abs(member_p - 0.5)
                for i in np.flatnonzero(tied):
                    pos_conf = float(conf[member_labels[:, i] == 1, i].mean())
                    neg_conf = float(conf[member_labels[:, i] == 0, i].mean())
                    # lexicographic (confidence, label): deterministic and
                    # independent of member order even on exact confidence ties
                    labels[i] = max((pos_conf, 1), (neg_conf, 0))[1]
        return labels, member_p.mean(axis=0), member_labels, member_p

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        return self.member_probas(X).mean(axis=0)

    def proba_batch(self, X_raw: np.ndarray) -> np.ndarray:
        # members scale internally; the ensemble itself holds no scaling
        X_raw = np.asarray(X_raw, dtype=np.float64)
        return np.clip(self._proba_std(X_raw), 0.0, 1.0)

    def predict_batch(self, X_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # label from hard votes (may disagree with mean p, by design);
        # mean p stays an untouched diagnostic
        labels, mean_p, _, _ = self.vote_batch(np.asarray(X_raw, dtype=np.float64))
        return labels, np.clip(mean_p, 0.0, 1.0)

    # -- serialization ---------------------------------------------------

    def payload(self) -> dict[str, Any]:
        from .registry import meta_to_dict, scaling_to_dict

        return {
            "tie_break": self.tie_break,
            "fixed_label": self.fixed_label,
            "members": [
                {
                    "kind": m.kind,
                    "scaling": scaling_to_dict(m.scaling),
                    "meta": meta_to_dict(m.meta),
                    "payload": m.payload(),
                }
                for m in self.members
            ],
        }

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "VotingModel":
        from .registry import MODEL_CLASSES, meta_from_dict, scaling_from_dict

        members = []
        for md in payload["members"]:
            mcls = MODEL_CLASSES[md["kind"]]
            members.append(
                mcls.from_payload(
                    md["payload"],
                    schema,
                    scaling_from_dict(md["scaling"]),
                    meta_from_dict(md["meta"]),
                )
            )
        return cls(
            schema,
            scaling,
            meta,
            members,
            tie_break=payload["tie_break"],
            fixed_label=payload["fixed_label"],
        )


def member_seed(seed: int, index: int) -> int:
    """Distinct per-member sub-seed from the ensemble seed stream."""
    state = np.random.SeedSequence(seed).generate_state(index + 1, dtype=np.uint64)
    return int(state[index])


def train_voting(
    d: Dataset,
    member_specs: Sequence[tuple[str, Any]],
    tie_break: str = "confidence",
    fixed_label: int = 1,
    seed: int | None = 0,
    scaling: ScalingParams | None = None,
) -> VotingModel:
    """Train each member independently on ``d``.

    ``member_specs`` is an ordered list of (kind, hyperparams-or-None).  When
    ``seed`` is given, members whose hyperparams carry a ``seed`` field get
    distinct sub-seeds derived from it; pass seed=None to honor the seeds
    already inside the hyperparams.  Member training errors propagate with
    the member's identity attached.
    """
    if len(member_specs) < 2:
        raise TrainingError("ensemble requires >= 2 members")
    trainers = _member_trainers()
    members: list[Model] = []
    for i, (kind, hp) in enumerate(member_specs):
        if kind not in trainers:
            raise TrainingError(f"member {i}: unknown classifier kind {kind!r}")
        if seed is not None and hp is not None and hasattr(hp, "seed"):
            hp = type(hp)(**{**hp.__dict__, "seed": member_seed(seed, i)})
        elif seed is not None and hp is None:
            hp_type = _default_hp_type(kind)
            if hp_type is not None and "seed" in hp_type.__dataclass_fields__:
                hp = hp_type(seed=member_seed(seed, i))
        try:
            members.append(trainers[kind](d, hp, scaling=scaling))
        except Exception as e:
            raise TrainingError(f"member {i} ({kind}): {e}") from e
    meta = TrainingMeta(
        seed=seed,
        hyperparams={
            "members": [kind for kind, _ in member_specs],
            "tie_break": tie_break,
        },
        train_size=len(d),
    )
    return VotingModel(
        d.schema, None, meta, members, tie_break=tie_break, fixed_label=fixed_label
    )


def _default_hp_type(kind: str):
    from .classifiers import (
        AdaBoostHyperparams,
        ForestHyperparams,
        KNNHyperparams,
        MLPHyperparams,
        NBHyperparams,
        TreeHyperparams,
    )

    return {
        "tree": TreeHyperparams,
        "forest": ForestHyperparams,
        "adaboost": AdaBoostHyperparams,
        "mlp": MLPHyperparams,
        "naive_bayes": NBHyperparams,
        "knn": KNNHyperparams,
    }[kind]


def vote(
    e: VotingModel,
    record: PatientRecord | dict | np.ndarray,
    allow_out_of_range: bool = False,
) -> tuple[int, float, list[tuple[int, float]]]:
    """(label, mean p_positive, per-member (label, p)) for one record."""
    from .classifiers.base import vector_from_mapping

    if isinstance(record, PatientRecord):
        values = record.values
    elif isinstance(record, dict):
        values = vector_from_mapping(e.schema, record, allow_out_of_range)
    else:
        values = np.asarray(record, dtype=np.float64)
    labels, mean_p, member_labels, member_p = e.vote_batch(values.reshape(1, -1))
    per_member = [
        (int(member_labels[m, 0]), float(member_p[m, 0]))
        for m in range(member_labels.shape[0])
    ]
    return int(labels[0]), float(mean_p[0]), per_member
