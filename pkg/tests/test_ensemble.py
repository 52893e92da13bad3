"""Majority-voting mechanics, member seeding, and error identity."""

from __future__ import annotations

import numpy as np
import pytest

from cadvote.classifiers import (
    AdaBoostHyperparams,
    ForestHyperparams,
    MLPHyperparams,
    TreeHyperparams,
    train_tree,
)
from cadvote.classifiers.base import Model, TrainingMeta
from cadvote.dataset import Feature, FeatureSchema
from cadvote.ensemble import VotingModel, member_seed, train_voting, vote
from cadvote.errors import TrainingError
from cadvote.evaluation import _project
from cadvote.selection import rank_and_select

FAST_SPECS = [
    ("mlp", MLPHyperparams(epochs=40)),
    ("forest", ForestHyperparams(n_trees=10)),
    ("adaboost", AdaBoostHyperparams(n_rounds=10)),
]

_STUB_SCHEMA = FeatureSchema(
    features=(Feature("A", "numeric", valid_range=(0.0, 1.0)),)
)


class _Const(Model):
    """Stub member: fixed probability regardless of input."""

    kind = "const"

    def __init__(self, p: float) -> None:
        super().__init__(
            _STUB_SCHEMA,
            None,
            TrainingMeta(seed=None, hyperparams={}, train_size=0),
        )
        self._p = p

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], self._p)


def _voting(ps: list[float], tie_break: str = "confidence", fixed_label: int = 1):
    meta = TrainingMeta(seed=None, hyperparams={}, train_size=0)
    return VotingModel(
        _STUB_SCHEMA,
        None,
        meta,
        [_Const(p) for p in ps],
        tie_break=tie_break,
        fixed_label=fixed_label,
    )


_ONE = np.array([[0.5]])


class TestVoteMechanics:
    def test_majority_rules(self):
        assert _voting([0.9, 0.8, 0.2]).predict_batch(_ONE)[0][0] == 1
        assert _voting([0.1, 0.2, 0.3]).predict_batch(_ONE)[0][0] == 0
        assert _voting([0.1, 0.9, 0.8]).predict_batch(_ONE)[0][0] == 1

    def test_hard_votes_can_overrule_mean_probability(self):
        e = _voting([0.51, 0.52, 0.05])
        labels, mean_p = e.predict_batch(_ONE)
        assert labels[0] == 1  # two of three members vote positive
        assert mean_p[0] == pytest.approx(0.36)  # diagnostic mean stays low

    def test_confidence_tie_break(self):
        # split vote: the more certain side wins
        assert _voting([0.9, 0.4]).predict_batch(_ONE)[0][0] == 1  # 0.4 vs 0.1
        assert _voting([0.6, 0.1]).predict_batch(_ONE)[0][0] == 0  # 0.1 vs 0.4

    def test_exact_confidence_tie_prefers_positive(self):
        assert _voting([0.75, 0.25]).predict_batch(_ONE)[0][0] == 1

    def test_fixed_tie_break(self):
        assert _voting([0.9, 0.4], "fixed", fixed_label=0).predict_batch(_ONE)[0][0] == 0
        assert _voting([0.6, 0.1], "fixed", fixed_label=1).predict_batch(_ONE)[0][0] == 1

    def test_member_order_does_not_change_votes(self):
        ps = [0.9, 0.4, 0.2, 0.8]
        a = _voting(ps).predict_batch(_ONE)[0][0]
        b = _voting(list(reversed(ps))).predict_batch(_ONE)[0][0]
        assert a == b

    def test_vote_batch_shapes(self):
        e = _voting([0.9, 0.2, 0.7])
        X = np.full((5, 1), 0.5)
        labels, mean_p, member_labels, member_p = e.vote_batch(X)
        assert labels.shape == (5,) and mean_p.shape == (5,)
        assert member_labels.shape == (3, 5) and member_p.shape == (3, 5)
        assert np.array_equal(member_labels, (member_p >= 0.5).astype(np.int64))

    def test_requires_two_members(self):
        with pytest.raises(TrainingError, match=">= 2 members"):
            _voting([0.5])

    def test_unknown_tie_break(self):
        meta = TrainingMeta(seed=None, hyperparams={}, train_size=0)
        with pytest.raises(TrainingError, match="unknown tie_break 'coin'"):
            VotingModel(
                _STUB_SCHEMA, None, meta, [_Const(0.1), _Const(0.9)], tie_break="coin"
            )


class TestTrainVoting:
    def test_default_trio(self, voting_bundle):
        m = voting_bundle.model
        assert m.kind == "voting"
        assert [mm.kind for mm in m.members] == ["mlp", "forest", "adaboost"]
        assert m.meta.hyperparams["members"] == ["mlp", "forest", "adaboost"]

    def test_single_spec_refused(self, fixture_300):
        with pytest.raises(TrainingError, match=">= 2 members"):
            train_voting(fixture_300, [("tree", None)])

    def test_unknown_kind_identified(self, fixture_300):
        with pytest.raises(TrainingError, match="member 1: unknown classifier kind 'svm'"):
            train_voting(fixture_300, [("tree", None), ("svm", None)])

    def test_member_error_carries_identity(self, fixture_300):
        from cadvote.classifiers import KNNHyperparams

        specs = [("knn", KNNHyperparams(k=301)), ("tree", None)]
        with pytest.raises(
            TrainingError, match=r"member 0 \(knn\): knn: k \(301\) exceeds record count"
        ):
            train_voting(fixture_300, specs)

    def test_identical_deterministic_specs_agree(self, fixture_300):
        e = train_voting(
            fixture_300, [("tree", TreeHyperparams()), ("tree", TreeHyperparams())]
        )
        member_p = e.member_probas(fixture_300.X[:50])
        assert np.array_equal(member_p[0], member_p[1])

    def test_members_get_distinct_sub_seeds(self, fixture_300):
        e = train_voting(fixture_300, FAST_SPECS, seed=5)
        seeds = [
            m.meta.hyperparams["seed"]
            for m in e.members
            if "seed" in m.meta.hyperparams
        ]
        assert seeds == [member_seed(5, i) for i in range(len(seeds))]
        assert len(set(seeds)) == len(seeds)

    def test_seed_none_honors_explicit_member_seeds(self, fixture_300):
        specs = [
            ("forest", ForestHyperparams(n_trees=5, seed=77)),
            ("adaboost", AdaBoostHyperparams(n_rounds=5)),
        ]
        e = train_voting(fixture_300, specs, seed=None)
        assert e.members[0].meta.hyperparams["seed"] == 77

    def test_same_seed_reproducible(self, fixture_300):
        a = train_voting(fixture_300, FAST_SPECS, seed=3)
        b = train_voting(fixture_300, FAST_SPECS, seed=3)
        X = fixture_300.X[:50]
        assert np.array_equal(a.predict_batch(X)[1], b.predict_batch(X)[1])

    def test_members_must_share_feature_list(self, fixture_300):
        sub = rank_and_select(fixture_300, k=5)
        narrow = train_tree(_project(fixture_300, sub))
        wide = train_tree(fixture_300)
        meta = TrainingMeta(seed=None, hyperparams={}, train_size=0)
        with pytest.raises(TrainingError, match="share one feature list"):
            VotingModel(fixture_300.schema, None, meta, [wide, narrow])


class TestMemberSeed:
    def test_deterministic_and_distinct(self):
        seeds = [member_seed(0, i) for i in range(5)]
        assert seeds == [member_seed(0, i) for i in range(5)]
        assert len(set(seeds)) == 5
        assert member_seed(1, 0) != member_seed(0, 0)


class TestVoteHelper:
    def test_vote_matches_predict(self, voting_bundle, fixture_300):
        m = voting_bundle.model
        for i in (0, 5, 42):
            rec = fixture_300.X[i]
            label, mean_p, per_member = vote(m, rec)
            batch_labels, batch_p = m.predict_batch(rec.reshape(1, -1))
            assert label == batch_labels[0]
            assert mean_p == pytest.approx(batch_p[0])
            assert len(per_member) == 3
            votes = sum(l for l, _ in per_member)
            assert label == (1 if votes > 1 else 0)
            for l, p in per_member:
                assert l == int(p >= 0.5)

    def test_vote_accepts_mapping(self, voting_bundle, fixture_300):
        schema = fixture_300.schema
        values = fixture_300.X[3]
        mapping = {f.name: float(values[j]) for j, f in enumerate(schema.features)}
        label_v, p_v, _ = vote(voting_bundle.model, mapping)
        label_a, p_a, _ = vote(voting_bundle.model, values)
        assert (label_v, p_v) == (label_a, p_a)
