"""Per-family classifier contracts plus the uniform Model API."""

from __future__ import annotations

import numpy as np
import pytest

from cadvote.classifiers import (
    AdaBoostHyperparams,
    ForestHyperparams,
    KNNHyperparams,
    MLPHyperparams,
    NBHyperparams,
    TreeHyperparams,
    predict,
    train_adaboost,
    train_forest,
    train_knn,
    train_mlp,
    train_naive_bayes,
    train_tree,
)
from cadvote.classifiers.mlp import forward, init_params, loss_and_grads
from cadvote.dataset import Dataset, Feature, FeatureSchema, PatientRecord
from cadvote.errors import DataError, TrainingError


def _toy(cols: dict[str, tuple[str, list[float]]], labels: list[int]) -> Dataset:
    feats = tuple(
        Feature(name, kind, valid_range=(min(vals), max(vals)))
        for name, (kind, vals) in cols.items()
    )
    X = np.array([vals for _, vals in cols.values()], dtype=float).T
    recs = [PatientRecord(values=X[i], label=labels[i]) for i in range(len(labels))]
    return Dataset(FeatureSchema(features=feats), recs)


def _xor(copies: int = 2) -> Dataset:
    return _toy(
        {
            "A": ("binary", [0, 0, 1, 1] * copies),
            "B": ("binary", [0, 1, 0, 1] * copies),
        },
        [0, 1, 1, 0] * copies,
    )


class TestTree:
    def test_pure_leaf_laplace_probability(self):
        d = _toy({"A": ("numeric", [1.0, 2.0, 3.0, 4.0])}, [1, 1, 1, 1])
        t = train_tree(d)
        _, p = t.predict_batch(np.array([[2.5]]))
        assert p[0] == pytest.approx(5 / 6, abs=1e-12)  # (4+1)/(4+2)

    def test_single_record_dataset(self):
        d = _toy({"A": ("numeric", [1.0])}, [1])
        t = train_tree(d, TreeHyperparams(min_leaf=1))
        assert t.depth() == 0
        _, p = t.predict_batch(np.array([[9.0]]))
        assert p[0] == pytest.approx(2 / 3, abs=1e-12)  # (1+1)/(1+2)

    def test_xor_learned_exactly(self):
        d = _xor()
        t = train_tree(d)
        labels, _ = t.predict_batch(d.X)
        assert np.array_equal(labels, d.y)
        assert t.depth() == 2

    def test_memorizes_training_data_unpruned(self, fixture_300):
        t = train_tree(fixture_300, TreeHyperparams(min_leaf=1, prune=False))
        labels, _ = t.predict_batch(fixture_300.X)
        assert np.array_equal(labels, fixture_300.y)

    def test_max_depth_respected(self, fixture_300):
        for depth in (0, 1, 3):
            t = train_tree(fixture_300, TreeHyperparams(max_depth=depth, prune=False))
            assert t.depth() <= depth

    def test_pruning_collapses_uninformative_split(self):
        # alternating labels: the split separates nothing, so the subtree's
        # pessimistic estimate (2.861) loses to the leaf's (2.639)
        d = _toy({"A": ("numeric", [1.0, 2.0, 3.0, 4.0])}, [1, 0, 1, 0])
        assert train_tree(d, TreeHyperparams(min_leaf=2, prune=False)).depth() == 1
        assert train_tree(d, TreeHyperparams(min_leaf=2, prune=True)).depth() == 0

    def test_unseen_category_falls_back_to_node_estimate(self):
        d = _toy({"A": ("ordinal", [0.0, 0.0, 1.0, 1.0])}, [0, 0, 1, 1])
        t = train_tree(d, TreeHyperparams(min_leaf=1, prune=False))
        _, p = t.predict_batch(np.array([[2.0]]))
        assert p[0] == pytest.approx(0.5)  # root-level (2+1)/(4+2)

    def test_threshold_at_midpoint(self):
        d = _toy({"A": ("numeric", [1.0, 2.0, 5.0, 6.0])}, [0, 0, 1, 1])
        t = train_tree(d, TreeHyperparams(prune=False))
        assert t.root["t"] == "num"
        assert t.root["thr"] == 3.5

    def test_hyperparam_validation(self):
        with pytest.raises(TrainingError, match="min_leaf"):
            TreeHyperparams(min_leaf=0)
        with pytest.raises(TrainingError, match="max_depth"):
            TreeHyperparams(max_depth=-1)

    def test_negative_sample_weight_refused(self):
        d = _toy({"A": ("numeric", [1.0, 2.0])}, [0, 1])
        with pytest.raises(TrainingError, match="sample_weight"):
            train_tree(d, sample_weight=np.array([1.0, -1.0]))

    def test_empty_and_unlabeled_refused(self, fixture_300):
        with pytest.raises(TrainingError, match="empty"):
            train_tree(Dataset(fixture_300.schema, []))
        u = Dataset(fixture_300.schema, fixture_300.records)
        u.y = None
        with pytest.raises(TrainingError, match="unlabeled"):
            train_tree(u)


class TestForest:
    def test_degenerate_forest_equals_tree(self, fixture_300):
        f = train_forest(
            fixture_300,
            ForestHyperparams(
                n_trees=1, bootstrap=False, features_per_split=13, min_leaf=1
            ),
        )
        t = train_tree(fixture_300, TreeHyperparams(min_leaf=1, prune=False))
        assert np.array_equal(
            f.proba_batch(fixture_300.X), t.proba_batch(fixture_300.X)
        )

    def test_same_seed_bit_identical(self, fixture_300):
        hp = ForestHyperparams(n_trees=10, seed=3)
        a = train_forest(fixture_300, hp)
        b = train_forest(fixture_300, hp)
        assert np.array_equal(a.proba_batch(fixture_300.X), b.proba_batch(fixture_300.X))
        c = train_forest(fixture_300, ForestHyperparams(n_trees=10, seed=4))
        assert not np.array_equal(
            a.proba_batch(fixture_300.X), c.proba_batch(fixture_300.X)
        )

    def test_probability_is_mean_of_trees(self, fixture_300):
        f = train_forest(fixture_300, ForestHyperparams(n_trees=10, seed=0))
        assert len(f.roots) == 10
        p = f.proba_batch(fixture_300.X[:20])
        assert np.all((p >= 0.0) & (p <= 1.0))

    def test_features_per_split_bound(self, fixture_300):
        with pytest.raises(
            TrainingError, match=r"features_per_split \(20\) exceeds feature count \(13\)"
        ):
            train_forest(fixture_300, ForestHyperparams(features_per_split=20))

    def test_hyperparam_validation(self):
        with pytest.raises(TrainingError, match="n_trees"):
            ForestHyperparams(n_trees=0)


class TestAdaBoost:
    def test_separable_single_perfect_stump(self):
        d = _toy(
            {"A": ("numeric", [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])}, [0, 0, 0, 1, 1, 1]
        )
        m = train_adaboost(d, AdaBoostHyperparams(n_rounds=50))
        assert len(m.roots) == 1  # eps = 0 on round one stops boosting
        labels, _ = m.predict_batch(d.X)
        assert np.array_equal(labels, d.y)
        assert m.meta.flags == ()

    def test_stump_at_chance_kept_with_flag(self):
        m = train_adaboost(_xor(), AdaBoostHyperparams(n_rounds=10, weak_depth=1))
        assert m.meta.flags == ("weak_learner_at_chance",)
        assert len(m.roots) == 1

    def test_depth_two_weak_learner_solves_xor(self):
        d = _xor()
        m = train_adaboost(d, AdaBoostHyperparams(n_rounds=10, weak_depth=2))
        labels, _ = m.predict_batch(d.X)
        assert np.array_equal(labels, d.y)

    def test_boosting_beats_single_stump(self, fixture_300):
        stump = train_tree(
            fixture_300, TreeHyperparams(min_leaf=1, max_depth=1, prune=False)
        )
        boosted = train_adaboost(fixture_300, AdaBoostHyperparams(n_rounds=30))
        s_acc = (stump.predict_batch(fixture_300.X)[0] == fixture_300.y).mean()
        b_acc = (boosted.predict_batch(fixture_300.X)[0] == fixture_300.y).mean()
        assert b_acc > s_acc

    def test_label_matches_margin_sign(self, fixture_300):
        m = train_adaboost(fixture_300, AdaBoostHyperparams(n_rounds=15))
        margins = m.margins(fixture_300.X)
        labels, p = m.predict_batch(fixture_300.X)
        assert np.array_equal(labels, (margins >= 0).astype(np.int64))
        assert np.array_equal(labels, (p >= 0.5).astype(np.int64))

    def test_hyperparam_validation(self):
        with pytest.raises(TrainingError, match="n_rounds"):
            AdaBoostHyperparams(n_rounds=0)
        with pytest.raises(TrainingError, match="weak_depth"):
            AdaBoostHyperparams(weak_depth=0)


class TestMLP:
    def test_no_hidden_layer_learns_linear_boundary(self):
        d = _toy({"A": ("numeric", [-2.0, -1.0, 1.0, 2.0])}, [0, 0, 1, 1])
        m = train_mlp(d, MLPHyperparams(hidden_layers=(), learning_rate=0.5, epochs=500))
        labels, _ = m.predict_batch(d.X)
        assert np.array_equal(labels, d.y)
        assert m.meta.flags == ()

    def test_default_hidden_size_is_half_of_p_plus_2(self, fixture_300):
        m = train_mlp(fixture_300, MLPHyperparams(epochs=1))
        assert m.meta.hyperparams["hidden_layers"] == [8]  # ceil((13 + 2) / 2)
        assert m.params[0][0].shape == (8, 13)
        assert m.params[1][0].shape == (1, 8)

    def test_gradients_match_central_differences(self):
        rng = np.random.default_rng(2024)
        h = 1e-5
        for trial in range(5):
            sizes = [int(rng.integers(2, 5)), int(rng.integers(2, 5)), 1]
            params = init_params(sizes, seed=trial)
            X = rng.normal(size=(6, sizes[0]))
            y = rng.integers(0, 2, size=6).astype(np.float64)
            _, grads = loss_and_grads(params, X, y)
            for li, (W, b) in enumerate(params):
                for arr, g in ((W, grads[li][0]), (b, grads[li][1])):
                    it = np.nditer(arr, flags=["multi_index"])
                    for _ in it:
                        ix = it.multi_index
                        old = arr[ix]
                        arr[ix] = old + h
                        lp, _ = loss_and_grads(params, X, y)
                        arr[ix] = old - h
                        lm, _ = loss_and_grads(params, X, y)
                        arr[ix] = old
                        numeric = (lp - lm) / (2 * h)
                        assert abs(numeric - g[ix]) < 1e-4 * max(1.0, abs(numeric))

    def test_runaway_learning_rate_flagged(self):
        d = _toy({"A": ("numeric", [-2.0, -1.0, 1.0, 2.0])}, [0, 0, 1, 1])
        m = train_mlp(d, MLPHyperparams(learning_rate=200.0, epochs=50))
        assert "diverged" in m.meta.flags

    def test_same_seed_reproducible(self, fixture_300):
        a = train_mlp(fixture_300, MLPHyperparams(epochs=20, seed=9))
        b = train_mlp(fixture_300, MLPHyperparams(epochs=20, seed=9))
        for (Wa, ba), (Wb, bb) in zip(a.params, b.params):
            assert np.array_equal(Wa, Wb) and np.array_equal(ba, bb)
        c = train_mlp(fixture_300, MLPHyperparams(epochs=20, seed=10))
        assert not np.array_equal(a.params[0][0], c.params[0][0])

    def test_forward_output_in_unit_interval(self):
        params = init_params([4, 3, 1], seed=0)
        X = np.random.default_rng(0).normal(size=(50, 4)) * 10
        out = forward(params, X)
        assert np.all((out > 0) & (out < 1))

    def test_hyperparam_validation(self):
        with pytest.raises(TrainingError, match="learning_rate"):
            MLPHyperparams(learning_rate=0.0)
        with pytest.raises(TrainingError, match="momentum"):
            MLPHyperparams(momentum=1.0)
        with pytest.raises(TrainingError, match="epochs"):
            MLPHyperparams(epochs=0)
        with pytest.raises(TrainingError, match="hidden layer"):
            MLPHyperparams(hidden_layers=(0,))


class TestNaiveBayes:
    def test_symmetric_gaussians_give_half(self):
        d = _toy(
            {"A": ("numeric", [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0])},
            [0, 0, 0, 0, 1, 1, 1, 1],
        )
        m = train_naive_bayes(d)
        _, p = m.predict_batch(np.array([[0.0]]))
        assert abs(p[0] - 0.5) < 1e-9

    def test_hand_computed_laplace_posterior(self):
        # P(v=1|c) = (2+1)/(2+2) for c=1 and (0+1)/(2+2) for c=0, priors equal
        # -> posterior 3/4
        d = _toy({"A": ("binary", [0, 0, 1, 1])}, [0, 0, 1, 1])
        m = train_naive_bayes(d)
        _, p = m.predict_batch(np.array([[1.0]]))
        assert p[0] == pytest.approx(0.75, abs=1e-12)

    def test_unseen_category_keeps_nonzero_likelihood(self):
        d = _toy({"A": ("ordinal", [0.0, 0.0, 1.0, 1.0])}, [0, 0, 1, 1])
        m = train_naive_bayes(d)
        _, p = m.predict_batch(np.array([[7.0]]))  # outside the training values
        assert 0.0 < p[0] < 1.0

    def test_constant_numeric_column_floored_not_crashed(self):
        d = _toy(
            {"A": ("numeric", [5.0, 5.0, 5.0, 5.0]), "B": ("binary", [0, 0, 1, 1])},
            [0, 0, 1, 1],
        )
        m = train_naive_bayes(d)
        _, p = m.predict_batch(np.array([[5.0, 1.0]]))
        assert np.isfinite(p[0]) and p[0] > 0.5

    def test_needs_both_classes(self):
        d = _toy({"A": ("numeric", [1.0, 2.0])}, [1, 1])
        with pytest.raises(TrainingError, match="both classes"):
            train_naive_bayes(d)

    def test_var_floor_validation(self):
        with pytest.raises(TrainingError, match="var_floor"):
            NBHyperparams(var_floor=0.0)


class TestKNN:
    def test_k1_recovers_own_label(self, fixture_300):
        m = train_knn(fixture_300, KNNHyperparams(k=1))
        labels, p = m.predict_batch(fixture_300.X)
        # duplicated feature rows with conflicting labels would break this;
        # the fixture has none
        assert np.array_equal(labels, fixture_300.y)
        assert set(np.unique(p)) <= {0.0, 1.0}

    def test_k_equals_n_votes_global_majority(self):
        d = _toy({"A": ("numeric", [1.0, 2.0, 3.0, 4.0, 5.0])}, [1, 1, 1, 0, 0])
        m = train_knn(d, KNNHyperparams(k=5))
        labels, p = m.predict_batch(np.array([[0.0], [6.0]]))
        assert np.all(labels == 1)
        assert np.allclose(p, 0.6)

    def test_distance_tie_prefers_lower_index(self):
        d = _toy({"A": ("numeric", [0.0, 2.0])}, [0, 1])
        m = train_knn(d, KNNHyperparams(k=1))
        labels, _ = m.predict_batch(np.array([[1.0]]))  # exactly midway
        assert labels[0] == 0

    def test_k_must_be_odd(self):
        with pytest.raises(TrainingError, match="positive odd integer"):
            KNNHyperparams(k=4)

    def test_k_exceeding_n_refused(self):
        d = _toy({"A": ("numeric", [1.0, 2.0, 3.0])}, [0, 1, 0])
        with pytest.raises(TrainingError, match=r"k \(5\) exceeds record count \(3\)"):
            train_knn(d, KNNHyperparams(k=5))


@pytest.fixture(scope="module")
def model_zoo(fixture_300):
    return {
        "tree": train_tree(fixture_300),
        "forest": train_forest(fixture_300, ForestHyperparams(n_trees=15, seed=0)),
        "adaboost": train_adaboost(fixture_300, AdaBoostHyperparams(n_rounds=15)),
        "mlp": train_mlp(fixture_300, MLPHyperparams(epochs=100)),
        "naive_bayes": train_naive_bayes(fixture_300),
        "knn": train_knn(fixture_300),
    }


def _random_record(schema, rng):
    fields = {}
    for f in schema.features:
        lo, hi = f.valid_range
        if f.kind == "numeric":
            fields[f.name] = float(np.round(rng.uniform(lo, hi), 3))
        else:
            fields[f.name] = int(rng.integers(int(lo), int(hi) + 1))
    return fields


class TestModelAPI:
    def test_missing_feature_named(self, model_zoo, fixture_300):
        rec = _random_record(fixture_300.schema, np.random.default_rng(0))
        del rec["FBS"]
        with pytest.raises(DataError, match=r"missing feature\(s\): FBS"):
            predict(model_zoo["tree"], rec)

    def test_unknown_field_named(self, model_zoo, fixture_300):
        rec = _random_record(fixture_300.schema, np.random.default_rng(0))
        rec["Cholesterol"] = 200
        with pytest.raises(DataError, match=r"unknown field\(s\): Cholesterol"):
            predict(model_zoo["tree"], rec)

    def test_bool_rejected_as_number(self, model_zoo, fixture_300):
        rec = _random_record(fixture_300.schema, np.random.default_rng(0))
        rec["DM"] = True
        with pytest.raises(DataError, match="'DM' must be a number"):
            predict(model_zoo["tree"], rec)

    def test_non_finite_rejected(self, model_zoo, fixture_300):
        rec = _random_record(fixture_300.schema, np.random.default_rng(0))
        rec["Age"] = float("nan")
        with pytest.raises(DataError, match="'Age' must be finite"):
            predict(model_zoo["tree"], rec)

    def test_out_of_range_named_with_band_and_override(self, model_zoo, fixture_300):
        rec = _random_record(fixture_300.schema, np.random.default_rng(0))
        rec["BP"] = 500
        with pytest.raises(DataError, match=r"out-of-range value\(s\): BP \(valid 90..190\)"):
            predict(model_zoo["tree"], rec)
        label, p = predict(model_zoo["tree"], rec, allow_out_of_range=True)
        assert label in (0, 1) and 0.0 <= p <= 1.0

    def test_out_of_range_patient_record_gated(self, model_zoo, fixture_300):
        values = fixture_300.X[0].copy()
        rec = PatientRecord(values=values, label=None, out_of_range=("BP",))
        with pytest.raises(DataError, match="out-of-range"):
            predict(model_zoo["tree"], rec)
        predict(model_zoo["tree"], rec, allow_out_of_range=True)

    def test_wrong_vector_length(self, model_zoo):
        with pytest.raises(DataError, match="expected 13 values"):
            predict(model_zoo["tree"], np.zeros(5))

    def test_input_forms_agree(self, model_zoo, fixture_300):
        schema = fixture_300.schema
        values = fixture_300.X[7]
        as_mapping = {f.name: float(values[j]) for j, f in enumerate(schema.features)}
        as_record = PatientRecord(values=values, label=None)
        for m in model_zoo.values():
            r1 = predict(m, values)
            r2 = predict(m, as_mapping)
            r3 = predict(m, as_record)
            assert r1 == r2 == r3

    def test_fuzzed_records_probability_and_label_contract(self, model_zoo, fixture_300):
        rng = np.random.default_rng(99)
        records = [_random_record(fixture_300.schema, rng) for _ in range(200)]
        for kind, m in model_zoo.items():
            for rec in records:
                label, p = predict(m, rec)
                assert 0.0 <= p <= 1.0, kind
                assert label == int(p >= 0.5), kind

    def test_batch_matrix_shape_checked(self, model_zoo):
        with pytest.raises(DataError, match=r"expected \(n, 13\) matrix"):
            model_zoo["tree"].proba_batch(np.zeros((4, 5)))
