"""Partworth recovery on synthetic data with known generating weights."""

import numpy as np
import pytest

from conftest import make_schema
from partworth.errors import ValidationError
from partworth.linear import LinearConjoint, PartworthTable
from partworth.synthetic import random_partworths, synth_linear


def fit_on(dataset, **kwargs):
    model = LinearConjoint(schema=dataset.schema, **kwargs)
    model.fit(dataset.one_hot_pair(), dataset.y)
    return model


class TestRecovery:
    def test_recovers_generating_partworths(self):
        schema = make_schema([3, 3, 3, 3])
        w_star = random_partworths(schema, seed=1)
        data = synth_linear(schema, w_star, n_pairs=10_000, seed=2)
        model = fit_on(data, l2=1e-4)
        fitted = model.partworths_effects_.values
        truth = w_star.effects_code().values
        r = np.corrcoef(fitted, truth)[0, 1]
        assert r > 0.99

    def test_heldout_accuracy_near_bayes(self):
        schema = make_schema([3, 3, 3, 3])
        w_star = random_partworths(schema, seed=3)
        train = synth_linear(schema, w_star, n_pairs=8_000, seed=4)
        test = synth_linear(schema, w_star, n_pairs=8_000, seed=5)
        model = fit_on(train)
        acc = float((model.predict(test.one_hot_pair()) == test.y).mean())
        assert abs(acc - train.meta["bayes_accuracy"]) < 0.02

    def test_coin_flip_labels_shrink_to_zero(self):
        schema = make_schema([3, 3])
        rng = np.random.default_rng(6)
        a = np.column_stack([rng.integers(0, 3, 10_000) for _ in range(2)])
        b = np.column_stack([rng.integers(0, 3, 10_000) for _ in range(2)])
        y = rng.integers(0, 2, 10_000)
        X = np.hstack([schema.one_hot_indices(a), schema.one_hot_indices(b)])
        model = LinearConjoint(schema=schema, l2=1e-2).fit(X, y)
        assert np.max(np.abs(model.partworths_effects_.values)) < 0.1

    def test_single_separable_pair_drives_margin_up(self):
        schema = make_schema([2, 2])
        a = np.tile([0, 0], (60, 1))
        b = np.tile([1, 1], (60, 1))
        X = np.hstack([schema.one_hot_indices(a), schema.one_hot_indices(b)])
        y = np.ones(60, dtype=int)
        model = LinearConjoint(schema=schema, l2=0.0).fit(X, y)
        assert model.predict_proba(X)[:, 1].min() > 0.99


class TestContracts:
    def test_empty_data_rejected(self):
        schema = make_schema([2, 2])
        with pytest.raises(ValidationError):
            LinearConjoint(schema=schema).fit(np.zeros((0, 8)), np.zeros(0))

    def test_identical_targets_warn_but_fit(self):
        schema = make_schema([2])
        data = synth_linear(schema, random_partworths(schema, seed=0), 50, seed=1)
        X = data.one_hot_pair()
        with pytest.warns(UserWarning, match="identical"):
            LinearConjoint(schema=schema).fit(X, np.ones(50, dtype=int))

    def test_width_mismatch_rejected(self):
        schema = make_schema([2, 2])
        with pytest.raises(ValidationError, match="columns"):
            LinearConjoint(schema=schema).fit(np.zeros((5, 7)), np.zeros(5))

    def test_requires_schema(self):
        with pytest.raises(ValidationError):
            LinearConjoint().fit(np.zeros((5, 4)), np.zeros(5))

    def test_fit_is_deterministic(self):
        schema = make_schema([3, 2])
        data = synth_linear(schema, random_partworths(schema, seed=7), 2_000, seed=8)
        X = data.one_hot_pair()
        w1 = LinearConjoint(schema=schema, seed=0).fit(X, data.y).partworths_.values
        w2 = LinearConjoint(schema=schema, seed=0).fit(X, data.y).partworths_.values
        np.testing.assert_array_equal(w1, w2)

    def test_report_fields_present(self):
        schema = make_schema([2, 2])
        data = synth_linear(schema, random_partworths(schema, seed=9), 500, seed=10)
        model = fit_on(data)
        assert set(model.fit_report_) >= {"converged", "n_iter", "final_loss"}


class TestInvariances:
    def test_probabilities_invariant_under_per_attribute_shifts(self, rng):
        schema = make_schema([3, 4])
        data = synth_linear(schema, random_partworths(schema, seed=11), 1_000, seed=12)
        model = fit_on(data)
        X = data.one_hot_pair()
        base = model.predict_proba(X)[:, 1]
        shifted = model.partworths_.values.copy()
        shifted[schema.block(0)] += 3.7
        shifted[schema.block(1)] -= 1.2
        model.partworths_ = PartworthTable(schema, shifted)
        np.testing.assert_allclose(model.predict_proba(X)[:, 1], base, atol=1e-9)

    def test_single_link_on_concatenated_items(self, rng):
        # accept/reject framing: P(y=1) = sigmoid(U(x))
        schema = make_schema([3, 3])
        w = random_partworths(schema, seed=13)
        idx = np.column_stack([rng.integers(0, 3, 4_000) for _ in range(2)])
        X = schema.one_hot_indices(idx)
        from partworth.nn.layers import stable_sigmoid

        p = stable_sigmoid(w.utility(X))
        y = (rng.random(4_000) < p).astype(int)
        model = LinearConjoint(schema=schema, link="single").fit(X, y)
        # recovered weights should rank items like the truth
        r = np.corrcoef(model.partworths_effects_.values, w.effects_code().values)[0, 1]
        assert r > 0.95
