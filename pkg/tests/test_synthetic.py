"""Generator self-consistency: recorded ground truth must match behaviour."""

import numpy as np
import pytest

from conftest import make_schema
from partworth.errors import ValidationError
from partworth.linear import LinearConjoint, PartworthTable
from partworth.nn.layers import stable_sigmoid
from partworth.synthetic import (
    random_partworths,
    synth_clustered,
    synth_interaction,
    synth_linear,
)


class TestSynthLinear:
    def test_zero_weights_give_balanced_labels(self):
        schema = make_schema([3, 3])
        data = synth_linear(schema, PartworthTable(schema, np.zeros(schema.width)),
                            n_pairs=10_000, seed=0)
        assert abs(data.y.mean() - 0.5) < 0.02
        assert data.meta["bayes_accuracy"] == pytest.approx(0.5)

    def test_large_margin_saturates_to_argmax(self):
        schema = make_schema([3, 3])
        w = random_partworths(schema, seed=1, scale=100.0)
        data = synth_linear(schema, w, n_pairs=5_000, seed=2)
        du = w.utility_indices(data.a) - w.utility_indices(data.b)
        deterministic = du != 0.0
        agree = (data.y[deterministic] == (du[deterministic] > 0)).mean()
        assert agree > 0.999

    def test_bayes_accuracy_self_consistency(self):
        schema = make_schema([3, 3, 3, 3])
        w = random_partworths(schema, seed=3)
        data = synth_linear(schema, w, n_pairs=10, seed=4)
        fresh = synth_linear(schema, w, n_pairs=100_000, seed=5)
        du = w.utility_indices(fresh.a) - w.utility_indices(fresh.b)
        rule_preds = (stable_sigmoid(du) >= 0.5).astype(int)
        rule_acc = (rule_preds == fresh.y).mean()
        assert abs(rule_acc - data.meta["bayes_accuracy"]) < 0.01
        assert data.meta["bayes_exact"]

    def test_reproducible_from_seed(self):
        schema = make_schema([2, 4])
        w = random_partworths(schema, seed=6)
        d1 = synth_linear(schema, w, 500, seed=7)
        d2 = synth_linear(schema, w, 500, seed=7)
        np.testing.assert_array_equal(d1.a, d2.a)
        np.testing.assert_array_equal(d1.b, d2.b)
        np.testing.assert_array_equal(d1.y, d2.y)


class TestSynthInteraction:
    def test_xor_records_bayes_accuracy(self):
        schema = make_schema([2, 2, 3])
        data = synth_interaction(schema, "xor", n=100, noise=0.05, seed=0)
        assert data.meta["bayes_accuracy"] == pytest.approx(0.95)

    def test_xor_needs_two_binary_attributes(self):
        schema = make_schema([2, 3])
        with pytest.raises(ValidationError, match="binary"):
            synth_interaction(schema, "xor", n=10, noise=0.0, seed=0)

    def test_linear_fit_fails_on_xor(self):
        schema = make_schema([2, 2, 3, 3])
        train = synth_interaction(schema, "xor", n=6_000, noise=0.05, seed=1)
        test = synth_interaction(schema, "xor", n=4_000, noise=0.05, seed=2)
        model = LinearConjoint(schema=schema, link="single")
        model.fit(train.one_hot_single(), train.y)
        acc = (model.predict(test.one_hot_single()) == test.y).mean()
        assert acc <= 0.60

    def test_threshold_lookup_table_is_perfect_without_noise(self):
        schema = make_schema([4, 4, 3])
        data = synth_interaction(schema, "threshold", n=3_000, noise=0.0, seed=3)
        table = {}
        for row, label in zip(map(tuple, data.x), data.y):
            table.setdefault(row, label)
        preds = np.array([table[tuple(row)] for row in data.x])
        assert (preds == data.y).mean() == 1.0

    def test_threshold_is_non_compensatory(self):
        schema = make_schema([4, 4])
        data = synth_interaction(schema, "threshold", n=4_000, noise=0.0, seed=4)
        # max level on attribute 0 cannot compensate a low attribute 1
        blocked = (data.x[:, 0] == 3) & (data.x[:, 1] == 0)
        assert blocked.sum() > 0
        assert data.y[blocked].max() == 0

    def test_pairwise_mode_has_no_score_ties(self):
        schema = make_schema([2, 2, 3])
        data = synth_interaction(schema, "xor", n=2_000, noise=0.0, seed=5,
                                 pairing="pairwise")
        sa = (data.a[:, 0] ^ data.a[:, 1])
        sb = (data.b[:, 0] ^ data.b[:, 1])
        assert (sa == sb).sum() == 0
        np.testing.assert_array_equal(data.y, (sa > sb).astype(int))

    def test_noise_flips_apply(self):
        schema = make_schema([2, 2])
        clean = synth_interaction(schema, "xor", n=5_000, noise=0.0, seed=6)
        noisy = synth_interaction(schema, "xor", n=5_000, noise=0.3, seed=6)
        parity = clean.x[:, 0] ^ clean.x[:, 1]
        assert abs((noisy.y != (noisy.x[:, 0] ^ noisy.x[:, 1])).mean() - 0.3) < 0.02
        assert (clean.y == parity).all()


class TestSynthClustered:
    def test_items_stay_near_prototypes(self):
        schema = make_schema([4] * 10)
        data = synth_clustered(schema, n=2_000, seed=0, n_clusters=4, corruption=0.1)
        protos = np.array(data.meta["prototypes"])
        assign = np.array(data.meta["clusters"])
        match = (data.x == protos[assign]).mean()
        assert abs(match - 0.9) < 0.02

    def test_unlabeled(self):
        schema = make_schema([3, 3])
        data = synth_clustered(schema, n=50, seed=1)
        assert data.y is None

    def test_reproducible(self):
        schema = make_schema([3, 3, 3])
        d1 = synth_clustered(schema, n=100, seed=2)
        d2 = synth_clustered(schema, n=100, seed=2)
        np.testing.assert_array_equal(d1.x, d2.x)
        assert d1.meta["clusters"] == d2.meta["clusters"]
