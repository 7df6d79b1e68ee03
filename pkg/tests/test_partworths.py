"""PartworthTable arithmetic against independent brute-force oracles."""

import numpy as np
import pytest

from conftest import make_schema
from partworth.linear import PartworthTable


def brute_force_utility(schema, values, item_values):
    """Direct summation over active levels, no matrix algebra."""
    total = 0.0
    for i, attr in enumerate(schema.attributes):
        j = attr.levels.index(item_values[i])
        total += values[schema.block(i)][j]
    return total


class TestUtility:
    def test_zero_weights_give_zero(self, rng):
        schema = make_schema([3, 4])
        table = PartworthTable(schema, np.zeros(schema.width))
        x = schema.one_hot_indices(np.array([[1, 2], [0, 3]]))
        np.testing.assert_array_equal(table.utility(x), [0.0, 0.0])

    def test_single_attribute_selects_level(self):
        schema = make_schema([2])
        table = PartworthTable(schema, np.array([0.3, -0.3]))
        assert table.utility(schema.one_hot(["0"]).reshape(1, -1))[0] == pytest.approx(0.3)

    def test_matches_direct_summation(self, rng):
        schema = make_schema([3, 2, 4, 5])
        values = rng.standard_normal(schema.width)
        table = PartworthTable(schema, values)
        for _ in range(25):
            item = [str(rng.integers(0, schema.k(i))) for i in range(schema.m)]
            expected = brute_force_utility(schema, values, item)
            got = table.utility(schema.one_hot(item).reshape(1, -1))[0]
            assert got == pytest.approx(expected, abs=1e-12)

    def test_utility_indices_matches_one_hot_path(self, rng):
        schema = make_schema([3, 3, 3])
        table = PartworthTable(schema, rng.standard_normal(schema.width))
        idx = np.column_stack([rng.integers(0, 3, 40) for _ in range(3)])
        via_onehot = table.utility(schema.one_hot_indices(idx))
        np.testing.assert_allclose(table.utility_indices(idx), via_onehot, atol=1e-12)


class TestEffectsCoding:
    def test_simple_example(self):
        schema = make_schema([3])
        coded = PartworthTable(schema, np.array([1.0, 2.0, 3.0])).effects_code()
        np.testing.assert_allclose(coded.values, [-1.0, 0.0, 1.0])
        assert coded.effects_coded

    def test_zero_mean_input_unchanged(self):
        schema = make_schema([3])
        values = np.array([-1.0, 0.0, 1.0])
        coded = PartworthTable(schema, values).effects_code()
        np.testing.assert_allclose(coded.values, values, atol=1e-15)

    def test_per_attribute_sums_are_zero(self, rng):
        schema = make_schema([2, 5, 3])
        coded = PartworthTable(schema, rng.standard_normal(schema.width) * 10).effects_code()
        for i in range(schema.m):
            assert abs(coded.block_values(i).sum()) < 1e-9

    def test_pairwise_utility_differences_invariant(self, rng):
        schema = make_schema([3, 4, 2])
        raw = PartworthTable(schema, rng.standard_normal(schema.width))
        coded = raw.effects_code()
        a = schema.one_hot_indices(np.column_stack([rng.integers(0, k, 30) for k in (3, 4, 2)]))
        b = schema.one_hot_indices(np.column_stack([rng.integers(0, k, 30) for k in (3, 4, 2)]))
        np.testing.assert_allclose(
            raw.utility(a) - raw.utility(b), coded.utility(a) - coded.utility(b), atol=1e-10
        )


class TestImportance:
    def test_range_definition(self):
        schema = make_schema([3])
        imp = PartworthTable(schema, np.array([1.0, -0.5, 0.2])).importance()
        assert imp.values[0] == pytest.approx(1.5)

    def test_all_zero_reports_uniform_degenerate(self):
        schema = make_schema([2, 2])
        imp = PartworthTable(schema, np.zeros(4)).importance()
        assert imp.degenerate
        np.testing.assert_array_equal(imp.values, [0.0, 0.0])
        np.testing.assert_allclose(imp.shares, [0.5, 0.5])

    def test_constant_shift_invariance(self, rng):
        schema = make_schema([4, 3])
        values = rng.standard_normal(schema.width)
        shifted = values.copy()
        shifted[schema.block(0)] += 7.3
        u0 = PartworthTable(schema, values).importance().values
        u1 = PartworthTable(schema, shifted).importance().values
        np.testing.assert_allclose(u0, u1, atol=1e-12)

    def test_sum_variant(self):
        schema = make_schema([3])
        imp = PartworthTable(schema, np.array([1.0, 2.0, 3.0])).importance(method="sum")
        assert imp.values[0] == pytest.approx(6.0)
        assert imp.method == "sum"

    def test_shares_sum_to_one(self, rng):
        schema = make_schema([2, 3, 4])
        imp = PartworthTable(schema, rng.standard_normal(schema.width)).importance()
        assert imp.shares.sum() == pytest.approx(1.0)


class TestBestOption:
    def test_simple_argmax(self):
        schema = make_schema([2, 2])
        table = PartworthTable(schema, np.array([0.1, 0.9, -1.0, -2.0]))
        np.testing.assert_array_equal(table.best_option(), [1, 0])

    def test_tie_goes_to_lowest_index(self):
        schema = make_schema([3])
        table = PartworthTable(schema, np.array([0.5, 0.5, 0.5]))
        assert table.best_option()[0] == 0

    def test_maximises_over_exhaustive_enumeration(self, rng):
        for trial in range(10):
            counts = [int(rng.integers(2, 5)) for _ in range(int(rng.integers(1, 5)))]
            schema = make_schema(counts)
            table = PartworthTable(schema, rng.standard_normal(schema.width))
            best_u = max(
                table.utility_indices(np.array(item).reshape(1, -1))[0]
                for item in schema.iter_items()
            )
            chosen = table.utility_indices(table.best_option().reshape(1, -1))[0]
            assert chosen == pytest.approx(best_u, abs=1e-12)

    def test_invariant_under_effects_coding(self, rng):
        schema = make_schema([3, 4, 2])
        table = PartworthTable(schema, rng.standard_normal(schema.width))
        np.testing.assert_array_equal(table.best_option(), table.effects_code().best_option())


class TestReportRows:
    def test_csv_rows_cover_every_level(self, tmp_path, rng):
        schema = make_schema([2, 3])
        table = PartworthTable(schema, rng.standard_normal(5)).effects_code()
        path = tmp_path / "pw.csv"
        table.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "attribute,level,partworth,importance,importance_share"
        assert len(lines) == 1 + schema.width
