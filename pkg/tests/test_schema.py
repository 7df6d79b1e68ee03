import numpy as np
import pytest

from conftest import make_schema
from partworth.errors import ValidationError
from partworth.schema import Attribute, AttributeSchema, concat_schema


class TestConstruction:
    def test_rejects_single_level_attribute(self):
        with pytest.raises(ValidationError):
            AttributeSchema([("a", ["only"])])

    def test_rejects_duplicate_levels(self):
        with pytest.raises(ValidationError):
            Attribute("a", ("x", "x"))

    def test_width_is_sum_of_level_counts(self):
        schema = make_schema([3, 4, 2])
        assert schema.width == 9
        assert schema.m == 3
        assert schema.k(1) == 4


class TestOneHot:
    def test_three_level_block(self):
        schema = AttributeSchema([("color", ["red", "green", "blue"])])
        np.testing.assert_array_equal(schema.one_hot(["green"]), [0.0, 1.0, 0.0])

    def test_count_attribute_top_level(self):
        schema = AttributeSchema([("count", [str(i) for i in range(6)])])
        np.testing.assert_array_equal(schema.one_hot(["5"]), [0, 0, 0, 0, 0, 1])

    def test_unseen_level_names_attribute_and_value(self):
        schema = AttributeSchema([("color", ["red", "green"])])
        with pytest.raises(ValidationError, match="'purple'.*'color'"):
            schema.one_hot(["purple"])

    def test_exactly_one_hot_per_attribute(self, rng):
        schema = make_schema([2, 3, 4, 6])
        idx = np.column_stack([rng.integers(0, k, 50) for k in (2, 3, 4, 6)])
        X = schema.one_hot_indices(idx)
        for i in range(schema.m):
            np.testing.assert_array_equal(X[:, schema.block(i)].sum(axis=1), np.ones(50))
        assert X.sum() == 50 * schema.m

    def test_decode_roundtrip(self, rng):
        schema = make_schema([3, 2, 5])
        for _ in range(20):
            values = [str(rng.integers(0, k)) for k in (3, 2, 5)]
            assert schema.decode(schema.one_hot(values)) == values

    def test_decode_indices_roundtrip(self, rng):
        schema = make_schema([4, 4])
        idx = np.column_stack([rng.integers(0, 4, 30) for _ in range(2)])
        np.testing.assert_array_equal(schema.decode_indices(schema.one_hot_indices(idx)), idx)


class TestNumeric:
    def test_numeric_levels_parse(self):
        schema = make_schema([3, 2])
        out = schema.numeric_from_indices(np.array([[2, 1], [0, 0]]))
        np.testing.assert_array_equal(out, [[2.0, 1.0], [0.0, 0.0]])

    def test_non_numeric_levels_rejected(self):
        schema = AttributeSchema([("color", ["red", "green"])])
        with pytest.raises(ValidationError, match="non-numeric"):
            schema.numeric_from_indices(np.array([[0]]))


class TestMisc:
    def test_json_roundtrip(self):
        schema = make_schema([2, 3])
        assert AttributeSchema.from_json(schema.to_json()) == schema

    def test_item_enumeration(self):
        schema = make_schema([2, 3])
        items = list(schema.iter_items())
        assert len(items) == schema.n_items() == 6
        assert len(set(items)) == 6

    def test_concat_schema_doubles_width(self):
        schema = make_schema([2, 3])
        doubled = concat_schema(schema)
        assert doubled.width == 2 * schema.width
        assert doubled.attributes[0].name == "a_attr0"
        assert doubled.attributes[2].name == "b_attr0"
