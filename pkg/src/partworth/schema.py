"""Attribute/level layout of survey items and its one-hot encoding.

An item is described by m categorical attributes; attribute i has k_i named
levels (k_i >= 2). The one-hot encoding concatenates one block per attribute,
so the total width is the sum of the level counts and every encoded item has
exactly one 1 per block.
"""

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .validation import as_matrix


@dataclass(frozen=True)
class Attribute:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValidationError(f"attribute {self.name!r} needs at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise ValidationError(f"attribute {self.name!r} has duplicate levels")


class AttributeSchema:
    """Ordered attributes with level lookups and one-hot block arithmetic."""

    def __init__(self, attributes: Iterable):
        attrs = []
        for a in attributes:
            if isinstance(a, Attribute):
                attrs.append(a)
            else:
                name, levels = a
                attrs.append(Attribute(str(name), tuple(str(v) for v in levels)))
        if not attrs:
            raise ValidationError("schema needs at least one attribute")
        if len({a.name for a in attrs}) != len(attrs):
            raise ValidationError("schema has duplicate attribute names")
        self.attributes: tuple[Attribute, ...] = tuple(attrs)
        self._offsets = np.cumsum([0] + [len(a.levels) for a in self.attributes])
        self._level_index = {
            (a.name, lev): j for a in self.attributes for j, lev in enumerate(a.levels)
        }

    @property
    def m(self) -> int:
        return len(self.attributes)

    @property
    def width(self) -> int:
        return int(self._offsets[-1])

    def k(self, i: int) -> int:
        return len(self.attributes[i].levels)

    def level_counts(self) -> np.ndarray:
        return np.array([self.k(i) for i in range(self.m)], dtype=np.int64)

    def block(self, i: int) -> slice:
        return slice(int(self._offsets[i]), int(self._offsets[i + 1]))

    def level_index(self, attr_name: str, level: str) -> int:
        try:
            return self._level_index[(attr_name, str(level))]
        except KeyError:
            raise ValidationError(
                f"unknown level {level!r} for attribute {attr_name!r}"
            ) from None

    def indices_from_values(self, values: Sequence) -> np.ndarray:
        if len(values) != self.m:
            raise ValidationError(f"record has {len(values)} values, schema has {self.m} attributes")
        return np.array(
            [self.level_index(a.name, v) for a, v in zip(self.attributes, values)],
            dtype=np.int64,
        )

    def one_hot(self, values: Sequence) -> np.ndarray:
        """Encode one record of raw level values into a flat 0/1 vector."""
        return self.one_hot_indices(self.indices_from_values(values).reshape(1, -1))[0]

    def one_hot_indices(self, idx: np.ndarray) -> np.ndarray:
        """Encode an (n, m) array of level indices into an (n, width) 0/1 matrix."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.ndim == 1:
            idx = idx.reshape(1, -1)
        if idx.shape[1] != self.m:
            raise ValidationError(f"index rows have {idx.shape[1]} entries, schema has {self.m}")
        counts = self.level_counts()
        if np.any(idx < 0) or np.any(idx >= counts):
            bad = np.argwhere((idx < 0) | (idx >= counts))[0]
            a = self.attributes[int(bad[1])]
            raise ValidationError(
                f"level index {int(idx[bad[0], bad[1]])} out of range for attribute {a.name!r}"
            )
        out = np.zeros((idx.shape[0], self.width), dtype=np.float64)
        cols = idx + self._offsets[:-1]
        out[np.arange(idx.shape[0])[:, None], cols] = 1.0
        return out

    def decode(self, vector: np.ndarray) -> list[str]:
        """Invert one_hot by per-block argmax, returning level names."""
        vec = np.asarray(vector, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.width:
            raise ValidationError(f"vector width {vec.shape[0]} != schema width {self.width}")
        return [
            a.levels[int(np.argmax(vec[self.block(i)]))]
            for i, a in enumerate(self.attributes)
        ]

    def decode_indices(self, matrix: np.ndarray) -> np.ndarray:
        """Per-block argmax of an (n, width) matrix, as level indices."""
        mat = as_matrix(matrix)
        if mat.shape[1] != self.width:
            raise ValidationError(f"matrix width {mat.shape[1]} != schema width {self.width}")
        out = np.empty((mat.shape[0], self.m), dtype=np.int64)
        for i in range(self.m):
            out[:, i] = np.argmax(mat[:, self.block(i)], axis=1)
        return out

    def numeric_level_values(self) -> list[np.ndarray]:
        """Level names parsed as floats, for schemas whose levels are numbers."""
        out = []
        for a in self.attributes:
            try:
                out.append(np.array([float(v) for v in a.levels]))
            except ValueError:
                raise ValidationError(
                    f"attribute {a.name!r} has non-numeric levels; numeric encoding unavailable"
                ) from None
        return out

    def numeric_from_indices(self, idx: np.ndarray) -> np.ndarray:
        """Map level indices to their numeric level values, shape (n, m)."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.ndim == 1:
            idx = idx.reshape(1, -1)
        values = self.numeric_level_values()
        out = np.empty(idx.shape, dtype=np.float64)
        for i in range(self.m):
            out[:, i] = values[i][idx[:, i]]
        return out

    def n_items(self) -> int:
        n = 1
        for a in self.attributes:
            n *= len(a.levels)
        return n

    def iter_items(self) -> Iterator[tuple[int, ...]]:
        """All items as level-index tuples, lexicographic order."""
        return product(*(range(self.k(i)) for i in range(self.m)))

    def to_json(self) -> dict:
        return {"attributes": [{"name": a.name, "levels": list(a.levels)} for a in self.attributes]}

    @classmethod
    def from_json(cls, obj: dict) -> "AttributeSchema":
        return cls((a["name"], a["levels"]) for a in obj["attributes"])

    def __eq__(self, other) -> bool:
        return isinstance(other, AttributeSchema) and self.attributes == other.attributes

    def __repr__(self) -> str:
        return f"AttributeSchema(m={self.m}, width={self.width})"


def concat_schema(schema: AttributeSchema, prefixes: tuple[str, str] = ("a_", "b_")) -> AttributeSchema:
    """Schema of a pair record viewed as one long item (option A then B)."""
    attrs = [(prefixes[0] + a.name, a.levels) for a in schema.attributes]
    attrs += [(prefixes[1] + a.name, a.levels) for a in schema.attributes]
    return AttributeSchema(attrs)
