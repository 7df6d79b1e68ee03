"""Canonical dataset container, on-disk format, and split management.

Datasets hold level-index records under an AttributeSchema, either as option
pairs (a, b) with a binary "A chosen" target or as single item vectors with an
accept/reject target. The JSON file format is versioned so downstream runs
never re-parse raw survey exports.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError
from .schema import AttributeSchema

DATASET_FORMAT = "prefdata"
DATASET_VERSION = 1


@dataclass
class ChoiceDataset:
    schema: AttributeSchema
    pairing: str  # "pairwise" | "single"
    y: np.ndarray | None
    a: np.ndarray | None = None  # (n, m) level indices, pairwise only
    b: np.ndarray | None = None
    x: np.ndarray | None = None  # (n, m) level indices, single only
    users: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pairing not in ("pairwise", "single"):
            raise ValidationError(f"unknown pairing {self.pairing!r}")
        if self.pairing == "pairwise":
            if self.a is None or self.b is None:
                raise ValidationError("pairwise dataset needs a and b index arrays")
            self.a = np.asarray(self.a, dtype=np.int64)
            self.b = np.asarray(self.b, dtype=np.int64)
            if self.a.shape != self.b.shape:
                raise ValidationError("a and b must have the same shape")
            n = self.a.shape[0]
        else:
            if self.x is None:
                raise ValidationError("single dataset needs an x index array")
            self.x = np.asarray(self.x, dtype=np.int64)
            n = self.x.shape[0]
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
            if self.y.shape[0] != n:
                raise ValidationError("targets do not match record count")
            if self.y.size and not np.all(np.isin(self.y, (0, 1))):
                raise ValidationError("targets must be binary")
        if self.users is not None and len(self.users) != n:
            raise ValidationError("user ids do not match record count")

    @property
    def n(self) -> int:
        return self.a.shape[0] if self.pairing == "pairwise" else self.x.shape[0]

    def subset(self, idx: np.ndarray) -> "ChoiceDataset":
        idx = np.asarray(idx, dtype=np.int64)
        users = [self.users[i] for i in idx] if self.users is not None else None
        return ChoiceDataset(
            schema=self.schema,
            pairing=self.pairing,
            y=None if self.y is None else self.y[idx],
            a=None if self.a is None else self.a[idx],
            b=None if self.b is None else self.b[idx],
            x=None if self.x is None else self.x[idx],
            users=users,
            meta=dict(self.meta),
        )

    # ---- model-facing encodings -------------------------------------------

    def one_hot_pair(self) -> np.ndarray:
        """(n, 2*width) matrix [one_hot(a) | one_hot(b)]."""
        if self.pairing != "pairwise":
            raise ValidationError("one_hot_pair requires a pairwise dataset")
        return np.hstack(
            [self.schema.one_hot_indices(self.a), self.schema.one_hot_indices(self.b)]
        )

    def one_hot_single(self) -> np.ndarray:
        if self.pairing != "single":
            raise ValidationError("one_hot_single requires a single-item dataset")
        return self.schema.one_hot_indices(self.x)

    def numeric_pair_concat(self) -> np.ndarray:
        """(n, 2*m) numeric features [numeric(a) | numeric(b)]."""
        if self.pairing != "pairwise":
            raise ValidationError("numeric_pair_concat requires a pairwise dataset")
        return np.hstack(
            [self.schema.numeric_from_indices(self.a), self.schema.numeric_from_indices(self.b)]
        )

    def numeric_single(self) -> np.ndarray:
        if self.pairing != "single":
            raise ValidationError("numeric_single requires a single-item dataset")
        return self.schema.numeric_from_indices(self.x)

    def items_matrix(self) -> np.ndarray:
        """All distinct option vectors as one-hot rows (for AE pretraining)."""
        if self.pairing == "single":
            return self.one_hot_single()
        stacked = np.vstack([self.a, self.b])
        return self.schema.one_hot_indices(stacked)

    # ---- persistence --------------------------------------------------------

    def to_json(self) -> dict:
        obj = {
            "format": DATASET_FORMAT,
            "version": DATASET_VERSION,
            "pairing": self.pairing,
            "schema": self.schema.to_json(),
            "y": None if self.y is None else self.y.tolist(),
            "users": self.users,
            "meta": self.meta,
        }
        if self.pairing == "pairwise":
            obj["a"] = self.a.tolist()
            obj["b"] = self.b.tolist()
        else:
            obj["x"] = self.x.tolist()
        return obj

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, obj: dict) -> "ChoiceDataset":
        if obj.get("format") != DATASET_FORMAT:
            raise DataError(f"not a {DATASET_FORMAT} file")
        if obj.get("version") != DATASET_VERSION:
            raise DataError(f"unsupported dataset version {obj.get('version')}")
        schema = AttributeSchema.from_json(obj["schema"])
        y = None if obj["y"] is None else np.asarray(obj["y"], dtype=np.int64)
        kwargs = dict(schema=schema, pairing=obj["pairing"], y=y,
                      users=obj.get("users"), meta=obj.get("meta", {}))
        if obj["pairing"] == "pairwise":
            kwargs["a"] = np.asarray(obj["a"], dtype=np.int64)
            kwargs["b"] = np.asarray(obj["b"], dtype=np.int64)
        else:
            kwargs["x"] = np.asarray(obj["x"], dtype=np.int64)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ChoiceDataset":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except FileNotFoundError:
            raise DataError(f"dataset file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"dataset file is not valid JSON: {path}: {exc}") from None
        return cls.from_json(obj)


@dataclass
class DatasetSplit:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int
    test_fraction: float
    val_fraction: float
    by_respondent: bool

    def to_json(self) -> dict:
        return {
            "train": self.train.tolist(),
            "validation": self.validation.tolist(),
            "test": self.test.tolist(),
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "val_fraction": self.val_fraction,
            "by_respondent": self.by_respondent,
        }


def split_dataset(dataset: ChoiceDataset, seed: int, by_respondent: bool = False,
                  test_fraction: float = 0.3, val_fraction: float = 0.1) -> DatasetSplit:
    """70/30 train/test split with 10% of the train partition as validation.

    Test size is floor(test_fraction * n) with the remainder going to train;
    validation is floor(val_fraction * remaining). ``by_respondent`` keeps all
    records of one user in a single partition.
    """
    n = dataset.n
    if n < 3:
        raise ValidationError("need at least 3 records to split")
    rng = np.random.default_rng(seed)
    n_test = int(np.floor(test_fraction * n))
    n_val = int(np.floor(val_fraction * (n - n_test)))

    if by_respondent:
        if dataset.users is None:
            raise ValidationError("by_respondent split requires user ids")
        users = list(dict.fromkeys(dataset.users))  # first-appearance order
        if len(users) < 3:
            raise ValidationError("by_respondent split needs at least 3 distinct users")
        order = rng.permutation(len(users))
        by_user: dict[str, list[int]] = {}
        for i, u in enumerate(dataset.users):
            by_user.setdefault(u, []).append(i)
        test_idx: list[int] = []
        val_idx: list[int] = []
        train_idx: list[int] = []
        for pos in order:
            rows = by_user[users[pos]]
            if len(test_idx) < n_test:
                test_idx.extend(rows)
            elif len(val_idx) < n_val:
                val_idx.extend(rows)
            else:
                train_idx.extend(rows)
        if not train_idx or not test_idx:
            raise ValidationError("by_respondent split left a partition empty")
        train, val, test = np.sort(train_idx), np.sort(val_idx), np.sort(test_idx)
    else:
        perm = rng.permutation(n)
        test = np.sort(perm[:n_test])
        rest = perm[n_test:]
        val = np.sort(rest[:n_val])
        train = np.sort(rest[n_val:])

    return DatasetSplit(
        train=np.asarray(train, dtype=np.int64),
        validation=np.asarray(val, dtype=np.int64),
        test=np.asarray(test, dtype=np.int64),
        seed=seed,
        test_fraction=test_fraction,
        val_fraction=val_fraction,
        by_respondent=by_respondent,
    )
