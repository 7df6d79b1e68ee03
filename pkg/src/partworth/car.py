"""Car preference ingestion.

Each experiment is one CSV with a row per recorded comparison, produced by
joining the release's users/items/preferences tables:

    UserID, Education, Age, Gender, Region,
    BodyTypeA, TransmissionA, EngineCapacityA, FuelA, [LayoutA,]
    BodyTypeB, TransmissionB, EngineCapacityB, FuelB, [LayoutB,]
    Choice

Choice is 1 when car A was chosen. Experiment 2 carries the extra
engine/transmission Layout attribute; experiment 1 does not. Malformed rows
are skipped and counted with their line numbers. Attribute levels are taken
from the observed data, sorted for determinism.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .datasets import ChoiceDataset
from .errors import DataError
from .schema import AttributeSchema

USER_ATTRS = ("Education", "Age", "Gender", "Region")
CAR_ATTRS_EXP1 = ("BodyType", "Transmission", "EngineCapacity", "Fuel")
CAR_ATTRS_EXP2 = CAR_ATTRS_EXP1 + ("Layout",)


def _columns(experiment: int) -> list[str]:
    car_attrs = CAR_ATTRS_EXP1 if experiment == 1 else CAR_ATTRS_EXP2
    cols = ["UserID", *USER_ATTRS]
    cols += [a + "A" for a in car_attrs]
    cols += [a + "B" for a in car_attrs]
    cols.append("Choice")
    return cols


@dataclass
class CarChoiceRecord:
    user_id: str
    user_attrs: dict[str, str]
    car_a: dict[str, str]
    car_b: dict[str, str]
    chosen: int  # 1 = car A chosen
    experiment: int


@dataclass
class CarLoadStats:
    rows_read: int = 0
    rows_rejected: int = 0
    rejected_lines: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"rows_read": self.rows_read, "rows_rejected": self.rows_rejected,
                "rejected_lines": self.rejected_lines[:50]}


def _load_one(path, experiment: int, stats: CarLoadStats) -> list[CarChoiceRecord]:
    car_attrs = CAR_ATTRS_EXP1 if experiment == 1 else CAR_ATTRS_EXP2
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    records = []
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path} has no header row")
        missing = [c for c in _columns(experiment) if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path} is missing required columns: {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            stats.rows_read += 1
            try:
                values = {c: row[c].strip() for c in _columns(experiment)}
                if any(not v for v in values.values()):
                    raise ValueError("blank field")
                choice = int(values["Choice"])
                if choice not in (0, 1):
                    raise ValueError(f"Choice={values['Choice']}")
            except (ValueError, AttributeError):
                stats.rows_rejected += 1
                stats.rejected_lines.append(line_no)
                continue
            records.append(
                CarChoiceRecord(
                    user_id=values["UserID"],
                    user_attrs={a: values[a] for a in USER_ATTRS},
                    car_a={a: values[a + "A"] for a in car_attrs},
                    car_b={a: values[a + "B"] for a in car_attrs},
                    chosen=choice,
                    experiment=experiment,
                )
            )
    return records


def load_car(exp1_path=None, exp2_path=None) -> tuple[list[CarChoiceRecord], CarLoadStats]:
    """Load one or both experiment files into a single record list."""
    if exp1_path is None and exp2_path is None:
        raise DataError("at least one of exp1/exp2 paths is required")
    stats = CarLoadStats()
    records: list[CarChoiceRecord] = []
    if exp1_path is not None:
        records += _load_one(exp1_path, 1, stats)
    if exp2_path is not None:
        records += _load_one(exp2_path, 2, stats)
    return records, stats


def car_schema(records: list[CarChoiceRecord], experiment: int,
               include_user_attrs: bool = False) -> AttributeSchema:
    """Observed-level schema for one experiment's car (and optionally user) attributes."""
    subset = [r for r in records if r.experiment == experiment]
    if not subset:
        raise DataError(f"no records for experiment {experiment}")
    car_attrs = CAR_ATTRS_EXP1 if experiment == 1 else CAR_ATTRS_EXP2
    attrs = []
    for a in car_attrs:
        levels = sorted({r.car_a[a] for r in subset} | {r.car_b[a] for r in subset})
        attrs.append((a, levels))
    if include_user_attrs:
        for a in USER_ATTRS:
            levels = sorted({r.user_attrs[a] for r in subset})
            attrs.append(("User" + a, levels))
    return AttributeSchema(attrs)


def car_records_to_dataset(records: list[CarChoiceRecord], experiment: int,
                           include_user_attrs: bool = False,
                           stats: CarLoadStats | None = None) -> ChoiceDataset:
    """Pairwise dataset for one experiment; user attributes, when included,
    are appended identically to both options (they cancel under difference
    links and only matter for concatenated-input models)."""
    schema = car_schema(records, experiment, include_user_attrs)
    subset = [r for r in records if r.experiment == experiment]
    car_attrs = CAR_ATTRS_EXP1 if experiment == 1 else CAR_ATTRS_EXP2

    def indices(rec: CarChoiceRecord, car: dict[str, str]) -> list[int]:
        values = [car[a] for a in car_attrs]
        if include_user_attrs:
            values += [rec.user_attrs[a] for a in USER_ATTRS]
        return list(schema.indices_from_values(values))

    a = np.array([indices(r, r.car_a) for r in subset], dtype=np.int64)
    b = np.array([indices(r, r.car_b) for r in subset], dtype=np.int64)
    y = np.array([r.chosen for r in subset], dtype=np.int64)
    meta = {"source": "car_preference", "experiment": experiment,
            "include_user_attrs": include_user_attrs}
    if stats is not None:
        meta["load_stats"] = stats.to_json()
    return ChoiceDataset(
        schema=schema, pairing="pairwise", y=y, a=a, b=b,
        users=[r.user_id for r in subset], meta=meta,
    )
