"""Moral Machine ingestion.

The raw export has one row per scenario side; a dilemma (ResponseID) consists
of one row where the car swerves (Intervention=1) and one where it does not.
We keep only pedestrian-vs-pedestrian dilemmas (PedPed=1), drop rows with an
empty UserID, merge the two sides on ResponseID, and read the binary target
Intervened off the Saved value of the intervention row.

Two encodings are derivable from the stored pairs: the per-side one-hot under
``mm_side_schema()`` (20 count attributes with levels 0..5, CrossingSignal
0..2, LeftHand 0/1 -> width 125 per side), and a 42-wide numeric vector
[int counts | noint counts | CrossingSignal | LeftHand] that takes the two
shared fields from the intervention side, int side first.
"""

import csv
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .datasets import ChoiceDataset
from .errors import DataError
from .schema import AttributeSchema

AGENT_COLUMNS = (
    "Man", "Woman", "Pregnant", "Stroller", "OldMan", "OldWoman", "Boy", "Girl",
    "Homeless", "LargeWoman", "LargeMan", "Criminal", "MaleExecutive",
    "FemaleExecutive", "FemaleAthlete", "MaleAthlete", "FemaleDoctor",
    "MaleDoctor", "Dog", "Cat",
)
REQUIRED_COLUMNS = (
    "ResponseID", "UserID", "PedPed", "Intervention", "Saved",
    "CrossingSignal", "LeftHand",
) + AGENT_COLUMNS

MAX_AGENT_COUNT = 5


@dataclass
class MMScenarioPair:
    """One merged dilemma: agent counts plus signal/side flags per side."""

    response_id: str
    user_id: str
    int_counts: tuple[int, ...]
    noint_counts: tuple[int, ...]
    int_crossing_signal: int
    int_left_hand: int
    noint_crossing_signal: int
    noint_left_hand: int
    intervened: int


@dataclass
class MMLoadStats:
    rows_read: int = 0
    rows_pedped_dropped: int = 0
    rows_empty_user: int = 0
    rows_bad_values: int = 0
    responses_unpaired: int = 0
    pairs_kept: int = 0
    pairs_dropped_by_limit: int = 0
    bad_value_lines: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in (
            "rows_read", "rows_pedped_dropped", "rows_empty_user", "rows_bad_values",
            "responses_unpaired", "pairs_kept", "pairs_dropped_by_limit",
        )}


def mm_side_schema() -> AttributeSchema:
    """One scenario side: 20 agent-count attributes, CrossingSignal, LeftHand."""
    levels_count = tuple(str(v) for v in range(MAX_AGENT_COUNT + 1))
    attrs = [(name, levels_count) for name in AGENT_COLUMNS]
    attrs.append(("CrossingSignal", ("0", "1", "2")))
    attrs.append(("LeftHand", ("0", "1")))
    return AttributeSchema(attrs)


def _parse_side(row: dict) -> tuple[tuple[int, ...], int, int]:
    counts = []
    for col in AGENT_COLUMNS:
        v = int(float(row[col]))
        if v < 0 or v > MAX_AGENT_COUNT:
            raise ValueError(f"{col}={v} outside 0..{MAX_AGENT_COUNT}")
        counts.append(v)
    cs = int(float(row["CrossingSignal"]))
    if cs not in (0, 1, 2):
        raise ValueError(f"CrossingSignal={cs}")
    lh = int(float(row["LeftHand"]))
    if lh not in (0, 1):
        raise ValueError(f"LeftHand={lh}")
    return tuple(counts), cs, lh


def load_mm(path, limit: int | None = None) -> tuple[list[MMScenarioPair], AttributeSchema, MMLoadStats]:
    """Parse a Moral Machine responses export into merged scenario pairs.

    ``limit`` keeps a deterministic uniform subsample of pairs, selected by
    the smallest sha256 of their ResponseID.
    """
    stats = MMLoadStats()
    sides: dict[str, list[tuple[dict, int]]] = {}
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path} has no header row")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path} is missing required columns: {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            stats.rows_read += 1
            if row["PedPed"].strip() != "1":
                stats.rows_pedped_dropped += 1
                continue
            if not row["UserID"].strip():
                stats.rows_empty_user += 1
                continue
            sides.setdefault(row["ResponseID"], []).append((row, line_no))

    pairs: list[MMScenarioPair] = []
    for rid, rows in sides.items():
        if len(rows) != 2:
            stats.responses_unpaired += 1
            continue
        by_side = {}
        ok = True
        for row, line_no in rows:
            try:
                iv = int(float(row["Intervention"]))
                counts, cs, lh = _parse_side(row)
                saved = int(float(row["Saved"]))
            except (ValueError, KeyError):
                stats.rows_bad_values += 1
                stats.bad_value_lines.append(line_no)
                ok = False
                break
            by_side[iv] = (row, counts, cs, lh, saved)
        if not ok or set(by_side) != {0, 1}:
            if ok:
                stats.responses_unpaired += 1
            continue
        int_row, int_counts, int_cs, int_lh, int_saved = by_side[1]
        _, noint_counts, noint_cs, noint_lh, _ = by_side[0]
        pairs.append(
            MMScenarioPair(
                response_id=rid,
                user_id=int_row["UserID"],
                int_counts=int_counts,
                noint_counts=noint_counts,
                int_crossing_signal=int_cs,
                int_left_hand=int_lh,
                noint_crossing_signal=noint_cs,
                noint_left_hand=noint_lh,
                intervened=1 if int_saved == 1 else 0,
            )
        )

    if limit is not None and len(pairs) > limit:
        keyed = sorted(
            pairs, key=lambda p: hashlib.sha256(p.response_id.encode()).hexdigest()
        )
        stats.pairs_dropped_by_limit = len(pairs) - limit
        kept_ids = {id(p) for p in keyed[:limit]}
        pairs = [p for p in pairs if id(p) in kept_ids]  # preserve file order

    stats.pairs_kept = len(pairs)
    return pairs, mm_side_schema(), stats


def _side_indices(counts, cs, lh) -> list[int]:
    return list(counts) + [cs, lh]


def mm_pairs_to_dataset(pairs: list[MMScenarioPair], stats: MMLoadStats | None = None) -> ChoiceDataset:
    """Pairwise dataset: option A = intervention side, target = Intervened."""
    schema = mm_side_schema()
    a = np.array(
        [_side_indices(p.int_counts, p.int_crossing_signal, p.int_left_hand) for p in pairs],
        dtype=np.int64,
    ).reshape(len(pairs), schema.m)
    b = np.array(
        [_side_indices(p.noint_counts, p.noint_crossing_signal, p.noint_left_hand) for p in pairs],
        dtype=np.int64,
    ).reshape(len(pairs), schema.m)
    y = np.array([p.intervened for p in pairs], dtype=np.int64)
    meta = {"source": "moral_machine", "numeric_width": 42}
    if stats is not None:
        meta["load_stats"] = stats.to_json()
    if schema.width != 276:
        # the derived one-hot width is recorded, not forced to any other value
        meta["one_hot_width"] = schema.width
    return ChoiceDataset(
        schema=schema, pairing="pairwise", y=y, a=a, b=b,
        users=[p.user_id for p in pairs], meta=meta,
    )


def mm_numeric_matrix(dataset: ChoiceDataset) -> np.ndarray:
    """The 42-feature numeric scenario vector, intervention side first.

    CrossingSignal and LeftHand appear once, taken from the intervention side.
    """
    if dataset.schema != mm_side_schema():
        raise DataError("dataset does not use the Moral Machine side schema")
    a = dataset.schema.numeric_from_indices(dataset.a)
    b = dataset.schema.numeric_from_indices(dataset.b)
    n_counts = len(AGENT_COLUMNS)
    return np.hstack([a[:, :n_counts], b[:, :n_counts], a[:, n_counts:]])
