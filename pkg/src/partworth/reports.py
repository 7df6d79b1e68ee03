"""Training reports, comparison tables, and plot-data export."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .metrics import MetricSet

CURVE_COLUMNS = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "checkpoint", "test_acc"]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float | None = None
    val_loss: float | None = None
    val_acc: float | None = None

    def to_json(self) -> dict:
        return {"epoch": self.epoch, "train_loss": self.train_loss,
                "train_acc": self.train_acc, "val_loss": self.val_loss,
                "val_acc": self.val_acc}

    @classmethod
    def from_json(cls, obj: dict) -> "EpochRecord":
        return cls(**obj)


@dataclass
class TrainReport:
    """Per-epoch history plus the chosen checkpoint and final test metrics.

    Raw test scores and targets are retained so threshold metrics can be
    recomputed from the report alone.
    """

    model_type: str
    seed: int
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = "max_epochs"
    test: MetricSet | None = None
    test_scores: list[float] | None = None
    test_targets: list[int] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_epochs(self) -> int:
        return len(self.history)

    def to_json(self) -> dict:
        return {
            "model_type": self.model_type,
            "seed": self.seed,
            "history": [h.to_json() for h in self.history],
            "best_epoch": self.best_epoch,
            "stop_reason": self.stop_reason,
            "test": None if self.test is None else self.test.to_json(),
            "test_scores": self.test_scores,
            "test_targets": self.test_targets,
            "extra": self.extra,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def from_json(cls, obj: dict) -> "TrainReport":
        test = obj.get("test")
        return cls(
            model_type=obj["model_type"],
            seed=obj["seed"],
            history=[EpochRecord.from_json(h) for h in obj["history"]],
            best_epoch=obj["best_epoch"],
            stop_reason=obj["stop_reason"],
            test=None if test is None else MetricSet(**test),
            test_scores=obj.get("test_scores"),
            test_targets=obj.get("test_targets"),
            extra=obj.get("extra", {}),
        )

    @classmethod
    def load(cls, path) -> "TrainReport":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def compare_table(reports: list[TrainReport], out_csv=None, out_txt=None) -> list[dict]:
    """Model-by-metric rows in the order the reports were given."""
    if not reports:
        raise ValidationError("compare_table needs at least one report")
    rows = []
    for r in reports:
        if r.test is None:
            raise ValidationError(f"report for {r.model_type} has no test metrics")
        rows.append({"ModelType": r.model_type,
                     "Accuracy": round(r.test.accuracy, 4),
                     "AUC": round(r.test.auc, 4)})
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["ModelType", "Accuracy", "AUC"])
            writer.writeheader()
            writer.writerows(rows)
    text = format_compare_text(rows)
    if out_txt is not None:
        with open(out_txt, "w") as fh:
            fh.write(text)
    return rows


def format_compare_text(rows: list[dict]) -> str:
    name_w = max(len("Model Type"), *(len(r["ModelType"]) for r in rows))
    lines = [f"{'Model Type':<{name_w}}  Accuracy  AUC"]
    for r in rows:
        lines.append(f"{r['ModelType']:<{name_w}}  {r['Accuracy']:<8.3f}  {r['AUC']:.3f}")
    return "\n".join(lines) + "\n"


def export_curves(report: TrainReport, path) -> None:
    """Per-epoch CSV for external plotting; the checkpoint epoch is flagged
    once in the ``checkpoint`` column and carries the test accuracy."""
    if not report.history:
        raise ValidationError("report has no epoch history")

    def fmt(v):
        return "" if v is None else repr(float(v))

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for h in report.history:
            is_ckpt = int(h.epoch == report.best_epoch)
            test_acc = ""
            if is_ckpt and report.test is not None:
                test_acc = repr(float(report.test.accuracy))
            writer.writerow([h.epoch, fmt(h.train_loss), fmt(h.train_acc),
                             fmt(h.val_loss), fmt(h.val_acc), is_ckpt, test_acc])
