"""Binary decision metrics: exact accuracy and rank-based AUC."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .validation import as_binary_targets


def accuracy(preds, targets) -> float:
    preds = as_binary_targets(preds, name="preds")
    targets = as_binary_targets(targets, name="targets")
    if preds.shape[0] != targets.shape[0]:
        raise ValidationError("preds and targets have different lengths")
    return float((preds == targets).sum() / targets.shape[0])


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(scores, targets) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie), via average ranks."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    targets = as_binary_targets(targets, name="targets")
    if scores.shape[0] != targets.shape[0]:
        raise ValidationError("scores and targets have different lengths")
    n_pos = int(targets.sum())
    n_neg = targets.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC undefined: targets contain a single class")
    ranks = _average_ranks(scores)
    rank_sum_pos = ranks[targets == 1].sum()
    return float((rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class MetricSet:
    accuracy: float
    auc: float
    n: int

    def to_json(self) -> dict:
        return {"accuracy": self.accuracy, "auc": self.auc, "n": self.n}

    @classmethod
    def from_scores(cls, scores, targets, threshold: float = 0.5) -> "MetricSet":
        scores = np.asarray(scores, dtype=np.float64).reshape(-1)
        preds = (scores >= threshold).astype(np.int64)
        return cls(accuracy=accuracy(preds, targets), auc=auc(scores, targets),
                   n=scores.shape[0])
