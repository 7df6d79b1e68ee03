"""Residual utility network: total utility = linear partworth utility plus a
one-hidden-layer non-linear correction, trained jointly.

The linear path is a bias-free dense map from the item vector to a scalar, so
its weights read directly as a partworth table when inputs are one-hot. The
residual path is Dense -> ReLU -> Dense(1) with its output layer initialised
to zero, so training starts from the pure linear model. Pairwise data is
scored with sigmoid(H(x_A) - H(x_B)); accept/reject data with sigmoid(H(x)).
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import NumericError, ValidationError
from .linear import PartworthTable
from .metrics import accuracy
from .nn.layers import Dense, Network, ReLU, stable_sigmoid
from .nn.losses import bce_loss
from .nn.optim import Adam
from .reports import EpochRecord, TrainReport
from .validation import as_binary_targets, as_matrix, check_width

PAIRINGS = ("pairwise", "single")


@dataclass
class UtilityDecomposition:
    """Per-item utilities: total is the exact float sum of the two paths."""

    total: np.ndarray
    linear: np.ndarray
    residual: np.ndarray


@dataclass
class ResidualDiagnostics:
    n_items: int
    residual_mean_abs: float
    residual_std: float
    residual_min: float
    residual_max: float
    linear_centered_mean_abs: float
    residual_share: float
    top_items: list[dict]

    def to_json(self) -> dict:
        return {
            "n_items": self.n_items,
            "residual_mean_abs": self.residual_mean_abs,
            "residual_std": self.residual_std,
            "residual_min": self.residual_min,
            "residual_max": self.residual_max,
            "linear_centered_mean_abs": self.linear_centered_mean_abs,
            "residual_share": self.residual_share,
            "top_items": self.top_items,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


class ResidualChoiceNet(BaseEstimator, ClassifierMixin):
    """Joint linear + non-linear utility model.

    With ``pairing="pairwise"`` X is (n, 2*width) one-hot pairs [x_A | x_B];
    with ``pairing="single"`` X is (n, width) item vectors (one-hot or raw
    numeric features). ``schema`` is required to report partworths and is
    only meaningful for one-hot inputs.

    ``l2_residual`` penalises the residual-path dense weights so the
    correction does not absorb signal the linear path can represent.
    """

    def __init__(self, schema=None, hidden_nodes=16, pairing="pairwise",
                 l2_residual=1e-4, lr=1e-3, epochs=100, batch_size=256,
                 val_fraction=0.1, freeze_residual=False, seed=0, verbose=0):
        self.schema = schema
        self.hidden_nodes = hidden_nodes
        self.pairing = pairing
        self.l2_residual = l2_residual
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.val_fraction = val_fraction
        self.freeze_residual = freeze_residual
        self.seed = seed
        self.verbose = verbose

    # ---- assembly ---------------------------------------------------------------

    def _build(self, width: int, rng: np.random.Generator) -> None:
        if self.hidden_nodes < 1:
            raise ValidationError("hidden_nodes must be at least 1")
        if self.pairing not in PAIRINGS:
            raise ValidationError(f"unknown pairing {self.pairing!r}")
        self.width_ = width
        self.linear_ = Dense(width, 1, name="linear", bias=False, init="zeros")
        hidden = Dense(width, self.hidden_nodes, rng=rng, name="res_hidden")
        out = Dense(self.hidden_nodes, 1, name="res_out", init="zeros")
        self.residual_ = Network([hidden, ReLU(self.hidden_nodes), out], name="residual")
        if self.freeze_residual:
            self.residual_.set_trainable(False)

    def _check_items(self, X) -> np.ndarray:
        return check_width(as_matrix(X), self.width_)

    def _check_x(self, X) -> np.ndarray:
        X = as_matrix(X)
        expected = 2 * self.width_ if self.pairing == "pairwise" else self.width_
        if X.shape[1] != expected:
            raise ValidationError(f"X has {X.shape[1]} columns, expected {expected}")
        return X

    # ---- forward/backward ----------------------------------------------------------

    def _h(self, items: np.ndarray, train: bool) -> np.ndarray:
        u = self.linear_.forward(items, train=train)
        f = self.residual_.forward(items, train=train)
        return u + f

    def _h_backward(self, dh: np.ndarray) -> None:
        self.linear_.backward(dh)
        self.residual_.backward(dh)

    def forward_decomposed(self, items) -> UtilityDecomposition:
        """U, f, and their exact sum H for each item row."""
        self._check_fitted()
        items = self._check_items(items)
        u = self.linear_.forward(items, train=False).reshape(-1)
        f = self.residual_.forward(items, train=False).reshape(-1)
        return UtilityDecomposition(total=u + f, linear=u, residual=f)

    def _scores(self, X: np.ndarray, train: bool) -> np.ndarray:
        if self.pairing == "pairwise":
            n = X.shape[0]
            stacked = np.vstack([X[:, : self.width_], X[:, self.width_ :]])
            h = self._h(stacked, train)
            return stable_sigmoid(h[:n] - h[n:])
        return stable_sigmoid(self._h(X, train))

    # ---- training ---------------------------------------------------------------------

    def fit(self, X, y, X_val=None, y_val=None):
        X = as_matrix(X)
        if X.shape[0] == 0:
            raise ValidationError("empty training data")
        rng = np.random.default_rng(self.seed)
        width = X.shape[1] // 2 if self.pairing == "pairwise" else X.shape[1]
        if self.pairing == "pairwise" and X.shape[1] % 2:
            raise ValidationError("pairwise X must have an even column count")
        self._build(width, rng)
        X = self._check_x(X)
        y = as_binary_targets(y, X.shape[0])

        if X_val is None:
            n_val = int(np.floor(self.val_fraction * X.shape[0]))
            perm = rng.permutation(X.shape[0])
            X_val, y_val = X[perm[:n_val]], y[perm[:n_val]]
            X, y = X[perm[n_val:]], y[perm[n_val:]]
        else:
            X_val = self._check_x(X_val)
            y_val = as_binary_targets(y_val, X_val.shape[0])

        res_weights = [p for p in self.residual_.params() if p.name.endswith(".w")]
        params = self.linear_.params() + self.residual_.params()
        opt = Adam(params, lr=self.lr)
        n = X.shape[0]
        yf = y.astype(np.float64).reshape(-1, 1)
        history: list[EpochRecord] = []
        best = (-np.inf, -1, None)
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            correct = 0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                scores = self._scores(X[idx], train=True)
                loss, dscore = bce_loss(scores, yf[idx])
                if not np.isfinite(loss):
                    raise NumericError(f"residual-net loss diverged at epoch {epoch}")
                # chain through the sigmoid, then through the pair difference
                dlogit = dscore * scores * (1.0 - scores)
                if self.pairing == "pairwise":
                    self._h_backward(np.vstack([dlogit, -dlogit]))
                else:
                    self._h_backward(dlogit)
                if not self.freeze_residual:
                    for p in res_weights:
                        p.grad += 2.0 * self.l2_residual * p.value
                opt.step()
                epoch_loss += loss * idx.shape[0]
                correct += int(((scores >= 0.5).astype(np.int64) == yf[idx]).sum())
            train_loss = epoch_loss / n
            train_acc = correct / n
            val_acc = None
            if X_val.shape[0]:
                val_preds = (self._scores(X_val, train=False) >= 0.5).astype(np.int64).reshape(-1)
                val_acc = accuracy(val_preds, y_val)
            history.append(EpochRecord(epoch=epoch, train_loss=train_loss,
                                       train_acc=train_acc, val_acc=val_acc))
            select = val_acc if val_acc is not None else train_acc
            if select > best[0]:  # ties keep the earlier epoch
                best = (select, epoch, self._snapshot())
            if self.verbose:
                print(f"epoch {epoch}: loss {train_loss:.5f} train_acc {train_acc:.4f} "
                      f"val_acc {val_acc}")

        if best[2] is not None:
            self._restore(best[2])
        self.classes_ = np.array([0, 1])
        self.report_ = TrainReport(
            model_type="residual",
            seed=self.seed,
            history=history,
            best_epoch=best[1] if best[1] >= 0 else 0,
            stop_reason="max_epochs",
            extra={"hidden_nodes": self.hidden_nodes, "pairing": self.pairing,
                   "best_val_accuracy": None if best[0] == -np.inf else best[0]},
        )
        return self

    def _snapshot(self) -> dict:
        return {"linear": {p.name: p.value.copy() for p in self.linear_.params()},
                "residual": self.residual_.state_dict()}

    def _restore(self, state: dict) -> None:
        for p in self.linear_.params():
            p.value = state["linear"][p.name].copy()
        self.residual_.load_state_dict(state["residual"])

    # ---- reporting ------------------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "linear_"):
            raise ValidationError("ResidualChoiceNet is not fitted")

    def extract_partworths(self) -> PartworthTable:
        """The linear path's weights as an effects-coded partworth table."""
        self._check_fitted()
        if self.schema is None:
            raise ValidationError("partworth extraction requires a schema (one-hot inputs)")
        if self.schema.width != self.width_:
            raise ValidationError(
                f"schema width {self.schema.width} does not match model width {self.width_}"
            )
        raw = PartworthTable(self.schema, self.linear_.w.value.reshape(-1))
        return raw.effects_code()

    def _centered_linear(self, items: np.ndarray) -> np.ndarray:
        """Linear utilities with per-attribute constants removed when a schema
        is available, else centered over the provided items."""
        if self.schema is not None and self.schema.width == self.width_:
            return self.extract_partworths().utility(items)
        u = self.linear_.forward(items, train=False).reshape(-1)
        return u - u.mean()

    def diagnostics(self, items, top_n: int = 10, item_ids=None) -> ResidualDiagnostics:
        """Distribution of the non-linear correction over a set of items, and
        its share of the total utility signal."""
        self._check_fitted()
        items = self._check_items(items)
        dec = self.forward_decomposed(items)
        f = dec.residual
        u_centered = self._centered_linear(items)
        mean_abs_f = float(np.abs(f).mean())
        mean_abs_u = float(np.abs(u_centered).mean())
        denom = mean_abs_f + mean_abs_u
        share = 0.0 if denom == 0.0 else mean_abs_f / denom
        order = np.argsort(-np.abs(f), kind="stable")[:top_n]
        ids = item_ids if item_ids is not None else list(range(items.shape[0]))
        top = [
            {"item_id": ids[i], "U": float(dec.linear[i]), "f": float(f[i]),
             "H": float(dec.total[i])}
            for i in map(int, order)
        ]
        return ResidualDiagnostics(
            n_items=items.shape[0],
            residual_mean_abs=mean_abs_f,
            residual_std=float(f.std()),
            residual_min=float(f.min()),
            residual_max=float(f.max()),
            linear_centered_mean_abs=mean_abs_u,
            residual_share=float(share),
            top_items=top,
        )

    def export_decomposition_csv(self, items, path, item_ids=None) -> None:
        """CSV of per-item utilities: item_id, U, f, H."""
        import csv

        items = self._check_items(items)
        dec = self.forward_decomposed(items)
        ids = item_ids if item_ids is not None else list(range(items.shape[0]))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["item_id", "U", "f", "H"])
            for i in range(items.shape[0]):
                writer.writerow([ids[i], repr(float(dec.linear[i])),
                                 repr(float(dec.residual[i])), repr(float(dec.total[i]))])

    # ---- prediction ---------------------------------------------------------------------

    def decision_scores(self, X) -> np.ndarray:
        self._check_fitted()
        return self._scores(self._check_x(X), train=False).reshape(-1)

    def predict_proba(self, X) -> np.ndarray:
        p = self.decision_scores(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_scores(X) >= 0.5).astype(np.int64)
