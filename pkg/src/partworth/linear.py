"""Traditional choice-based conjoint analysis.

Item utility is the sum of the partworths of its active levels. Partworths
are fitted by penalised logistic maximum likelihood on the utility difference
of the two presented options (binary logit / Bradley-Terry), or on a single
item vector for datasets framed as accept/reject decisions.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import ValidationError
from .nn.layers import stable_sigmoid
from .schema import AttributeSchema
from .validation import as_binary_targets, as_matrix

LINKS = ("auto", "pairwise", "single")
IMPORTANCE_METHODS = ("range", "sum")


@dataclass
class AttributeImportance:
    """Per-attribute importances with normalised shares.

    ``degenerate`` flags the all-zero case, where shares are reported as
    uniform instead of 0/0.
    """

    names: list[str]
    values: np.ndarray
    shares: np.ndarray
    degenerate: bool
    method: str


class PartworthTable:
    """Estimated weight per (attribute, level), indexed exactly like the schema."""

    def __init__(self, schema: AttributeSchema, values: np.ndarray, effects_coded: bool = False):
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.shape[0] != schema.width:
            raise ValidationError(
                f"partworth vector has {values.shape[0]} entries, schema width is {schema.width}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("partworths contain non-finite values")
        self.schema = schema
        self.values = values
        self.effects_coded = effects_coded

    def block_values(self, i: int) -> np.ndarray:
        return self.values[self.schema.block(i)]

    def utility(self, x: np.ndarray) -> np.ndarray:
        """Sum of active-level partworths for each one-hot row."""
        x = as_matrix(x)
        if x.shape[1] != self.schema.width:
            raise ValidationError(
                f"item width {x.shape[1]} does not match schema width {self.schema.width}"
            )
        return x @ self.values

    def utility_indices(self, idx: np.ndarray) -> np.ndarray:
        """Utility from (n, m) level indices without materialising one-hots."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.ndim == 1:
            idx = idx.reshape(1, -1)
        cols = idx + self.schema._offsets[:-1]
        return self.values[cols].sum(axis=1)

    def effects_code(self) -> "PartworthTable":
        """Subtract each attribute's mean level weight (zero-sum per attribute).

        Pairwise utility differences are unchanged, since the per-attribute
        constant appears once on each side.
        """
        out = self.values.copy()
        for i in range(self.schema.m):
            blk = self.schema.block(i)
            out[blk] -= out[blk].mean()
        return PartworthTable(self.schema, out, effects_coded=True)

    def importance(self, method: str = "range") -> AttributeImportance:
        """Attribute importance: level range (max - min) or the literal level sum."""
        if method not in IMPORTANCE_METHODS:
            raise ValidationError(f"unknown importance method {method!r}")
        vals = np.empty(self.schema.m)
        for i in range(self.schema.m):
            blk = self.block_values(i)
            vals[i] = blk.max() - blk.min() if method == "range" else blk.sum()
        total = np.abs(vals).sum()
        degenerate = bool(total == 0.0)
        if degenerate:
            shares = np.full(self.schema.m, 1.0 / self.schema.m)
        else:
            shares = np.abs(vals) / total
        names = [a.name for a in self.schema.attributes]
        return AttributeImportance(names, vals, shares, degenerate, method)

    def best_option(self) -> np.ndarray:
        """Per-attribute argmax level indices; ties go to the lowest index."""
        return np.array(
            [int(np.argmax(self.block_values(i))) for i in range(self.schema.m)],
            dtype=np.int64,
        )

    def best_option_one_hot(self) -> np.ndarray:
        return self.schema.one_hot_indices(self.best_option().reshape(1, -1))[0]

    def rows(self, importance_method: str = "range") -> list[dict]:
        imp = self.importance(importance_method)
        out = []
        for i, a in enumerate(self.schema.attributes):
            for j, level in enumerate(a.levels):
                out.append(
                    {
                        "attribute": a.name,
                        "level": level,
                        "partworth": float(self.block_values(i)[j]),
                        "importance": float(imp.values[i]),
                        "importance_share": float(imp.shares[i]),
                    }
                )
        return out

    def to_csv(self, path, importance_method: str = "range") -> None:
        rows = self.rows(importance_method)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["attribute", "level", "partworth", "importance", "importance_share"]
            )
            writer.writeheader()
            writer.writerows(rows)

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "values": self.values.tolist(),
            "effects_coded": self.effects_coded,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PartworthTable":
        return cls(
            AttributeSchema.from_json(obj["schema"]),
            np.asarray(obj["values"]),
            effects_coded=bool(obj["effects_coded"]),
        )


class LinearConjoint(BaseEstimator, ClassifierMixin):
    """Partworth logit: P(A over B) = sigmoid(U(x_A) - U(x_B)).

    X is either an (n, 2*width) matrix of one-hot pairs [x_A | x_B] with
    ``link="pairwise"``, or an (n, width) matrix with ``link="single"`` for
    accept/reject targets P(y=1) = sigmoid(U(x)). The raw logit weights are
    only identified up to per-attribute shifts, so reported tables are
    effects coded.

    Parameters
    ----------
    schema : AttributeSchema
        Layout of the one-hot item columns.
    l2 : float
        Ridge penalty weight on the raw partworths.
    link : str
        "pairwise", "single", or "auto" (resolved by column count).
    max_iter, tol : L-BFGS stopping controls.
    seed : kept for interface uniformity; the fit itself starts from zeros
        and is deterministic.
    """

    def __init__(self, schema=None, l2=1e-4, link="auto", max_iter=500, tol=1e-10, seed=0):
        self.schema = schema
        self.l2 = l2
        self.link = link
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def _resolve_link(self, n_cols: int) -> str:
        if self.schema is None:
            raise ValidationError("LinearConjoint requires a schema")
        if self.link not in LINKS:
            raise ValidationError(f"unknown link {self.link!r}")
        width = self.schema.width
        if self.link == "auto":
            if n_cols == 2 * width:
                return "pairwise"
            if n_cols == width:
                return "single"
            raise ValidationError(
                f"X has {n_cols} columns; expected {width} (single) or {2 * width} (pairwise)"
            )
        expected = 2 * width if self.link == "pairwise" else width
        if n_cols != expected:
            raise ValidationError(f"X has {n_cols} columns, link {self.link!r} expects {expected}")
        return self.link

    def _features(self, X: np.ndarray, link: str) -> np.ndarray:
        width = self.schema.width
        if link == "pairwise":
            return X[:, :width] - X[:, width:]
        return X

    def fit(self, X, y):
        X = as_matrix(X)
        if X.shape[0] == 0:
            raise ValidationError("empty training data")
        y = as_binary_targets(y, X.shape[0])
        link = self._resolve_link(X.shape[1])
        if np.unique(y).size == 1:
            warnings.warn("all choice targets are identical; fitting anyway", UserWarning)

        feats = self._features(X, link)
        n = feats.shape[0]
        yf = y.astype(np.float64)
        l2 = float(self.l2)

        def objective(w):
            s = feats @ w
            # mean over pairs of -log sigmoid((2y-1) * s), numerically stable
            z = np.where(yf == 1.0, -s, s)
            loss = np.logaddexp(0.0, z).mean() + l2 * (w @ w)
            grad = feats.T @ (stable_sigmoid(s) - yf) / n + 2.0 * l2 * w
            return loss, grad

        res = minimize(
            objective,
            np.zeros(self.schema.width),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iter, "ftol": self.tol, "gtol": 1e-10},
        )
        self.link_ = link
        self.partworths_ = PartworthTable(self.schema, res.x)
        self.partworths_effects_ = self.partworths_.effects_code()
        self.classes_ = np.array([0, 1])
        self.fit_report_ = {
            "converged": bool(res.success),
            "n_iter": int(res.nit),
            "final_loss": float(res.fun),
            "stop_message": str(res.message),
        }
        return self

    def _check_fitted(self):
        if not hasattr(self, "partworths_"):
            raise ValidationError("LinearConjoint is not fitted")

    def decision_function(self, X) -> np.ndarray:
        """Utility difference (pairwise link) or utility (single link)."""
        self._check_fitted()
        X = as_matrix(X)
        self._resolve_link(X.shape[1])
        return self._features(X, self.link_) @ self.partworths_.values

    def predict_proba(self, X) -> np.ndarray:
        p = stable_sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)
