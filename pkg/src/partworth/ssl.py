"""Choice classification on pretrained item embeddings.

Each presented option is encoded with a pretrained encoder, the latent codes
are concatenated, and a small fully connected network with a sigmoid head
scores the probability that option A is chosen. The encoder is either frozen
(inference mode, parameters flagged no-update) or fine-tuned jointly at a
reduced learning rate.
"""

import copy

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .autoencoder import ItemAutoencoder
from .errors import NumericError, ValidationError
from .metrics import accuracy
from .nn.layers import Dense, Network, ReLU, Sigmoid
from .nn.losses import bce_loss
from .nn.optim import Adam
from .reports import EpochRecord, TrainReport
from .validation import as_binary_targets, as_matrix

ENCODER_MODES = ("frozen", "finetune")


def _classifier(input_dim: int, hidden: tuple[int, ...], rng) -> Network:
    layers = []
    prev = input_dim
    for h in hidden:
        layers += [Dense(prev, h, rng=rng, name="clf"), ReLU(h)]
        prev = h
    layers += [Dense(prev, 1, rng=rng, name="clf_out"), Sigmoid(1)]
    return Network(layers, name="classifier")


class SSLChoiceNet(BaseEstimator, ClassifierMixin):
    """Semi-supervised choice classifier over encoder embeddings.

    X rows are the concatenated one-hot vectors of the n_options presented
    items, [x_A | x_B | ...]; y=1 means the first option was chosen.

    Parameters
    ----------
    encoder : fitted ItemAutoencoder (its deterministic encode path is copied
        into this model, so the original is never mutated).
    encoder_mode : "frozen" trains only the classifier; "finetune" also
        updates the encoder copy at ``encoder_lr_scale`` times the base rate.
    augment_swap : when True, training also sees every pair with the options
        swapped and the label flipped.
    """

    def __init__(self, encoder=None, classifier_hidden=(64, 32), encoder_mode="frozen",
                 n_options=2, lr=1e-3, encoder_lr_scale=0.1, epochs=100,
                 batch_size=128, val_fraction=0.1, augment_swap=False, seed=0, verbose=0):
        self.encoder = encoder
        self.classifier_hidden = classifier_hidden
        self.encoder_mode = encoder_mode
        self.n_options = n_options
        self.lr = lr
        self.encoder_lr_scale = encoder_lr_scale
        self.epochs = epochs
        self.batch_size = batch_size
        self.val_fraction = val_fraction
        self.augment_swap = augment_swap
        self.seed = seed
        self.verbose = verbose

    # ---- assembly -------------------------------------------------------------

    def _build(self, rng: np.random.Generator) -> None:
        if not isinstance(self.encoder, ItemAutoencoder):
            raise ValidationError("SSLChoiceNet needs a fitted ItemAutoencoder encoder")
        if self.encoder_mode not in ENCODER_MODES:
            raise ValidationError(f"unknown encoder_mode {self.encoder_mode!r}")
        if self.n_options < 2:
            raise ValidationError("n_options must be at least 2")
        self.encoder_net_ = copy.deepcopy(self.encoder.inference_encoder())
        self.input_dim_ = self.encoder_net_.in_dim
        self.latent_dim_ = self.encoder_net_.out_dim
        if self.encoder_mode == "frozen":
            self.encoder_net_.set_trainable(False)
        else:
            self.encoder_net_.set_trainable(True, lr_scale=self.encoder_lr_scale)
        self.classifier_ = _classifier(
            self.n_options * self.latent_dim_, tuple(self.classifier_hidden), rng
        )

    def _check_x(self, X) -> np.ndarray:
        X = as_matrix(X)
        expected = self.n_options * self.input_dim_
        if X.shape[1] != expected:
            raise ValidationError(
                f"X has {X.shape[1]} columns, expected {self.n_options} options "
                f"x {self.input_dim_} = {expected}"
            )
        return X

    def _forward(self, X: np.ndarray, train: bool) -> np.ndarray:
        """Score a batch. Options are row-stacked through the shared encoder so
        one backward pass covers all of them."""
        n = X.shape[0]
        blocks = [X[:, i * self.input_dim_ : (i + 1) * self.input_dim_]
                  for i in range(self.n_options)]
        stacked = np.vstack(blocks)
        encoder_train = train and self.encoder_mode == "finetune"
        z = self.encoder_net_.forward(stacked, train=encoder_train)
        concat = np.hstack([z[i * n : (i + 1) * n] for i in range(self.n_options)])
        return self.classifier_.forward(concat, train=train)

    def _backward(self, dscore: np.ndarray, n: int) -> None:
        dconcat = self.classifier_.backward(dscore)
        if self.encoder_mode == "finetune":
            dz = np.vstack([
                dconcat[:, i * self.latent_dim_ : (i + 1) * self.latent_dim_]
                for i in range(self.n_options)
            ])
            self.encoder_net_.backward(dz)

    # ---- training ---------------------------------------------------------------

    def fit(self, X, y, X_val=None, y_val=None):
        rng = np.random.default_rng(self.seed)
        self._build(rng)
        X = self._check_x(X)
        y = as_binary_targets(y, X.shape[0])
        if X.shape[0] == 0:
            raise ValidationError("empty training data")

        if X_val is None:
            n_val = int(np.floor(self.val_fraction * X.shape[0]))
            perm = rng.permutation(X.shape[0])
            X_val, y_val = X[perm[:n_val]], y[perm[:n_val]]
            X, y = X[perm[n_val:]], y[perm[n_val:]]
        else:
            X_val = self._check_x(X_val)
            y_val = as_binary_targets(y_val, X_val.shape[0])

        if self.augment_swap:
            if self.n_options != 2:
                raise ValidationError("augment_swap is defined for 2 options")
            swapped = np.hstack([X[:, self.input_dim_:], X[:, :self.input_dim_]])
            X = np.vstack([X, swapped])
            y = np.concatenate([y, 1 - y])

        params = self.encoder_net_.params() + self.classifier_.params()
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
                scores = self._forward(X[idx], train=True)
                loss, dscore = bce_loss(scores, yf[idx])
                if not np.isfinite(loss):
                    raise NumericError(f"ssl loss diverged at epoch {epoch}")
                self._backward(dscore, idx.shape[0])
                opt.step()
                epoch_loss += loss * idx.shape[0]
                correct += int(((scores >= 0.5).astype(np.int64) == yf[idx]).sum())
            train_loss = epoch_loss / n
            train_acc = correct / n
            val_acc = None
            if X_val.shape[0]:
                val_preds = (self._forward(X_val, train=False) >= 0.5).astype(np.int64).reshape(-1)
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
            model_type="ssl",
            seed=self.seed,
            history=history,
            best_epoch=best[1] if best[1] >= 0 else 0,
            stop_reason="max_epochs",
            extra={"encoder_mode": self.encoder_mode,
                   "best_val_accuracy": None if best[0] == -np.inf else best[0]},
        )
        return self

    def _snapshot(self) -> dict:
        return {"encoder": self.encoder_net_.state_dict(),
                "classifier": self.classifier_.state_dict()}

    def _restore(self, state: dict) -> None:
        self.encoder_net_.load_state_dict(state["encoder"])
        self.classifier_.load_state_dict(state["classifier"])

    # ---- prediction -----------------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "classifier_"):
            raise ValidationError("SSLChoiceNet is not fitted")

    def decision_scores(self, X) -> np.ndarray:
        self._check_fitted()
        return self._forward(self._check_x(X), train=False).reshape(-1)

    def predict_proba(self, X) -> np.ndarray:
        p = self.decision_scores(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_scores(X) >= 0.5).astype(np.int64)
