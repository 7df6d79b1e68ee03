"""Autoencoders over one-hot survey items.

The encoder mirrors the decoder: each encoder hidden layer is Dense ->
BatchNorm -> ReLU, the latent projection is a plain Dense (two heads mu /
logvar for the variational variant), and the decoder walks the hidden widths
in reverse with Dense -> ReLU blocks and a Dense -> Sigmoid output head, so
reconstructions live in (0, 1).

Training minimises the reconstruction distance (element-wise binary cross
entropy by default, since inputs are one-hot; L1/L2 selectable) plus, for the
variational variant, kl_weight times the KL divergence of the latent code
from a standard normal. The model kept is the one with the best validation
reconstruction loss.
"""

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import NumericError, ValidationError
from .nn.layers import BatchNorm, Dense, Network, ReLU, Sigmoid
from .nn.losses import kl_standard_normal, recon_loss
from .nn.optim import Adam
from .reports import EpochRecord, TrainReport
from .schema import AttributeSchema
from .validation import as_matrix, check_width

VARIANTS = ("ae", "vae")


@dataclass
class LatentCode:
    """Latent representation of a batch; mu/logvar populated for the VAE."""

    z: np.ndarray
    mu: np.ndarray | None = None
    logvar: np.ndarray | None = None


def _build_encoder_trunk(input_dim, hidden_dims, rng) -> Network:
    layers = []
    prev = input_dim
    for h in hidden_dims:
        layers += [Dense(prev, h, rng=rng, name="enc"), BatchNorm(h, name="enc_bn"), ReLU(h)]
        prev = h
    return Network(layers, name="encoder_trunk")


def _build_decoder(latent_dim, hidden_dims, output_dim, rng) -> Network:
    layers = []
    prev = latent_dim
    for h in reversed(list(hidden_dims)):
        layers += [Dense(prev, h, rng=rng, name="dec"), ReLU(h)]
        prev = h
    layers += [Dense(prev, output_dim, rng=rng, name="dec_out"), Sigmoid(output_dim)]
    return Network(layers, name="decoder")


class ItemAutoencoder(BaseEstimator, TransformerMixin):
    """AE/VAE mapping one-hot items to a low-dimensional latent space.

    transform() encodes (deterministically: the VAE returns mu) and
    inverse_transform() decodes. All randomness flows from ``seed``.
    """

    def __init__(self, hidden_dims=(128,), latent_dim=2, variant="ae",
                 recon_kind="bce", kl_weight=1.0, epochs=50, batch_size=128,
                 lr=1e-3, val_fraction=0.1, seed=0, verbose=0):
        self.hidden_dims = hidden_dims
        self.latent_dim = latent_dim
        self.variant = variant
        self.recon_kind = recon_kind
        self.kl_weight = kl_weight
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.val_fraction = val_fraction
        self.seed = seed
        self.verbose = verbose

    # ---- construction -------------------------------------------------------

    def _init_networks(self, input_dim: int, rng: np.random.Generator) -> None:
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.latent_dim >= input_dim:
            raise ValidationError("latent_dim must be smaller than the input width")
        hidden = list(self.hidden_dims)
        trunk_out = hidden[-1] if hidden else input_dim
        self.input_dim_ = input_dim
        self.trunk_ = _build_encoder_trunk(input_dim, hidden, rng)
        if self.variant == "ae":
            self.mu_head_ = Dense(trunk_out, self.latent_dim, rng=rng, name="latent")
            self.logvar_head_ = None
        else:
            self.mu_head_ = Dense(trunk_out, self.latent_dim, rng=rng, name="mu")
            self.logvar_head_ = Dense(trunk_out, self.latent_dim, rng=rng, name="logvar")
        self.decoder_ = _build_decoder(self.latent_dim, hidden, input_dim, rng)

    def _all_params(self):
        params = self.trunk_.params() + self.mu_head_.params()
        if self.logvar_head_ is not None:
            params += self.logvar_head_.params()
        return params + self.decoder_.params()

    # ---- forward/backward ----------------------------------------------------

    def _encode_raw(self, x: np.ndarray, train: bool) -> tuple[np.ndarray, np.ndarray | None]:
        t = self.trunk_.forward(x, train=train)
        mu = self.mu_head_.forward(t, train=train)
        logvar = None
        if self.logvar_head_ is not None:
            logvar = self.logvar_head_.forward(t, train=train)
        return mu, logvar

    def encode(self, X, train: bool = False, eps: np.ndarray | None = None) -> LatentCode:
        """Encode a batch. In train mode the VAE samples z = mu + std * eps."""
        X = check_width(as_matrix(X), self.input_dim_)
        mu, logvar = self._encode_raw(X, train)
        if self.variant == "ae" or not train:
            return LatentCode(z=mu, mu=mu, logvar=logvar)
        if eps is None:
            raise ValidationError("train-mode VAE encoding needs pre-drawn noise")
        z = mu + np.exp(0.5 * logvar) * eps
        return LatentCode(z=z, mu=mu, logvar=logvar)

    def decode(self, Z) -> np.ndarray:
        Z = check_width(as_matrix(Z), self.latent_dim)
        return self.decoder_.forward(Z, train=False)

    def _objective(self, x: np.ndarray, eps: np.ndarray | None, train: bool = True,
                   backprop: bool = True) -> float:
        """Forward + loss (+ backward when requested). Returns the scalar loss."""
        code = self.encode(x, train=train, eps=eps)
        x_recon = self.decoder_.forward(code.z, train=train)
        loss, dyhat = recon_loss(x, x_recon, self.recon_kind)
        if self.variant == "vae":
            kl, dmu_kl, dlogvar_kl = kl_standard_normal(code.mu, code.logvar)
            loss = loss + self.kl_weight * kl
        if not backprop:
            return loss
        dz = self.decoder_.backward(dyhat)
        if self.variant == "ae":
            dtrunk = self.mu_head_.backward(dz)
        else:
            std_eps = np.exp(0.5 * code.logvar) * eps
            dmu = dz + self.kl_weight * dmu_kl
            dlogvar = dz * 0.5 * std_eps + self.kl_weight * dlogvar_kl
            dtrunk = self.mu_head_.backward(dmu) + self.logvar_head_.backward(dlogvar)
        self.trunk_.backward(dtrunk)
        return loss

    # ---- training -------------------------------------------------------------

    def fit(self, X, y=None, X_val=None):
        X = as_matrix(X)
        if X.shape[0] == 0:
            raise ValidationError("empty training data")
        rng = np.random.default_rng(self.seed)
        self._init_networks(X.shape[1], rng)

        if X_val is None:
            n_val = int(np.floor(self.val_fraction * X.shape[0]))
            perm = rng.permutation(X.shape[0])
            X_val = X[perm[:n_val]]
            X = X[perm[n_val:]]
        else:
            X_val = check_width(as_matrix(X_val), X.shape[1])

        params = self._all_params()
        opt = Adam(params, lr=self.lr)
        n = X.shape[0]
        history: list[EpochRecord] = []
        best = (np.inf, -1, None)
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                batch = X[order[start : start + self.batch_size]]
                eps = None
                if self.variant == "vae":
                    eps = rng.standard_normal((batch.shape[0], self.latent_dim))
                loss = self._objective(batch, eps)
                if not np.isfinite(loss):
                    raise NumericError(f"autoencoder loss diverged at epoch {epoch}")
                opt.step()
                epoch_loss += loss * batch.shape[0]
            train_loss = epoch_loss / n
            val_loss = self._val_recon_loss(X_val) if X_val.shape[0] else train_loss
            if not np.isfinite(val_loss):
                raise NumericError(f"validation loss diverged at epoch {epoch}")
            history.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss))
            if val_loss < best[0]:
                best = (val_loss, epoch, self._snapshot())
            if self.verbose:
                print(f"epoch {epoch}: train {train_loss:.5f} val {val_loss:.5f}")

        if best[2] is not None:
            self._restore(best[2])
        improved = sum(
            1 for i in range(1, len(history)) if history[i].val_loss < history[i - 1].val_loss
        )
        self.report_ = TrainReport(
            model_type="autoencoder",
            seed=self.seed,
            history=history,
            best_epoch=best[1] if best[1] >= 0 else 0,
            stop_reason="max_epochs",
            extra={
                "variant": self.variant,
                "recon_kind": self.recon_kind,
                "best_val_recon": best[0] if np.isfinite(best[0]) else None,
                "val_loss_improved_fraction": improved / max(1, len(history) - 1),
            },
        )
        return self

    def _val_recon_loss(self, X_val: np.ndarray) -> float:
        """Inference-mode reconstruction loss (no KL, VAE uses z = mu)."""
        code = self.encode(X_val, train=False)
        x_recon = self.decoder_.forward(code.z, train=False)
        loss, _ = recon_loss(X_val, x_recon, self.recon_kind)
        return loss

    def _snapshot(self) -> dict:
        state = {"trunk": self.trunk_.state_dict(), "decoder": self.decoder_.state_dict(),
                 "mu": {p.name: p.value.copy() for p in self.mu_head_.params()}}
        if self.logvar_head_ is not None:
            state["logvar"] = {p.name: p.value.copy() for p in self.logvar_head_.params()}
        return state

    def _restore(self, state: dict) -> None:
        self.trunk_.load_state_dict(state["trunk"])
        self.decoder_.load_state_dict(state["decoder"])
        for p in self.mu_head_.params():
            p.value = state["mu"][p.name].copy()
        if self.logvar_head_ is not None:
            for p in self.logvar_head_.params():
                p.value = state["logvar"][p.name].copy()

    # ---- sklearn-style surface --------------------------------------------------

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        return self.encode(X, train=False).z

    def inverse_transform(self, Z) -> np.ndarray:
        self._check_fitted()
        return self.decode(Z)

    def reconstruct(self, X) -> np.ndarray:
        return self.inverse_transform(self.transform(X))

    def inference_encoder(self) -> Network:
        """The deterministic encode path (trunk + mu head) as one network."""
        self._check_fitted()
        return Network(self.trunk_.layers + [self.mu_head_], name="encoder")

    def _check_fitted(self):
        if not hasattr(self, "decoder_"):
            raise ValidationError("ItemAutoencoder is not fitted")


def reconstruction_dump(model: ItemAutoencoder, schema: AttributeSchema,
                        x: np.ndarray, path) -> list[dict]:
    """Per-dimension (original, reconstructed) table for one item, grouped by
    attribute block; plot-ready CSV."""
    x = check_width(as_matrix(x), schema.width)
    if x.shape[0] != 1:
        raise ValidationError("reconstruction_dump expects exactly one item row")
    recon = model.reconstruct(x)[0]
    rows = []
    dim = 0
    for i, attr in enumerate(schema.attributes):
        for level in attr.levels:
            rows.append({
                "dim_index": dim,
                "attribute": attr.name,
                "level": level,
                "original": float(x[0, dim]),
                "reconstructed": float(recon[dim]),
            })
            dim += 1
    if path is not None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["dim_index", "attribute", "level", "original", "reconstructed"]
            )
            writer.writeheader()
            writer.writerows(rows)
    return rows
