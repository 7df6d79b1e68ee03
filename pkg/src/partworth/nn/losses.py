"""Scalar losses and their gradients with respect to the predictions."""

import numpy as np

from ..errors import ValidationError
from ..validation import as_matrix, check_same_shape

BCE_EPS = 1e-7
RECON_KINDS = ("bce", "l1", "l2")


def bce_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross entropy over all elements; targets must be 0/1.

    Predictions are clamped to [1e-7, 1-1e-7] before the log; the returned
    gradient is exactly the derivative of the clamped loss (zero where the
    clamp is active).
    """
    pred = as_matrix(pred, "pred")
    target = as_matrix(target, "target")
    check_same_shape(pred, target, "pred/target")
    if target.size and not np.all((target == 0.0) | (target == 1.0)):
        raise ValidationError("bce targets must be exactly 0 or 1")
    p = np.clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    n = p.size
    loss = float(-(target * np.log(p) + (1.0 - target) * np.log1p(-p)).sum() / n)
    inside = (pred > BCE_EPS) & (pred < 1.0 - BCE_EPS)
    grad = (p - target) / (p * (1.0 - p)) / n * inside
    return loss, grad


def recon_loss(x: np.ndarray, x_recon: np.ndarray, kind: str = "bce") -> tuple[float, np.ndarray]:
    """Mean-per-element reconstruction distance; gradient is w.r.t. x_recon."""
    x = as_matrix(x, "x")
    x_recon = as_matrix(x_recon, "x_recon")
    check_same_shape(x, x_recon, "x/x_recon")
    if kind == "l2":
        diff = x_recon - x
        return float((diff * diff).mean()), 2.0 * diff / diff.size
    if kind == "l1":
        diff = x_recon - x
        return float(np.abs(diff).mean()), np.sign(diff) / diff.size
    if kind == "bce":
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise ValidationError("bce reconstruction expects targets in [0, 1]")
        p = np.clip(x_recon, BCE_EPS, 1.0 - BCE_EPS)
        n = p.size
        loss = float(-(x * np.log(p) + (1.0 - x) * np.log1p(-p)).sum() / n)
        inside = (x_recon > BCE_EPS) & (x_recon < 1.0 - BCE_EPS)
        grad = (p - x) / (p * (1.0 - p)) / n * inside
        return loss, grad
    raise ValidationError(f"unknown reconstruction loss {kind!r}, expected one of {RECON_KINDS}")


def kl_standard_normal(mu: np.ndarray, logvar: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """KL(N(mu, exp(logvar)) || N(0, 1)), summed per sample, averaged over the batch."""
    mu = as_matrix(mu, "mu")
    logvar = as_matrix(logvar, "logvar")
    check_same_shape(mu, logvar, "mu/logvar")
    n = mu.shape[0]
    per_sample = -0.5 * (1.0 + logvar - mu * mu - np.exp(logvar)).sum(axis=1)
    loss = float(per_sample.sum() / n)
    dmu = mu / n
    dlogvar = 0.5 * (np.exp(logvar) - 1.0) / n
    return loss, dmu, dlogvar
