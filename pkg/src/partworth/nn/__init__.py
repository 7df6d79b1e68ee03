from .gradcheck import grad_check
from .layers import (
    BatchNorm,
    Dense,
    Layer,
    LayerSpec,
    Network,
    Parameter,
    ReLU,
    Sigmoid,
    glorot_uniform,
    layer_from_spec,
    network_from_specs,
    stable_sigmoid,
)
from .losses import bce_loss, kl_standard_normal, recon_loss
from .optim import SGD, Adam

__all__ = [
    "Adam",
    "BatchNorm",
    "Dense",
    "Layer",
    "LayerSpec",
    "Network",
    "Parameter",
    "ReLU",
    "SGD",
    "Sigmoid",
    "bce_loss",
    "glorot_uniform",
    "grad_check",
    "kl_standard_normal",
    "layer_from_spec",
    "network_from_specs",
    "recon_loss",
    "stable_sigmoid",
]
