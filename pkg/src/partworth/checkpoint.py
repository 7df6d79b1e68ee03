"""Versioned JSON checkpoints for every model kind.

A checkpoint stores the estimator's hyperparameters, its fitted arrays
(layer specs + parameter values + running statistics), and the resolved
experiment config that produced it, so evaluation and reporting commands can
run from the file alone.
"""

import json

import numpy as np

from .autoencoder import ItemAutoencoder
from .errors import DataError, ValidationError
from .linear import LinearConjoint, PartworthTable
from .nn.layers import Dense, LayerSpec, Network, network_from_specs
from .residual import ResidualChoiceNet
from .schema import AttributeSchema
from .ssl import SSLChoiceNet

CHECKPOINT_FORMAT = "prefmodel"
CHECKPOINT_VERSION = 1


def _net_to_json(net: Network) -> dict:
    return {
        "specs": [{"kind": s.kind, "in_dim": s.in_dim, "out_dim": s.out_dim, "bias": s.bias}
                  for s in net.specs()],
        "state": {k: v.tolist() for k, v in net.state_dict().items()},
        "name": net.name,
    }


def _net_from_json(obj: dict) -> Network:
    specs = [LayerSpec(**s) for s in obj["specs"]]
    net = network_from_specs(specs, rng=None, name=obj.get("name", "net"))
    net.load_state_dict({k: np.asarray(v) for k, v in obj["state"].items()})
    return net


def _dense_to_json(layer: Dense) -> dict:
    return _net_to_json(Network([layer], name="head"))


def _dense_from_json(obj: dict) -> Dense:
    return _net_from_json(obj).layers[0]


def _conjoint_state(model: LinearConjoint) -> dict:
    return {
        "params": {k: v for k, v in model.get_params().items() if k != "schema"},
        "schema": model.schema.to_json(),
        "partworths": model.partworths_.to_json(),
        "link": model.link_,
        "fit_report": model.fit_report_,
    }


def _conjoint_load(state: dict) -> LinearConjoint:
    model = LinearConjoint(schema=AttributeSchema.from_json(state["schema"]), **state["params"])
    model.partworths_ = PartworthTable.from_json(state["partworths"])
    model.partworths_effects_ = model.partworths_.effects_code()
    model.link_ = state["link"]
    model.fit_report_ = state["fit_report"]
    model.classes_ = np.array([0, 1])
    return model


def _ae_state(model: ItemAutoencoder) -> dict:
    state = {
        "params": model.get_params(),
        "input_dim": model.input_dim_,
        "trunk": _net_to_json(model.trunk_),
        "mu_head": _dense_to_json(model.mu_head_),
        "decoder": _net_to_json(model.decoder_),
    }
    if model.logvar_head_ is not None:
        state["logvar_head"] = _dense_to_json(model.logvar_head_)
    return state


def _ae_load(state: dict) -> ItemAutoencoder:
    params = dict(state["params"])
    params["hidden_dims"] = tuple(params["hidden_dims"])
    model = ItemAutoencoder(**params)
    model.input_dim_ = state["input_dim"]
    model.trunk_ = _net_from_json(state["trunk"])
    model.mu_head_ = _dense_from_json(state["mu_head"])
    model.logvar_head_ = (
        _dense_from_json(state["logvar_head"]) if "logvar_head" in state else None
    )
    model.decoder_ = _net_from_json(state["decoder"])
    return model


def _ssl_state(model: SSLChoiceNet) -> dict:
    params = {k: v for k, v in model.get_params().items() if k != "encoder"}
    return {
        "params": params,
        "input_dim": model.input_dim_,
        "latent_dim": model.latent_dim_,
        "encoder_net": _net_to_json(model.encoder_net_),
        "classifier": _net_to_json(model.classifier_),
    }


def _ssl_load(state: dict) -> SSLChoiceNet:
    params = dict(state["params"])
    params["classifier_hidden"] = tuple(params["classifier_hidden"])
    model = SSLChoiceNet(encoder=None, **params)
    model.input_dim_ = state["input_dim"]
    model.latent_dim_ = state["latent_dim"]
    model.encoder_net_ = _net_from_json(state["encoder_net"])
    model.classifier_ = _net_from_json(state["classifier"])
    model.classes_ = np.array([0, 1])
    return model


def _residual_state(model: ResidualChoiceNet) -> dict:
    return {
        "params": {k: v for k, v in model.get_params().items() if k != "schema"},
        "schema": None if model.schema is None else model.schema.to_json(),
        "width": model.width_,
        "linear": _dense_to_json(model.linear_),
        "residual": _net_to_json(model.residual_),
    }


def _residual_load(state: dict) -> ResidualChoiceNet:
    schema = None if state["schema"] is None else AttributeSchema.from_json(state["schema"])
    model = ResidualChoiceNet(schema=schema, **state["params"])
    model.width_ = state["width"]
    model.linear_ = _dense_from_json(state["linear"])
    model.residual_ = _net_from_json(state["residual"])
    model.classes_ = np.array([0, 1])
    return model


_KINDS = {
    LinearConjoint: ("conjoint", _conjoint_state),
    ItemAutoencoder: ("autoencoder", _ae_state),
    SSLChoiceNet: ("ssl", _ssl_state),
    ResidualChoiceNet: ("residual", _residual_state),
}
_LOADERS = {
    "conjoint": _conjoint_load,
    "autoencoder": _ae_load,
    "ssl": _ssl_load,
    "residual": _residual_load,
}


def save_checkpoint(model, path, config: dict | None = None) -> None:
    for cls, (kind, dump) in _KINDS.items():
        if isinstance(model, cls):
            payload = {
                "format": CHECKPOINT_FORMAT,
                "version": CHECKPOINT_VERSION,
                "kind": kind,
                "config": config,
                "state": dump(model),
            }
            with open(path, "w") as fh:
                json.dump(payload, fh, sort_keys=True)
            return
    raise ValidationError(f"cannot checkpoint object of type {type(model).__name__}")


def load_checkpoint(path):
    """Returns (model, kind, config)."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"checkpoint not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint is not valid JSON: {path}: {exc}") from None
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {payload.get('version')}")
    kind = payload["kind"]
    if kind not in _LOADERS:
        raise DataError(f"unknown checkpoint kind {kind!r}")
    return _LOADERS[kind](payload["state"]), kind, payload.get("config")
