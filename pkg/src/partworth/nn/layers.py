"""Dense layers with explicit forward/backward passes.

All arrays are 2-D float64, rows = samples. Layers cache whatever their
backward pass needs when ``forward(..., train=True)`` is called; inference
forwards are side-effect free (BatchNorm running statistics excepted, which
only move during training).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ProtocolError, ShapeError
from ..validation import as_matrix

KINDS = ("dense", "relu", "sigmoid", "batch_norm")


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable sigmoid with exact complement symmetry.

    Computed so that sigmoid(x) + sigmoid(-x) == 1.0 bit-exactly: the
    negative branch is literally ``1 - positive_branch(|x|)``, and 1 - q is
    exact for q in [0.5, 1] (Sterbenz).
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.exp(-np.abs(x))
    pos = 1.0 / (1.0 + t)
    return np.where(x >= 0, pos, 1.0 - pos)


class Parameter:
    """A learnable array with an accumulated gradient of identical shape."""

    __slots__ = ("value", "grad", "name", "trainable", "lr_scale")

    def __init__(self, value, name: str, trainable: bool = True, lr_scale: float = 1.0):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.name = name
        self.trainable = trainable
        self.lr_scale = lr_scale

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Parameter({self.name}, shape={self.value.shape}, trainable={self.trainable})"


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_dim: int
    out_dim: int
    bias: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ShapeError(f"unknown layer kind {self.kind!r}")
        if self.kind != "dense" and self.in_dim != self.out_dim:
            raise ShapeError(f"{self.kind} layer requires in_dim == out_dim")


class Layer:
    kind = "base"
    in_dim: int
    out_dim: int

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[Parameter]:
        return []

    def buffers(self) -> dict[str, np.ndarray]:
        """Non-learnable state that must survive checkpointing."""
        return {}

    def spec(self) -> LayerSpec:
        bias = getattr(self, "has_bias", True)
        return LayerSpec(self.kind, self.in_dim, self.out_dim, bias)

    def _check_in(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x)
        if x.shape[1] != self.in_dim:
            raise ShapeError(f"{self.kind} expected {self.in_dim} columns, got {x.shape[1]}")
        return x


class Dense(Layer):
    """Affine map y = x W + b."""

    kind = "dense"

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator | None = None,
                 name: str = "dense", bias: bool = True, init: str = "glorot"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.has_bias = bias
        if init == "glorot":
            if rng is None:
                raise ProtocolError("glorot init requires an rng")
            w0 = glorot_uniform(rng, in_dim, out_dim)
        elif init == "zeros":
            w0 = np.zeros((in_dim, out_dim))
        else:
            raise ShapeError(f"unknown init {init!r}")
        self.w = Parameter(w0, f"{name}.w")
        self.b = Parameter(np.zeros(out_dim), f"{name}.b") if bias else None
        self._x: np.ndarray | None = None

    def forward(self, x, train=False):
        x = self._check_in(x)
        self._x = x if train else None
        out = x @ self.w.value
        if self.b is not None:
            out = out + self.b.value
        return out

    def backward(self, grad):
        if self._x is None:
            raise ProtocolError("backward called without a cached train-mode forward")
        self.w.grad += self._x.T @ grad
        if self.b is not None:
            self.b.grad += grad.sum(axis=0)
        return grad @ self.w.value.T

    def params(self):
        return [self.w] if self.b is None else [self.w, self.b]


class ReLU(Layer):
    kind = "relu"

    def __init__(self, dim: int):
        self.in_dim = dim
        self.out_dim = dim
        self._mask: np.ndarray | None = None

    def forward(self, x, train=False):
        x = self._check_in(x)
        mask = x > 0
        self._mask = mask if train else None
        return np.where(mask, x, 0.0)

    def backward(self, grad):
        if self._mask is None:
            raise ProtocolError("backward called without a cached train-mode forward")
        return grad * self._mask


class Sigmoid(Layer):
    kind = "sigmoid"

    def __init__(self, dim: int):
        self.in_dim = dim
        self.out_dim = dim
        self._out: np.ndarray | None = None

    def forward(self, x, train=False):
        x = self._check_in(x)
        out = stable_sigmoid(x)
        self._out = out if train else None
        return out

    def backward(self, grad):
        if self._out is None:
            raise ProtocolError("backward called without a cached train-mode forward")
        return grad * self._out * (1.0 - self._out)


class BatchNorm(Layer):
    """Per-feature batch normalisation with learnable scale and shift.

    Train mode normalises with batch statistics and updates the running
    estimates (momentum 0.1); inference uses the running estimates only, so
    a batch of one row is fine there.
    """

    kind = "batch_norm"

    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5, name: str = "bn"):
        self.in_dim = dim
        self.out_dim = dim
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(np.ones(dim), f"{name}.gamma")
        self.beta = Parameter(np.zeros(dim), f"{name}.beta")
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self._cache: tuple[np.ndarray, np.ndarray] | None = None

    def forward(self, x, train=False):
        x = self._check_in(x)
        if train:
            mean = x.mean(axis=0)
            var = x.var(axis=0)  # biased, matching the backward formula
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean) * inv_std
            self.running_mean = (1.0 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1.0 - self.momentum) * self.running_var + self.momentum * var
            self._cache = (xhat, inv_std)
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = (x - self.running_mean) * inv_std
        return self.gamma.value * xhat + self.beta.value

    def backward(self, grad):
        if self._cache is None:
            raise ProtocolError("backward called without a cached train-mode forward")
        xhat, inv_std = self._cache
        n = grad.shape[0]
        self.gamma.grad += (grad * xhat).sum(axis=0)
        self.beta.grad += grad.sum(axis=0)
        dxhat = grad * self.gamma.value
        # batch-coupled gradient through the shared mean/variance
        return (inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )

    def params(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}


def layer_from_spec(spec: LayerSpec, rng: np.random.Generator | None = None,
                    name: str = "layer") -> Layer:
    if spec.kind == "dense":
        init = "glorot" if rng is not None else "zeros"
        return Dense(spec.in_dim, spec.out_dim, rng=rng, name=name, bias=spec.bias, init=init)
    if spec.kind == "relu":
        return ReLU(spec.in_dim)
    if spec.kind == "sigmoid":
        return Sigmoid(spec.in_dim)
    if spec.kind == "batch_norm":
        return BatchNorm(spec.in_dim, name=name)
    raise ShapeError(f"unknown layer kind {spec.kind!r}")


class Network:
    """An ordered stack of layers with matching adjacent dimensions."""

    def __init__(self, layers: list[Layer], name: str = "net"):
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ShapeError(
                    f"layer {i} ({layers[i].kind}) expects {layers[i].in_dim} inputs "
                    f"but layer {i - 1} emits {layers[i - 1].out_dim}"
                )
        self.layers = list(layers)
        self.name = name

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        out = x
        for i, layer in enumerate(self.layers):
            try:
                out = layer.forward(out, train=train)
            except ShapeError as exc:
                raise ShapeError(f"{self.name} layer {i}: {exc}") from exc
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        out = grad
        for layer in reversed(self.layers):
            out = layer.backward(out)
        return out

    def params(self) -> list[Parameter]:
        out: list[Parameter] = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def zero_grad(self) -> None:
        for p in self.params():
            p.zero_grad()

    def set_trainable(self, flag: bool, lr_scale: float | None = None) -> None:
        for p in self.params():
            p.trainable = flag
            if lr_scale is not None:
                p.lr_scale = lr_scale

    def specs(self) -> list[LayerSpec]:
        return [layer.spec() for layer in self.layers]

    def state_dict(self) -> dict[str, np.ndarray]:
        state: dict[str, np.ndarray] = {}
        for i, layer in enumerate(self.layers):
            for p in layer.params():
                state[f"{i}.{p.name.split('.')[-1]}"] = p.value.copy()
            for key, buf in layer.buffers().items():
                state[f"{i}.{key}"] = buf.copy()
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for i, layer in enumerate(self.layers):
            for p in layer.params():
                key = f"{i}.{p.name.split('.')[-1]}"
                value = np.asarray(state[key], dtype=np.float64)
                if value.shape != p.value.shape:
                    raise ShapeError(f"state {key} has shape {value.shape}, expected {p.value.shape}")
                p.value = value.copy()
                p.grad = np.zeros_like(p.value)
            for key in layer.buffers():
                setattr(layer, key, np.asarray(state[f"{i}.{key}"], dtype=np.float64).copy())


def network_from_specs(specs: list[LayerSpec], rng: np.random.Generator | None = None,
                       name: str = "net") -> Network:
    layers = [layer_from_spec(s, rng=rng, name=f"{name}.{i}") for i, s in enumerate(specs)]
    return Network(layers, name=name)
