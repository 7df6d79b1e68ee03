"""Parameter update rules. Frozen parameters are skipped; a per-parameter
lr_scale supports reduced fine-tuning rates."""

import numpy as np

from .layers import Parameter


class SGD:
    def __init__(self, params: list[Parameter], lr: float = 1e-3):
        self.params = list(params)
        self.lr = lr

    def step(self) -> None:
        for p in self.params:
            if p.trainable:
                p.value = p.value - self.lr * p.lr_scale * p.grad
            p.zero_grad()


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: list[Parameter], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p.value) for p in self.params]
        self._v = [np.zeros_like(p.value) for p in self.params]

    def step(self) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            if p.trainable:
                self._m[i] = self.beta1 * self._m[i] + (1.0 - self.beta1) * p.grad
                self._v[i] = self.beta2 * self._v[i] + (1.0 - self.beta2) * p.grad * p.grad
                m_hat = self._m[i] / b1t
                v_hat = self._v[i] / b2t
                p.value = p.value - self.lr * p.lr_scale * m_hat / (np.sqrt(v_hat) + self.eps)
            p.zero_grad()
