"""Finite-difference gradient verification.

The checker compares backprop gradients against central differences with
step 1e-5. ``loss_fn(model, batch)`` must run a deterministic train-mode
forward, perform the matching backward so gradients land in the model's
parameters, and return the scalar loss. Any sampling inside the objective
has to be frozen by the caller (pass pre-drawn noise in a closure).
"""

import numpy as np

FD_STEP = 1e-5
REL_FLOOR = 1e-8


def grad_check(model, loss_fn, batch, step: float = FD_STEP) -> float:
    """Return the max relative error between analytic and numeric gradients."""
    params = model.params()
    for p in params:
        p.zero_grad()
    loss_fn(model, batch)
    analytic = [p.grad.copy() for p in params]
    for p in params:
        p.zero_grad()

    worst = 0.0
    for p, a_grad in zip(params, analytic):
        flat = p.value.reshape(-1)
        a_flat = a_grad.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up = loss_fn(model, batch)
            flat[j] = orig - step
            down = loss_fn(model, batch)
            flat[j] = orig
            for q in params:
                q.zero_grad()
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(a_flat[j]), abs(numeric), REL_FLOOR)
            worst = max(worst, abs(a_flat[j] - numeric) / denom)
    return worst
