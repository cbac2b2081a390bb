"""Adam optimizer over named parameter/gradient array pairs."""

from __future__ import annotations

import numpy as np


class Adam:
    """Bias-corrected Adam; updates parameter arrays in place.

    Moment slots are keyed by parameter name, so the same optimizer instance
    must always be stepped with the same parameter list (the usual single
    training loop).
    """

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, parameters) -> None:
        """One update from accumulated gradients.

        ``parameters`` is a list of (name, value, grad) with matching shapes.
        """
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, value, grad in parameters:
            if value.shape != grad.shape:
                raise ValueError(f"{name}: value shape {value.shape} != grad shape {grad.shape}")
            if name not in self.m:
                self.m[name] = np.zeros_like(value)
                self.v[name] = np.zeros_like(value)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            value -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
