"""Gradient-check adapters for the standard verification battery.

Each target freezes its stochasticity (noise draw, dropout mask, data) at
construction so repeated loss evaluations are comparable, and exposes the
signs of kink-critical quantities (MAE residuals, SELU pre-activations,
log-variance clamp margins) so the checker can exclude parameters whose
perturbation crosses a non-smooth point.
"""

from __future__ import annotations

import numpy as np

from .mapper import PoseMapper
from .nn import Dense, GRUStack, mae, mae_grad
from .vae import TrajectoryVAE, LOGVAR_CLIP


class DenseMaeTarget:
    """A single dense layer under MAE against fixed random targets."""

    def __init__(self, in_size: int = 6, out_size: int = 4, batch: int = 5, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.layer = Dense(in_size, out_size, rng)
        self.x = rng.standard_normal((batch, in_size))
        self.y = rng.standard_normal((batch, out_size))

    def parameters(self):
        return self.layer.parameters("dense.")

    def loss(self) -> float:
        out, _ = self.layer.forward(self.x)
        return mae(out, self.y)

    def loss_and_grads(self) -> float:
        out, cache = self.layer.forward(self.x)
        self.layer.backward(mae_grad(out, self.y), cache)
        return mae(out, self.y)

    def kink_signs(self) -> np.ndarray:
        out, _ = self.layer.forward(self.x)
        return np.sign(out - self.y).reshape(-1)


class GruStackTarget:
    """A 2-layer GRU unrolled over 2 steps, MAE over all hidden outputs."""

    def __init__(
        self,
        in_size: int = 5,
        hidden_size: int = 7,
        layers: int = 2,
        steps: int = 2,
        batch: int = 4,
        seed: int = 0,
    ):
        rng = np.random.default_rng(seed)
        self.stack = GRUStack(in_size, hidden_size, layers, rng)
        self.x = rng.standard_normal((batch, steps, in_size))
        self.y = rng.standard_normal((batch, steps, hidden_size))

    def parameters(self):
        return self.stack.parameters("gru.")

    def _forward(self):
        h, caches = self.stack.forward(self.x)
        return h, caches

    def loss(self) -> float:
        h, _ = self._forward()
        return mae(h, self.y)

    def loss_and_grads(self) -> float:
        h, caches = self._forward()
        self.stack.backward(mae_grad(h, self.y), caches)
        return mae(h, self.y)

    def kink_signs(self) -> np.ndarray:
        h, _ = self._forward()
        return np.sign(h - self.y).reshape(-1)


class VaeLossTarget:
    """Full VAE loss (reconstruction + beta * KL) with frozen noise."""

    def __init__(self, batch: int = 3, seed: int = 0, beta: float = 0.1):
        rng = np.random.default_rng(seed)
        self.vae = TrajectoryVAE(beta_mode="constant", beta_max=beta, seed=seed).initialize(rng)
        angles = rng.uniform(-170.0, 170.0, size=(batch, 2, 7))
        rad = np.deg2rad(angles)
        self.x = np.empty((batch, 2, 14))
        self.x[..., 0::2] = np.cos(rad)
        self.x[..., 1::2] = np.sin(rad)
        self.eps = rng.standard_normal((batch, self.vae.latent_size))
        self.beta = beta

    def parameters(self):
        return self.vae.parameters()

    def loss(self) -> float:
        total, _, _ = self.vae.loss_terms(self.x, epoch=0, eps=self.eps)
        return total

    def loss_and_grads(self) -> float:
        total, _, _ = self.vae._forward_backward(self.x, self.beta, self.eps)
        return total

    def kink_signs(self) -> np.ndarray:
        mu, logvar, logvar_raw, _ = self.vae._encode_forward(self.x)
        z = mu + np.exp(0.5 * logvar) * self.eps
        recon, _ = self.vae._decode_forward(z)
        return np.concatenate(
            [
                np.sign(recon - self.x).reshape(-1),
                np.sign(np.abs(logvar_raw) - LOGVAR_CLIP).reshape(-1),
            ]
        )


class MapperLossTarget:
    """Mapper MAE loss with a frozen dropout mask."""

    def __init__(self, batch: int = 6, seed: int = 0, dropout_rate: float = 0.5):
        rng = np.random.default_rng(seed)
        self.mapper = PoseMapper(dropout_rate=dropout_rate, seed=seed).initialize(rng)
        self.x = rng.standard_normal((batch, self.mapper.input_size))
        self.y = rng.standard_normal((batch, self.mapper.output_size))
        drop_size = self.mapper.hidden_sizes[self.mapper.dropout_layer - 1]
        self.mask = (rng.random((batch, drop_size)) >= dropout_rate) / (1.0 - dropout_rate)

    def parameters(self):
        return self.mapper.parameters()

    def _forward(self):
        return self.mapper._forward(self.x, training=True, mask=self.mask)

    def loss(self) -> float:
        out, _ = self._forward()
        return mae(out, self.y)

    def loss_and_grads(self) -> float:
        out, caches = self._forward()
        self.mapper._backward(mae_grad(out, self.y), caches)
        return mae(out, self.y)

    def kink_signs(self) -> np.ndarray:
        out, caches = self._forward()
        signs = [np.sign(out - self.y).reshape(-1)]
        for lin_cache, pre, _ in caches:
            if pre is not None:
                signs.append(np.sign(pre).reshape(-1))
        return np.concatenate(signs)


def standard_battery(seed: int = 0) -> dict:
    """The four-model battery used by the gradcheck command and acceptance."""
    return {
        "dense_mae": DenseMaeTarget(seed=seed),
        "gru_2layer_2step": GruStackTarget(seed=seed),
        "vae_full_loss": VaeLossTarget(seed=seed),
        "mapper_frozen_dropout": MapperLossTarget(seed=seed),
    }
