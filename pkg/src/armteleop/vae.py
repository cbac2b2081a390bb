"""GRU-based variational autoencoder over 2-step trajectory segments.

The encoder runs both encoded frames through two stacked GRU layers; the
final hidden state feeds two dense heads producing the latent mean and
log-variance.  Sampling uses the reparameterization z = mu + exp(logvar/2) * eps.
The decoder repeats z for both timesteps, runs its own two GRU layers and
maps each step through a shared tanh dense head back to 14 unit values.

Loss is MAE(input, reconstruction) + beta * KL, with beta following a
cyclical sigmoid annealing schedule to keep the KL term from collapsing the
latent space early in training.  Because the reconstruction term is a
per-element mean, the KL sum enters the objective normalized by the input
element count (the usual convention when pairing a dimension-summed KL with
a per-element reconstruction loss); an unnormalized KL sum at beta_max = 0.1
makes discarding all latent information cheaper than encoding it, and the
model collapses at every annealing peak.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, TransformerMixin

from .nn import Adam, Dense, GRUStack, mae, mae_grad
from .nn.checkpoint import load_checkpoint, params_hash, save_checkpoint
from .validation import InvalidInputError, as_float_array, check_fitted, require_finite

LOGVAR_CLIP = 20.0


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""


class LatentDistribution(NamedTuple):
    """Gaussian latent parameters; ``logvar`` is the log of the variance."""

    mu: np.ndarray
    logvar: np.ndarray


def reparameterize(mu: np.ndarray, logvar: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """z = mu + exp(logvar / 2) * eps (caller supplies the noise draw)."""
    return mu + np.exp(0.5 * np.asarray(logvar)) * eps


def kld(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(q || N(0, I)): -0.5 sum(1 + logvar - mu^2 - exp(logvar)).

    Summed over latent dimensions, averaged over the batch.
    """
    mu = np.atleast_2d(np.asarray(mu, dtype=np.float64))
    logvar = np.atleast_2d(np.asarray(logvar, dtype=np.float64))
    per_sample = -0.5 * np.sum(1.0 + logvar - mu**2 - np.exp(logvar), axis=1)
    return float(np.mean(per_sample))


@dataclass(frozen=True)
class AnnealingSchedule:
    """Cyclical sigmoid schedule for the KL weight beta."""

    total_epochs: int
    beta_max: float = 0.1
    cycles: int = 4
    steepness: float = 12.0

    def beta(self, epoch: int) -> float:
        if not 0 <= epoch < self.total_epochs:
            raise InvalidInputError(
                f"epoch {epoch} outside schedule range [0, {self.total_epochs})"
            )
        cycle_length = self.total_epochs / self.cycles
        tau = (epoch % cycle_length) / cycle_length
        return float(self.beta_max * expit(self.steepness * (tau - 0.5)))


def beta_at(schedule: AnnealingSchedule, epoch: int) -> float:
    return schedule.beta(epoch)


class TrajectoryVAE(BaseEstimator, TransformerMixin):
    """Variational autoencoder over (N, 2, 14) segment arrays.

    sklearn-style: ``fit`` trains, ``transform`` returns latent means,
    ``inverse_transform`` decodes latents back to segments.  All
    stochasticity flows through the seeded generator, so a given
    (data, params, seed) triple reproduces the loss history exactly.

    ``beta_mode`` selects the KL weighting: "cyclical" (sigmoid annealing),
    "constant" (beta_max throughout) or "off" (pure autoencoder).
    """

    def __init__(
        self,
        hidden_size: int = 28,
        latent_size: int = 10,
        gru_layers: int = 2,
        frame_size: int = 14,
        epochs: int = 300,
        batch_size: int = 128,
        learning_rate: float = 2e-3,
        beta_max: float = 0.1,
        annealing_cycles: int = 4,
        annealing_steepness: float = 12.0,
        beta_mode: str = "cyclical",
        warmup_epochs: int = 0,
        seed: int = 0,
    ):
        self.hidden_size = hidden_size
        self.latent_size = latent_size
        self.gru_layers = gru_layers
        self.frame_size = frame_size
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta_max = beta_max
        self.annealing_cycles = annealing_cycles
        self.annealing_steepness = annealing_steepness
        self.beta_mode = beta_mode
        self.warmup_epochs = warmup_epochs
        self.seed = seed

    # -- construction -----------------------------------------------------

    def _build(self, rng: np.random.Generator) -> None:
        self.encoder_gru_ = GRUStack(self.frame_size, self.hidden_size, self.gru_layers, rng)
        self.mu_head_ = Dense(self.hidden_size, self.latent_size, rng)
        self.logvar_head_ = Dense(self.hidden_size, self.latent_size, rng)
        self.decoder_gru_ = GRUStack(self.latent_size, self.hidden_size, self.gru_layers, rng)
        self.output_head_ = Dense(self.hidden_size, self.frame_size, rng)

    def parameters(self):
        check_fitted(self, "encoder_gru_")
        return (
            self.encoder_gru_.parameters("enc.")
            + self.mu_head_.parameters("mu.")
            + self.logvar_head_.parameters("logvar.")
            + self.decoder_gru_.parameters("dec.")
            + self.output_head_.parameters("out.")
        )

    def zero_grad(self):
        self.encoder_gru_.zero_grad()
        self.mu_head_.zero_grad()
        self.logvar_head_.zero_grad()
        self.decoder_gru_.zero_grad()
        self.output_head_.zero_grad()

    def initialize(self, rng: np.random.Generator | None = None) -> "TrajectoryVAE":
        """Build untrained weights (used by gradient checks and tests)."""
        self._build(rng or np.random.default_rng(self.seed))
        self.history_ = []
        self.best_val_recon_ = None
        self.best_epoch_ = None
        self.best_state_ = None
        return self

    def beta_schedule(self) -> AnnealingSchedule:
        return AnnealingSchedule(
            total_epochs=self.epochs,
            beta_max=self.beta_max,
            cycles=self.annealing_cycles,
            steepness=self.annealing_steepness,
        )

    def _kl_norm(self) -> float:
        return float(2 * self.frame_size)

    def _beta(self, epoch: int) -> float:
        if self.beta_mode == "cyclical":
            return self.beta_schedule().beta(epoch)
        if self.beta_mode == "constant":
            return self.beta_max
        if self.beta_mode == "off":
            return 0.0
        raise InvalidInputError(f"unknown beta_mode {self.beta_mode!r}")

    # -- forward passes ----------------------------------------------------

    def _check_segments(self, X) -> np.ndarray:
        X = as_float_array(X, "segments", (None, 2, self.frame_size))
        return require_finite(X, "segments")

    def _encode_forward(self, X: np.ndarray):
        h_seq, enc_caches = self.encoder_gru_.forward(X)
        h_last = h_seq[:, -1]
        mu, mu_cache = self.mu_head_.forward(h_last)
        logvar_raw, lv_cache = self.logvar_head_.forward(h_last)
        logvar = np.clip(logvar_raw, -LOGVAR_CLIP, LOGVAR_CLIP)
        return mu, logvar, logvar_raw, (enc_caches, mu_cache, lv_cache)

    def _decode_forward(self, Z: np.ndarray):
        steps = 2
        z_seq = np.repeat(Z[:, None, :], steps, axis=1)
        h_seq, dec_caches = self.decoder_gru_.forward(z_seq)
        pre = np.empty((Z.shape[0], steps, self.frame_size))
        head_caches = []
        for t in range(steps):
            pre[:, t], cache = self.output_head_.forward(h_seq[:, t])
            head_caches.append(cache)
        recon = np.tanh(pre)
        return recon, (dec_caches, head_caches, recon)

    def encode(self, X) -> LatentDistribution:
        """Latent distribution parameters for (N, 2, 14) segments."""
        check_fitted(self, "encoder_gru_")
        X = self._check_segments(X)
        mu, logvar, _, _ = self._encode_forward(X)
        return LatentDistribution(mu=mu, logvar=logvar)

    def transform(self, X) -> np.ndarray:
        """Latent means (the deterministic representation used downstream)."""
        return self.encode(X).mu

    def decode(self, Z) -> np.ndarray:
        """Decode (N, 10) latents to (N, 2, 14) segments in (-1, 1)."""
        check_fitted(self, "encoder_gru_")
        Z = as_float_array(Z, "latents", (None, self.latent_size))
        require_finite(Z, "latents")
        recon, _ = self._decode_forward(Z)
        return recon

    def inverse_transform(self, Z) -> np.ndarray:
        return self.decode(Z)

    # -- loss and training -------------------------------------------------

    def loss_terms(
        self, X, epoch: int = 0, eps: np.ndarray | None = None
    ) -> tuple[float, float, float]:
        """(total, reconstruction, kl) on a batch; eps=None means z = mu."""
        check_fitted(self, "encoder_gru_")
        X = self._check_segments(X)
        if X.shape[0] == 0:
            raise InvalidInputError("empty batch")
        mu, logvar, _, _ = self._encode_forward(X)
        z = mu if eps is None else reparameterize(mu, logvar, eps)
        recon, _ = self._decode_forward(z)
        recon_loss = mae(recon, X)
        kl = kld(mu, logvar)
        beta = self._beta(epoch) if self.epochs > 0 else 0.0
        return recon_loss + beta * kl / self._kl_norm(), recon_loss, kl

    def _forward_backward(self, X: np.ndarray, beta: float, eps: np.ndarray):
        batch = X.shape[0]
        mu, logvar, logvar_raw, (enc_caches, mu_cache, lv_cache) = self._encode_forward(X)
        sigma = np.exp(0.5 * logvar)
        z = mu + sigma * eps
        recon, (dec_caches, head_caches, _) = self._decode_forward(z)

        recon_loss = mae(recon, X)
        kl = kld(mu, logvar)
        kl_weight = beta / self._kl_norm()
        total = recon_loss + kl_weight * kl

        # MAE -> tanh head, shared across the two steps
        d_recon = mae_grad(recon, X)
        d_pre = d_recon * (1.0 - recon**2)
        d_hidden = np.empty((batch, 2, self.hidden_size))
        for t in range(2):
            d_hidden[:, t] = self.output_head_.backward(d_pre[:, t], head_caches[t])
        dz_seq = self.decoder_gru_.backward(d_hidden, dec_caches)
        dz = dz_seq.sum(axis=1)

        # reparameterization plus the KL term's direct gradients
        d_mu = dz + kl_weight * mu / batch
        d_logvar = dz * eps * 0.5 * sigma + kl_weight * 0.5 * (np.exp(logvar) - 1.0) / batch
        clip_mask = (np.abs(logvar_raw) < LOGVAR_CLIP).astype(np.float64)
        d_logvar_raw = d_logvar * clip_mask

        d_last = self.mu_head_.backward(d_mu, mu_cache)
        d_last += self.logvar_head_.backward(d_logvar_raw, lv_cache)
        d_enc = np.zeros((batch, 2, self.hidden_size))
        d_enc[:, -1] = d_last
        self.encoder_gru_.backward(d_enc, enc_caches)
        return total, recon_loss, kl

    def fit(self, X, y=None, X_val=None) -> "TrajectoryVAE":
        """Train on (N, 2, 14) segments; optional held-out set for val MAE."""
        X = self._check_segments(X)
        if X.shape[0] == 0:
            raise InvalidInputError("cannot fit on an empty dataset")
        if X_val is not None:
            X_val = self._check_segments(X_val)
        rng = np.random.default_rng(self.seed)
        self._build(rng)
        optimizer = Adam(lr=self.learning_rate)
        params = self.parameters()
        n = X.shape[0]
        batch_size = min(self.batch_size, n)
        self.history_ = []
        self.best_val_recon_ = None
        self.best_epoch_ = None
        self.best_state_ = None
        for epoch in range(self.epochs):
            started = time.perf_counter()
            beta = self._beta(epoch)
            if self.warmup_epochs > 0:
                # linear learning-rate warmup over the first epochs
                optimizer.lr = self.learning_rate * min(
                    1.0, (epoch + 1) / (self.warmup_epochs + 1)
                )
            order = rng.permutation(n)
            recon_sum = 0.0
            kl_sum = 0.0
            for lo in range(0, n, batch_size):
                idx = order[lo : lo + batch_size]
                xb = X[idx]
                eps = rng.standard_normal((xb.shape[0], self.latent_size))
                self.zero_grad()
                total, recon_loss, kl = self._forward_backward(xb, beta, eps)
                if not np.isfinite(total):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch} (recon={recon_loss}, kl={kl}, beta={beta})"
                    )
                optimizer.step(params)
                recon_sum += recon_loss * xb.shape[0]
                kl_sum += kl * xb.shape[0]
            entry = {
                "epoch": epoch,
                "recon": recon_sum / n,
                "kl": kl_sum / n,
                "beta": beta,
                "wall_ms": (time.perf_counter() - started) * 1e3,
            }
            if X_val is not None and X_val.shape[0] > 0:
                entry["val_recon"] = self.validation_recon(X_val)
                if self.best_val_recon_ is None or entry["val_recon"] < self.best_val_recon_:
                    self.best_val_recon_ = entry["val_recon"]
                    self.best_epoch_ = epoch
                    self.best_state_ = [value.copy() for _, value, _ in params]
            self.history_.append(entry)
        return self

    def restore_best_validation(self) -> "TrajectoryVAE":
        """Load the weights from the best held-out-reconstruction epoch.

        With cyclical annealing the last epoch sits exactly on a beta peak,
        where the KL pressure blurs one of the narrow-range joints; the best
        validation checkpoint (typically late in a low-beta phase) keeps
        every joint.  History is left untouched.
        """
        if self.best_state_ is None:
            raise InvalidInputError("no validation set was supplied during fit")
        for (_, value, _), stored in zip(self.parameters(), self.best_state_):
            value[...] = stored
        return self

    def validation_recon(self, X_val) -> float:
        """Held-out reconstruction MAE with the deterministic z = mu path."""
        X_val = self._check_segments(X_val)
        mu, _, _, _ = self._encode_forward(X_val)
        recon, _ = self._decode_forward(mu)
        return mae(recon, X_val)

    # -- persistence ---------------------------------------------------------

    def architecture(self) -> dict:
        return {
            "input": self.frame_size,
            "hidden": self.hidden_size,
            "layers": self.gru_layers,
            "latent": self.latent_size,
        }

    def save(self, path, config_hash: str = "") -> str:
        check_fitted(self, "encoder_gru_")
        return save_checkpoint(
            path,
            architecture=self.architecture(),
            parameters=self.parameters(),
            config_hash=config_hash,
            extra={"model": "vae", "beta_mode": self.beta_mode, "seed": self.seed},
        )

    def params_digest(self) -> str:
        return params_hash(self.parameters())

    @classmethod
    def from_checkpoint(cls, path) -> "TrajectoryVAE":
        doc = load_checkpoint(path)
        arch = doc["architecture"]
        model = cls(
            hidden_size=arch["hidden"],
            latent_size=arch["latent"],
            gru_layers=arch["layers"],
            frame_size=arch["input"],
        )
        model.initialize(np.random.default_rng(0))
        for name, value, _ in model.parameters():
            if name not in doc["tensors"]:
                raise InvalidInputError(f"checkpoint missing tensor {name!r}")
            stored = doc["tensors"][name]
            if stored.shape != value.shape:
                raise InvalidInputError(
                    f"tensor {name!r}: checkpoint shape {stored.shape} != model {value.shape}"
                )
            value[...] = stored
        model.checkpoint_config_hash_ = doc["config_hash"]
        return model
