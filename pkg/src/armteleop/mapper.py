"""Feed-forward mapping from encoded human arm poses to the VAE latent space.

Architecture: 24 -> 32 -> 40 -> 20 -> output, SELU after each hidden layer,
inverted dropout (rate 0.5) after the second hidden layer's activation, and a
linear output head.  Trained with MAE and Adam.  The same network with an
output size of 14 serves as the direct-regression baseline that predicts
encoded robot angles without the VAE decoder.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .kinematics import HumanArmPose, encode_human_pose
from .nn import Adam, Dense, dropout, mae, mae_grad, selu, selu_grad
from .nn.checkpoint import load_checkpoint, params_hash, save_checkpoint
from .validation import InvalidInputError, as_float_array, check_fitted, require_finite
from .vae import TrainingDivergedError


class PoseMapper(BaseEstimator, RegressorMixin):
    """Regress encoded human poses (N, 24) onto latent targets (N, output_size).

    ``dropout_layer`` counts hidden layers from 1, so the default 2 places the
    dropout after the 40-unit layer's activation.  Dropout is active only
    inside ``fit``; ``predict`` is deterministic.
    """

    def __init__(
        self,
        hidden_sizes: tuple[int, ...] = (32, 40, 20),
        input_size: int = 24,
        output_size: int = 10,
        dropout_rate: float = 0.5,
        dropout_layer: int = 2,
        epochs: int = 500,
        batch_size: int = 256,
        learning_rate: float = 1e-3,
        seed: int = 0,
    ):
        self.hidden_sizes = hidden_sizes
        self.input_size = input_size
        self.output_size = output_size
        self.dropout_rate = dropout_rate
        self.dropout_layer = dropout_layer
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def _build(self, rng: np.random.Generator) -> None:
        sizes = [self.input_size, *self.hidden_sizes, self.output_size]
        self.layers_ = [
            Dense(sizes[i], sizes[i + 1], rng) for i in range(len(sizes) - 1)
        ]

    def initialize(self, rng: np.random.Generator | None = None) -> "PoseMapper":
        self._build(rng or np.random.default_rng(self.seed))
        self.history_ = []
        self.best_val_mae_ = None
        self.best_epoch_ = None
        self.best_state_ = None
        return self

    def parameters(self):
        check_fitted(self, "layers_")
        out = []
        for i, layer in enumerate(self.layers_):
            out.extend(layer.parameters(f"dense{i}."))
        return out

    def zero_grad(self):
        for layer in self.layers_:
            layer.zero_grad()

    def _check_x(self, X) -> np.ndarray:
        X = as_float_array(X, "X", (None, self.input_size))
        return require_finite(X, "X")

    def _forward(
        self,
        X: np.ndarray,
        training: bool = False,
        rng: np.random.Generator | None = None,
        mask: np.ndarray | None = None,
    ):
        """Forward pass; returns (output, caches) for the backward sweep."""
        hidden_count = len(self.layers_) - 1
        h = X
        caches = []
        for i, layer in enumerate(self.layers_):
            pre, lin_cache = layer.forward(h)
            if i < hidden_count:
                act = selu(pre)
                drop_mask = None
                if i + 1 == self.dropout_layer:
                    if mask is not None:
                        act = act * mask
                        drop_mask = mask
                    else:
                        act, drop_mask = dropout(act, self.dropout_rate, training, rng)
                caches.append((lin_cache, pre, drop_mask))
                h = act
            else:
                caches.append((lin_cache, None, None))
                h = pre
        return h, caches

    def _backward(self, d_out: np.ndarray, caches) -> None:
        hidden_count = len(self.layers_) - 1
        grad = d_out
        for i in reversed(range(len(self.layers_))):
            lin_cache, pre, drop_mask = caches[i]
            if i < hidden_count:
                if drop_mask is not None:
                    grad = grad * drop_mask
                grad = grad * selu_grad(pre)
            grad = self.layers_[i].backward(grad, lin_cache)

    def predict(self, X) -> np.ndarray:
        """Deterministic inference (dropout off)."""
        check_fitted(self, "layers_")
        X = self._check_x(X)
        out, _ = self._forward(X, training=False)
        return out

    def map_pose(self, pose: HumanArmPose) -> np.ndarray:
        """Encode one human pose to 24 unit values and map it to a latent."""
        return self.predict(encode_human_pose(pose)[None, :])[0]

    def fit(self, X, y, X_val=None, y_val=None) -> "PoseMapper":
        X = self._check_x(X)
        y = as_float_array(y, "y", (None, self.output_size))
        require_finite(y, "y")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] == 0:
            raise InvalidInputError("cannot fit on an empty dataset")
        if (X_val is None) != (y_val is None):
            raise InvalidInputError("X_val and y_val must be supplied together")
        if X_val is not None:
            X_val = self._check_x(X_val)
            y_val = as_float_array(y_val, "y_val", (None, self.output_size))

        rng = np.random.default_rng(self.seed)
        self._build(rng)
        optimizer = Adam(lr=self.learning_rate)
        params = self.parameters()
        n = X.shape[0]
        batch_size = min(self.batch_size, n)
        self.history_ = []
        self.best_val_mae_ = None
        self.best_epoch_ = None
        self.best_state_ = None
        for epoch in range(self.epochs):
            started = time.perf_counter()
            order = rng.permutation(n)
            loss_sum = 0.0
            for lo in range(0, n, batch_size):
                idx = order[lo : lo + batch_size]
                xb, yb = X[idx], y[idx]
                self.zero_grad()
                out, caches = self._forward(xb, training=True, rng=rng)
                loss = mae(out, yb)
                if not np.isfinite(loss):
                    raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
                self._backward(mae_grad(out, yb), caches)
                optimizer.step(params)
                loss_sum += loss * xb.shape[0]
            entry = {
                "epoch": epoch,
                "train_mae": loss_sum / n,
                "wall_ms": (time.perf_counter() - started) * 1e3,
            }
            if X_val is not None and X_val.shape[0] > 0:
                entry["val_mae"] = mae(self.predict(X_val), y_val)
                if self.best_val_mae_ is None or entry["val_mae"] < self.best_val_mae_:
                    self.best_val_mae_ = entry["val_mae"]
                    self.best_epoch_ = epoch
                    self.best_state_ = [value.copy() for _, value, _ in params]
            self.history_.append(entry)
        return self

    def restore_best_validation(self) -> "PoseMapper":
        """Load the weights from the best validation-MAE epoch."""
        if self.best_state_ is None:
            raise InvalidInputError("no validation set was supplied during fit")
        for (_, value, _), stored in zip(self.parameters(), self.best_state_):
            value[...] = stored
        return self

    # -- persistence ---------------------------------------------------------

    def architecture(self) -> dict:
        return {
            "sizes": [self.input_size, *self.hidden_sizes, self.output_size],
            "dropout_after": self.dropout_layer,
            "rate": self.dropout_rate,
        }

    def save(self, path, config_hash: str = "") -> str:
        check_fitted(self, "layers_")
        return save_checkpoint(
            path,
            architecture=self.architecture(),
            parameters=self.parameters(),
            config_hash=config_hash,
            extra={"model": "mapper", "seed": self.seed},
        )

    def params_digest(self) -> str:
        return params_hash(self.parameters())

    @classmethod
    def from_checkpoint(cls, path) -> "PoseMapper":
        doc = load_checkpoint(path)
        sizes = doc["architecture"]["sizes"]
        model = cls(
            input_size=sizes[0],
            hidden_sizes=tuple(sizes[1:-1]),
            output_size=sizes[-1],
            dropout_rate=doc["architecture"].get("rate", 0.5),
            dropout_layer=doc["architecture"].get("dropout_after", 2),
        )
        model.initialize(np.random.default_rng(0))
        for name, value, _ in model.parameters():
            stored = doc["tensors"].get(name)
            if stored is None:
                raise InvalidInputError(f"checkpoint missing tensor {name!r}")
            if stored.shape != value.shape:
                raise InvalidInputError(
                    f"tensor {name!r}: checkpoint shape {stored.shape} != model {value.shape}"
                )
            value[...] = stored
        model.checkpoint_config_hash_ = doc["config_hash"]
        return model
