"""Dense and GRU layers with explicit forward caches and hand-written backward.

Every forward returns (output, cache); the matching backward consumes the
cache, accumulates parameter gradients in place and returns the gradient with
respect to its input.  Caches are plain tuples so one layer object can be
applied several times per step (e.g. a decoder head shared across timesteps)
before a single backward sweep.

Weights initialize to uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) and biases to
zero, from a caller-supplied Generator so training runs are reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit as sigmoid

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772


def _uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def selu(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(x))


def selu_grad(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(x))


def dropout(
    x: np.ndarray, rate: float, training: bool, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: zero with probability ``rate``, scale survivors.

    Returns (output, mask); mask is None in inference mode or at rate 0 and
    feeds the matching backward pass otherwise.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


class Dense:
    """Affine layer y = x W^T + b with gradient accumulation."""

    def __init__(self, in_size: int, out_size: int, rng: np.random.Generator):
        self.in_size = in_size
        self.out_size = out_size
        self.w = _uniform_init(rng, in_size, (out_size, in_size))
        self.b = np.zeros(out_size)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x @ self.w.T + self.b, x

    def backward(self, dy: np.ndarray, cache: np.ndarray) -> np.ndarray:
        self.dw += dy.T @ cache
        self.db += dy.sum(axis=0)
        return dy @ self.w

    def parameters(self, prefix: str = "") -> list[tuple[str, np.ndarray, np.ndarray]]:
        return [(prefix + "w", self.w, self.dw), (prefix + "b", self.b, self.db)]

    def zero_grad(self):
        self.dw[...] = 0.0
        self.db[...] = 0.0


class GRUCell:
    """Single GRU cell.

    r = sigmoid(W_r x + b_ir + U_r h + b_hr)
    z = sigmoid(W_z x + b_iz + U_z h + b_hz)
    n = tanh(W_n x + b_in + r * (U_n h + b_hn))
    h' = (1 - z) * n + z * h
    """

    GATES = ("r", "z", "n")

    def __init__(self, in_size: int, hidden_size: int, rng: np.random.Generator):
        self.in_size = in_size
        self.hidden_size = hidden_size
        self.w = {g: _uniform_init(rng, in_size, (hidden_size, in_size)) for g in self.GATES}
        self.u = {g: _uniform_init(rng, hidden_size, (hidden_size, hidden_size)) for g in self.GATES}
        self.bi = {g: np.zeros(hidden_size) for g in self.GATES}
        self.bh = {g: np.zeros(hidden_size) for g in self.GATES}
        self.dw = {g: np.zeros_like(self.w[g]) for g in self.GATES}
        self.du = {g: np.zeros_like(self.u[g]) for g in self.GATES}
        self.dbi = {g: np.zeros_like(self.bi[g]) for g in self.GATES}
        self.dbh = {g: np.zeros_like(self.bh[g]) for g in self.GATES}

    def step(self, x: np.ndarray, h_prev: np.ndarray) -> tuple[np.ndarray, tuple]:
        r = sigmoid(x @ self.w["r"].T + self.bi["r"] + h_prev @ self.u["r"].T + self.bh["r"])
        z = sigmoid(x @ self.w["z"].T + self.bi["z"] + h_prev @ self.u["z"].T + self.bh["z"])
        hn = h_prev @ self.u["n"].T + self.bh["n"]
        n = np.tanh(x @ self.w["n"].T + self.bi["n"] + r * hn)
        h_next = (1.0 - z) * n + z * h_prev
        return h_next, (x, h_prev, r, z, n, hn)

    def backward_step(self, dh_next: np.ndarray, cache: tuple) -> tuple[np.ndarray, np.ndarray]:
        x, h_prev, r, z, n, hn = cache
        dz = dh_next * (h_prev - n)
        dn = dh_next * (1.0 - z)
        dh_prev = dh_next * z

        da_n = dn * (1.0 - n * n)
        dr = da_n * hn
        dhn = da_n * r
        da_r = dr * r * (1.0 - r)
        da_z = dz * z * (1.0 - z)

        self.dw["n"] += da_n.T @ x
        self.dbi["n"] += da_n.sum(axis=0)
        self.du["n"] += dhn.T @ h_prev
        self.dbh["n"] += dhn.sum(axis=0)
        self.dw["r"] += da_r.T @ x
        self.dbi["r"] += da_r.sum(axis=0)
        self.du["r"] += da_r.T @ h_prev
        self.dbh["r"] += da_r.sum(axis=0)
        self.dw["z"] += da_z.T @ x
        self.dbi["z"] += da_z.sum(axis=0)
        self.du["z"] += da_z.T @ h_prev
        self.dbh["z"] += da_z.sum(axis=0)

        dh_prev = dh_prev + dhn @ self.u["n"] + da_r @ self.u["r"] + da_z @ self.u["z"]
        dx = da_n @ self.w["n"] + da_r @ self.w["r"] + da_z @ self.w["z"]
        return dx, dh_prev

    def parameters(self, prefix: str = "") -> list[tuple[str, np.ndarray, np.ndarray]]:
        out = []
        for g in self.GATES:
            out.append((f"{prefix}w_{g}", self.w[g], self.dw[g]))
            out.append((f"{prefix}u_{g}", self.u[g], self.du[g]))
            out.append((f"{prefix}b_i{g}", self.bi[g], self.dbi[g]))
            out.append((f"{prefix}b_h{g}", self.bh[g], self.dbh[g]))
        return out

    def zero_grad(self):
        for g in self.GATES:
            self.dw[g][...] = 0.0
            self.du[g][...] = 0.0
            self.dbi[g][...] = 0.0
            self.dbh[g][...] = 0.0


class GRUStack:
    """Stacked GRU layers unrolled over a (batch, T, features) sequence.

    Hidden states start at zero.  Backpropagation-through-time runs over the
    full window; gradients flow both through time and down the stack.
    """

    def __init__(self, in_size: int, hidden_size: int, num_layers: int, rng: np.random.Generator):
        self.in_size = in_size
        self.hidden_size = hidden_size
        self.cells = [
            GRUCell(in_size if i == 0 else hidden_size, hidden_size, rng)
            for i in range(num_layers)
        ]

    def forward(self, x_seq: np.ndarray) -> tuple[np.ndarray, list]:
        batch, steps, _ = x_seq.shape
        caches = []
        layer_input = [x_seq[:, t] for t in range(steps)]
        for cell in self.cells:
            h = np.zeros((batch, self.hidden_size))
            layer_caches = []
            outputs = []
            for t in range(steps):
                h, cache = cell.step(layer_input[t], h)
                layer_caches.append(cache)
                outputs.append(h)
            caches.append(layer_caches)
            layer_input = outputs
        return np.stack(layer_input, axis=1), caches

    def backward(self, dh_top: np.ndarray, caches: list) -> np.ndarray:
        batch, steps, _ = dh_top.shape
        d_above = [dh_top[:, t] for t in range(steps)]
        for cell, layer_caches in zip(reversed(self.cells), reversed(caches)):
            dh_carry = np.zeros((batch, self.hidden_size))
            d_inputs = [None] * steps
            for t in reversed(range(steps)):
                dh = d_above[t] + dh_carry
                d_inputs[t], dh_carry = cell.backward_step(dh, layer_caches[t])
            d_above = d_inputs
        return np.stack(d_above, axis=1)

    def parameters(self, prefix: str = "") -> list[tuple[str, np.ndarray, np.ndarray]]:
        out = []
        for i, cell in enumerate(self.cells):
            out.extend(cell.parameters(f"{prefix}l{i}."))
        return out

    def zero_grad(self):
        for cell in self.cells:
            cell.zero_grad()
