"""Shared scalar oracles: slow, loop-based reimplementations used to verify
the vectorized forward passes."""

import math

import numpy as np


def scalar_gru_step(cell, x, h):
    """Independent elementwise evaluation of the GRU cell equations."""

    def sig(v):
        return 1.0 / (1.0 + math.exp(-v))

    H = cell.hidden_size
    out = np.zeros(H)
    for i in range(H):
        a_r = cell.bi["r"][i] + cell.bh["r"][i]
        a_z = cell.bi["z"][i] + cell.bh["z"][i]
        a_n = cell.bi["n"][i]
        hn = cell.bh["n"][i]
        for j in range(cell.in_size):
            a_r += cell.w["r"][i, j] * x[j]
            a_z += cell.w["z"][i, j] * x[j]
            a_n += cell.w["n"][i, j] * x[j]
        for j in range(H):
            a_r += cell.u["r"][i, j] * h[j]
            a_z += cell.u["z"][i, j] * h[j]
            hn += cell.u["n"][i, j] * h[j]
        r = sig(a_r)
        z = sig(a_z)
        n = math.tanh(a_n + r * hn)
        out[i] = (1.0 - z) * n + z * h[i]
    return out


def scalar_stack_sequence(cells, x_seq):
    """Run a stacked GRU over (T, in) inputs; returns top-layer (T, H)."""
    layer_input = [x_seq[t] for t in range(x_seq.shape[0])]
    for cell in cells:
        h = np.zeros(cell.hidden_size)
        outputs = []
        for x_t in layer_input:
            h = scalar_gru_step(cell, x_t, h)
            outputs.append(h)
        layer_input = outputs
    return np.stack(layer_input)


def scalar_dense(layer, x):
    out = np.zeros(layer.out_size)
    for i in range(layer.out_size):
        acc = layer.b[i]
        for j in range(layer.in_size):
            acc += layer.w[i, j] * x[j]
        out[i] = acc
    return out
