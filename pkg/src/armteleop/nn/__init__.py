"""Minimal neural-network kernel: dense and GRU layers with hand-written
backpropagation, SELU/dropout, MAE loss, Adam, finite-difference gradient
checking and a versioned checkpoint format."""

from .layers import Dense, GRUCell, GRUStack, dropout, selu, selu_grad, sigmoid
from .losses import mae, mae_grad
from .optim import Adam
from .checkpoint import load_checkpoint, params_hash, save_checkpoint
from .gradcheck import GradCheckReport, check_gradients

__all__ = [
    "Adam",
    "Dense",
    "GRUCell",
    "GRUStack",
    "GradCheckReport",
    "check_gradients",
    "dropout",
    "load_checkpoint",
    "mae",
    "mae_grad",
    "params_hash",
    "save_checkpoint",
    "selu",
    "selu_grad",
    "sigmoid",
]
