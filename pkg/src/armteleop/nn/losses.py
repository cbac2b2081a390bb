"""Loss primitives."""

from __future__ import annotations

import numpy as np


def mae(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute error over all elements."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def mae_grad(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gradient of mae(a, b) with respect to ``a``; subgradient at 0 is 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.sign(a - b) / a.size
