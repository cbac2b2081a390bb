"""Input validation helpers shared across the package.

Small, sklearn-flavored checks: every public entry point funnels its array
inputs through these so error messages name the offending field instead of
surfacing a numpy broadcast failure three layers down.
"""

from __future__ import annotations

import numpy as np


class InvalidInputError(ValueError):
    """Raised when a caller-supplied value violates a documented precondition."""


def as_float_array(value, name: str, shape: tuple | None = None) -> np.ndarray:
    """Coerce ``value`` to a float64 ndarray, optionally enforcing a shape.

    ``shape`` entries of ``None`` act as wildcards, e.g. ``(None, 14)``.
    """
    arr = np.asarray(value, dtype=np.float64)
    if shape is not None:
        if arr.ndim != len(shape):
            raise InvalidInputError(
                f"{name}: expected {len(shape)} dimensions, got {arr.ndim}"
            )
        for axis, want in enumerate(shape):
            if want is not None and arr.shape[axis] != want:
                raise InvalidInputError(
                    f"{name}: expected shape {shape}, got {arr.shape}"
                )
    return arr


def require_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: contains non-finite values")
    return arr


def require_positive(value: float, name: str) -> float:
    if not value > 0:
        raise InvalidInputError(f"{name}: must be positive, got {value}")
    return value


def check_fitted(estimator, attribute: str) -> None:
    """Raise if ``estimator`` has not been fitted (sklearn convention)."""
    if getattr(estimator, attribute, None) is None:
        raise InvalidInputError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )
