"""Latent-space diagnostics and the direct-regression baseline.

The central diagnostic decodes straight-line latent traversals and measures
the Pearson correlation between each latent coordinate and each decoded joint
angle.  A disentangled model shows one dominant latent per joint; the margin
score below turns that visual claim into a scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kinematics import unit_decode
from .mapper import PoseMapper
from .validation import InvalidInputError, as_float_array

LATENT_SIZE = 10
JOINT_COUNT = 7


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson coefficients, rows = latent features L1..L10, cols = joints J1..J7.

    Entries whose joint or latent series was constant are NaN and listed in
    ``flagged`` instead of being silently dropped.
    """

    values: np.ndarray
    flagged: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        arr = as_float_array(self.values, "values", (LATENT_SIZE, JOINT_COUNT))
        finite = arr[np.isfinite(arr)]
        if finite.size and (np.any(finite > 1.0 + 1e-12) or np.any(finite < -1.0 - 1e-12)):
            raise InvalidInputError("correlation entries must lie in [-1, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def interpolate_latents(z_start, z_end, steps: int) -> np.ndarray:
    """Linear interpolation between two latents, endpoints included."""
    if steps < 2:
        raise InvalidInputError(f"steps must be >= 2, got {steps}")
    z_start = np.asarray(z_start, dtype=np.float64)
    z_end = np.asarray(z_end, dtype=np.float64)
    if z_start.shape != z_end.shape:
        raise InvalidInputError("z_start and z_end must have the same shape")
    alphas = np.linspace(0.0, 1.0, steps)[:, None]
    return (1.0 - alphas) * z_start[None, :] + alphas * z_end[None, :]


def latent_joint_correlation(
    decoder,
    trials: int,
    seed: int,
    steps: int = 100,
    z_start: np.ndarray | None = None,
    endpoint_sampler=None,
    chunk: int = 16384,
) -> CorrelationMatrix:
    """Correlate latent coordinates with decoded joint angles over traversals.

    Fixes one latent vector, draws ``trials`` endpoints, decodes the
    ``steps``-point interpolation of each and reads the joint angles off the
    first frame of every decoded segment.  Pearson correlation is taken over
    all (trial, step) points.

    ``decoder`` needs a ``decode(Z) -> (N, 2, 14)`` method.  ``z_start`` and
    ``endpoint_sampler`` (rng -> latent) exist for targeted fixtures.
    """
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    if z_start is None:
        z_start = rng.standard_normal(LATENT_SIZE)
    z_start = as_float_array(z_start, "z_start", (LATENT_SIZE,))

    n_points = trials * steps
    latents = np.empty((n_points, LATENT_SIZE))
    for trial in range(trials):
        z_end = endpoint_sampler(rng) if endpoint_sampler else rng.standard_normal(LATENT_SIZE)
        latents[trial * steps : (trial + 1) * steps] = interpolate_latents(
            z_start, z_end, steps
        )

    joints = np.empty((n_points, JOINT_COUNT))
    for lo in range(0, n_points, chunk):
        segs = decoder.decode(latents[lo : lo + chunk])
        joints[lo : lo + chunk] = unit_decode(segs[:, 0, :])

    values = np.full((LATENT_SIZE, JOINT_COUNT), np.nan)
    flagged = []
    z_centered = latents - latents.mean(axis=0)
    j_centered = joints - joints.mean(axis=0)
    z_norm = np.sqrt((z_centered**2).sum(axis=0))
    j_norm = np.sqrt((j_centered**2).sum(axis=0))
    for i in range(LATENT_SIZE):
        for j in range(JOINT_COUNT):
            if z_norm[i] == 0.0 or j_norm[j] == 0.0:
                flagged.append((i, j))
                continue
            values[i, j] = float(
                (z_centered[:, i] @ j_centered[:, j]) / (z_norm[i] * j_norm[j])
            )
    values = np.clip(values, -1.0, 1.0)
    return CorrelationMatrix(values=values, flagged=tuple(flagged))


def disentanglement_score(matrix: CorrelationMatrix) -> float:
    """Mean over joints of (top |corr| - runner-up |corr|) across latents.

    1.0 means each joint is controlled by exactly one latent; 0 means the
    influence is spread evenly.
    """
    values = np.abs(matrix.values)
    if np.all(~np.isfinite(values)):
        raise InvalidInputError("correlation matrix is all-NaN")
    margins = []
    for j in range(values.shape[1]):
        col = values[:, j]
        col = col[np.isfinite(col)]
        if col.size == 0:
            continue
        if col.size == 1:
            margins.append(col[0])
            continue
        top_two = np.partition(col, -2)[-2:]
        margins.append(top_two[1] - top_two[0])
    return float(np.mean(margins))


def correlation_report(matrix: CorrelationMatrix, score: float) -> dict:
    """Structured report of the correlation analysis (also CSV-friendly)."""
    return {
        "latents": [f"L{i + 1}" for i in range(LATENT_SIZE)],
        "joints": [f"J{j + 1}" for j in range(JOINT_COUNT)],
        "values": matrix.values,
        "flagged": [list(pair) for pair in matrix.flagged],
        "disentanglement_score": score,
    }


def correlation_csv(matrix: CorrelationMatrix) -> str:
    """Plot-friendly grid: header row of joints, one row per latent."""
    lines = ["latent," + ",".join(f"J{j + 1}" for j in range(JOINT_COUNT))]
    for i in range(LATENT_SIZE):
        cells = (
            format(v, ".6f") if np.isfinite(v) else "nan" for v in matrix.values[i]
        )
        lines.append(f"L{i + 1}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def baseline_direct_regressor(
    human24: np.ndarray,
    robot14: np.ndarray,
    epochs: int = 500,
    batch_size: int = 256,
    learning_rate: float = 1e-3,
    seed: int = 0,
    X_val=None,
    y_val=None,
) -> PoseMapper:
    """Train the no-VAE baseline: same mapper body, 14 direct outputs."""
    model = PoseMapper(
        output_size=14,
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=learning_rate,
        seed=seed,
    )
    return model.fit(human24, robot14, X_val=X_val, y_val=y_val)
