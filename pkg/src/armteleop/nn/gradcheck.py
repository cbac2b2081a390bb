"""Finite-difference verification of hand-written backpropagation.

Central differences with step 1e-5 against the analytic gradients, relative
error |a - n| / max(|a|, |n|, 1e-8) per parameter.  Losses built on MAE (and
SELU) are only piecewise smooth: a parameter whose perturbation flips the
sign of any residual or kink pre-activation would make the numeric slope
meaningless, so such parameters are excluded and counted.

Near-zero gradients need an absolute guard: a double-precision central
difference of an O(1) loss carries ~1e-11 of rounding noise, so a parameter
whose true gradient is ~1e-8 can never satisfy a pure relative test.  A
parameter therefore passes outright when |a - n| < atol (default 1e-9, far
above the noise floor and far below any real backpropagation mistake).

A target must expose:
  parameters()     -> list of (name, value_array, grad_array)
  loss_and_grads() -> float, filling grad arrays (stochasticity frozen)
  loss()           -> float, same frozen stochasticity, no gradient side effects
  kink_signs()     -> optional flat array of signs of kink-critical quantities
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_param: str
    checked: int
    excluded: int
    per_tensor: dict[str, float] = field(default_factory=dict)

    def __str__(self) -> str:
        return (
            f"max rel err {self.max_rel_err:.3e} at {self.worst_param} "
            f"({self.checked} checked, {self.excluded} excluded)"
        )


def _zero_all(parameters):
    for _, _, grad in parameters:
        grad[...] = 0.0


def check_gradients(
    target,
    step: float = 1e-5,
    atol: float = 1e-9,
    max_per_tensor: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    ``max_per_tensor`` caps how many elements of each tensor are probed
    (deterministically subsampled); None probes every element.
    """
    parameters = target.parameters()
    _zero_all(parameters)
    target.loss_and_grads()
    analytic = {name: grad.copy() for name, _, grad in parameters}

    kinks = getattr(target, "kink_signs", None)
    rng = np.random.default_rng(seed)

    max_rel = 0.0
    worst = ""
    checked = 0
    excluded = 0
    per_tensor: dict[str, float] = {}

    for name, value, _ in parameters:
        flat = value.reshape(-1)
        idx = np.arange(flat.size)
        if max_per_tensor is not None and flat.size > max_per_tensor:
            idx = np.sort(rng.choice(flat.size, size=max_per_tensor, replace=False))
        tensor_max = 0.0
        for i in idx:
            original = flat[i]
            flat[i] = original + step
            loss_plus = target.loss()
            signs_plus = kinks() if kinks is not None else None
            flat[i] = original - step
            loss_minus = target.loss()
            signs_minus = kinks() if kinks is not None else None
            flat[i] = original

            if signs_plus is not None and not np.array_equal(signs_plus, signs_minus):
                excluded += 1
                continue

            numeric = (loss_plus - loss_minus) / (2.0 * step)
            a = analytic[name].reshape(-1)[i]
            diff = abs(a - numeric)
            rel = 0.0 if diff < atol else diff / max(abs(a), abs(numeric), 1e-8)
            checked += 1
            tensor_max = max(tensor_max, rel)
            if rel > max_rel:
                max_rel = rel
                worst = f"{name}[{i}]"
        per_tensor[name] = tensor_max
    return GradCheckReport(
        max_rel_err=max_rel,
        worst_param=worst,
        checked=checked,
        excluded=excluded,
        per_tensor=per_tensor,
    )
