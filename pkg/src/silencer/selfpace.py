"""Self-paced pixel weighting.

The weight of a pixel with loss ``l`` at age ``gamma`` is the minimiser over
``w in [0, 1]`` of ``w * l + 1 / (w + 1 / gamma)``::

    w = 1                        if l <= (gamma / (gamma + 1)) ** 2
    w = 0                        if l >= gamma ** 2
    w = 1 / sqrt(l) - 1 / gamma  otherwise

Larger ``gamma`` admits more (harder) pixels, so the schedule grows it
geometrically: ``gamma_t = gamma_0 * eta ** t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError

GAMMA_FLOOR = 1e-6


def soft_weight(l: float, gamma: float) -> float:
    if l < 0 or gamma <= 0:
        raise ValidationError(f"soft_weight needs l >= 0 and gamma > 0 (got l={l}, gamma={gamma})")
    ratio = gamma / (gamma + 1.0)
    if l <= ratio * ratio:
        return 1.0
    if l >= gamma * gamma:
        return 0.0
    return 1.0 / math.sqrt(l) - 1.0 / gamma


def update_weights(losses, gamma: float) -> np.ndarray:
    """Apply :func:`soft_weight` elementwise; returns a new float64 array."""
    losses = np.asarray(losses, dtype=np.float64)
    if gamma <= 0 or not np.isfinite(gamma):
        raise ValidationError(f"gamma must be positive and finite, got {gamma}")
    if np.any(losses < 0) or np.any(np.isnan(losses)):
        raise ValidationError("pixel losses must be nonnegative")
    return kernels.soft_weight_matrix(losses, float(gamma))


def regularizer_value(W, gamma: float) -> float:
    """``sum(1 / (W + 1/gamma))`` over every entry of ``W``."""
    W = np.asarray(W, dtype=np.float64)
    return float(np.sum(1.0 / (W + 1.0 / gamma)))


def initial_gamma(losses) -> float:
    """Age such that about half of the pixels start with a positive weight.

    A pixel has positive weight iff ``l < gamma**2``, so ``gamma_0`` is the
    square root of the median loss.
    """
    med = float(np.median(np.asarray(losses, dtype=np.float64)))
    return max(math.sqrt(max(med, 0.0)), GAMMA_FLOOR)


@dataclass(frozen=True)
class PaceSchedule:
    """Age schedule for the outer self-paced loop.

    ``gamma0=None`` selects the median rule of :func:`initial_gamma`.
    ``frozen=True`` disables self-pacing entirely: the weights stay at one and
    the regulariser is dropped, which turns the weighted solvers back into
    their plain counterparts.
    """

    gamma0: float | None = None
    eta: float = 1.1
    outer_iters: int = 20
    frozen: bool = False

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ValidationError("outer_iters must be >= 1")
        if self.frozen:
            return
        if not 1.0 < self.eta <= 2.05:
            raise ValidationError(f"eta must lie in (1, 2.05], got {self.eta}")
        if self.gamma0 is not None and not self.gamma0 > 0:
            raise ValidationError("gamma0 must be positive")

    @classmethod
    def disabled(cls) -> "PaceSchedule":
        return cls(gamma0=None, eta=2.0, outer_iters=1, frozen=True)

    def resolve(self, initial_losses) -> float:
        return self.gamma0 if self.gamma0 is not None else initial_gamma(initial_losses)

    def advance(self, t: int, gamma0: float | None = None) -> float:
        g0 = self.gamma0 if gamma0 is None else gamma0
        if g0 is None:
            raise ValidationError("gamma0 is unresolved; call resolve() with the initial losses first")
        if not 0 <= t < self.outer_iters:
            raise ValidationError(f"t={t} outside [0, {self.outer_iters})")
        return g0 * self.eta**t
