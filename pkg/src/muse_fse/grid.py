"""Extrapolation window, support/loss partition and sample weighting.

A :class:`DataArea` is the rectangular window in which a signal is known on
the support area and unknown on the loss area. The weighting function masks
the loss area and lets samples near the window center dominate the fit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DataArea",
    "WeightMatrix",
    "ExtrapolationConfig",
    "build_isotropic_weights",
    "weighted_energy",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DataArea:
    """An M x N window with known samples on the support area.

    ``lost`` is True where a sample is missing. Lost samples are zeroed on
    construction so that they can never leak into a computation.
    """

    samples: np.ndarray
    lost: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        lost = np.array(self.lost, dtype=bool)
        if samples.ndim != 2 or samples.size == 0:
            raise ValueError("samples must be a non-empty 2D array")
        if lost.shape != samples.shape:
            raise ValueError(
                f"mask shape {lost.shape} does not match samples {samples.shape}"
            )
        if lost.all():
            raise ValueError("data area has no support samples")
        known = samples[~lost]
        if not np.all(np.isfinite(known)) or known.min() < 0 or known.max() > 255:
            raise ValueError("support samples must lie in [0, 255]")
        samples[lost] = 0.0
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "lost", _frozen(lost))

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def support(self) -> np.ndarray:
        return ~self.lost

    @property
    def n_lost(self) -> int:
        return int(self.lost.sum())

    @property
    def n_support(self) -> int:
        return self.lost.size - self.n_lost


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Non-negative sample weights, exactly zero on the loss area."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("weights must be a 2D array")
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise ValueError("weights must be finite and non-negative")
        if not values.max() > 0:
            raise ValueError("weights are zero everywhere")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def scaled(self, region: np.ndarray, factor: float) -> "WeightMatrix":
        """Return a copy with the weights inside ``region`` multiplied by ``factor``."""
        values = self.values.copy()
        values[np.asarray(region, dtype=bool)] *= factor
        return WeightMatrix(values)


@dataclass(frozen=True)
class ExtrapolationConfig:
    """Parameters shared by FSE and MuSE.

    ``tau`` and ``n_bf`` are only consulted by MuSE. ``iterations`` may be 0
    at the driver level (an empty model); the engines themselves require >= 1.
    """

    gamma: float = 0.2
    rho_hat: float = 0.8
    iterations: int = 200
    tau: float = 0.9
    n_bf: int = 5

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0 < self.rho_hat < 1:
            raise ValueError(f"rho_hat must be in (0, 1), got {self.rho_hat}")
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise ValueError(f"iterations must be a non-negative integer, got {self.iterations}")
        if not 0 <= self.tau < 1:
            raise ValueError(f"tau must be in [0, 1), got {self.tau}")
        if int(self.n_bf) != self.n_bf or self.n_bf < 1:
            raise ValueError(f"n_bf must be a positive integer, got {self.n_bf}")


@lru_cache(maxsize=64)
def _radial_decay(shape: tuple[int, int], rho_hat: float) -> np.ndarray:
    M, N = shape
    m = np.arange(M) - (M - 1) / 2
    n = np.arange(N) - (N - 1) / 2
    dist = np.sqrt(m[:, None] ** 2 + n[None, :] ** 2)
    return _frozen(rho_hat ** dist)


def build_isotropic_weights(area: DataArea, rho_hat: float) -> WeightMatrix:
    """Exponentially decaying weights around the (possibly fractional) window center.

    ``rho_hat ** d`` where ``d`` is the Euclidean distance from
    ((M-1)/2, (N-1)/2); zero on the loss area.
    """
    if not 0 < rho_hat < 1:
        raise ValueError(f"rho_hat must be in (0, 1), got {rho_hat}")
    rho = _radial_decay(area.shape, float(rho_hat))
    return WeightMatrix(np.where(area.lost, 0.0, rho))


def weighted_energy(residual: np.ndarray, weights: WeightMatrix | np.ndarray) -> float:
    """Sum of ``residual**2 * w`` over the whole window."""
    w = weights.values if isinstance(weights, WeightMatrix) else np.asarray(weights)
    residual = np.asarray(residual)
    if residual.shape != w.shape:
        raise ValueError(f"residual shape {residual.shape} != weights shape {w.shape}")
    return float(np.sum(residual * residual * w))
