"""Output quantization and PSNR."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["PEAK", "quantize", "psnr", "psnr_from_sse", "saturation_iterations"]

PEAK = 255.0


def quantize(values: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to uint8."""
    clamped = np.clip(np.asarray(values, dtype=np.float64), 0.0, PEAK)
    return np.floor(clamped + 0.5).astype(np.uint8)


def psnr_from_sse(sse: float, count: int) -> float:
    if count <= 0:
        raise ValueError("PSNR over an empty pixel set")
    if sse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 * count / sse)


def psnr(reference: np.ndarray, test: np.ndarray, mask: np.ndarray | None = None) -> float:
    """PSNR in dB over the pixels selected by ``mask`` (all pixels if None).

    Identical inputs give ``math.inf``.
    """
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {test.shape}")
    if mask is None:
        mask = np.ones(reference.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != reference.shape:
        raise ValueError(f"mask shape {mask.shape} != image shape {reference.shape}")
    diff = reference[mask] - test[mask]
    return psnr_from_sse(float(np.dot(diff, diff)), diff.size)


def saturation_iterations(curve, delta: float = 0.25) -> int:
    """Smallest 1-based iteration whose PSNR is within ``delta`` of the final value."""
    curve = np.asarray(curve, dtype=np.float64)
    if curve.size == 0:
        raise ValueError("empty PSNR curve")
    target = curve[-1] - delta
    return int(np.argmax(curve >= target)) + 1
