"""FSE vs MuSE comparison over an image corpus."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .conceal import LossPattern, conceal_image
from .grid import ExtrapolationConfig
from .imageio import read_image
from .metrics import saturation_iterations

__all__ = [
    "DEFAULT_SWEEP",
    "CurveResult",
    "ImageBenchmark",
    "benchmark_image",
    "load_corpus",
    "synthetic_corpus",
]

DEFAULT_SWEEP = ((0.75, 5), (0.9, 3), (0.9, 5), (0.9, 7), (0.95, 5))
IMAGE_SUFFIXES = {".pgm", ".png"}


@dataclass
class CurveResult:
    method: str
    tau: float | None
    n_bf: int | None
    curve: np.ndarray
    seconds: float

    @property
    def saturation_iterations(self) -> int:
        return saturation_iterations(self.curve)

    @property
    def saturation_psnr(self) -> float:
        return float(self.curve[-1])


@dataclass
class ImageBenchmark:
    name: str
    fse: CurveResult
    muse: list[CurveResult] = field(default_factory=list)

    def muse_for(self, tau: float, n_bf: int) -> CurveResult:
        for r in self.muse:
            if r.tau == tau and r.n_bf == n_bf:
                return r
        raise KeyError((tau, n_bf))

    def ratio(self, result: CurveResult) -> float:
        return self.fse.saturation_iterations / result.saturation_iterations


def benchmark_image(name: str, image: np.ndarray, sweep=((0.9, 5),),
                    iterations: int = 200, gamma: float = 0.2, rho_hat: float = 0.8,
                    pattern: LossPattern = LossPattern(), jobs: int = 1) -> ImageBenchmark:
    """Pooled PSNR curves for FSE and for MuSE at every ``(tau, n_bf)`` in ``sweep``.

    ``image`` is the clean original; the pattern's losses are injected and
    the original serves as reference.
    """
    def run(method, tau=0.9, n_bf=5):
        config = ExtrapolationConfig(gamma=gamma, rho_hat=rho_hat, iterations=iterations,
                                     tau=tau, n_bf=n_bf)
        _, report = conceal_image(image, pattern, method, config, reference=image, jobs=jobs)
        return report.psnr_curve(), report.seconds

    curve, seconds = run("fse")
    result = ImageBenchmark(name, CurveResult("fse", None, None, curve, seconds))
    for tau, n_bf in sweep:
        curve, seconds = run("muse", tau, n_bf)
        result.muse.append(CurveResult("muse", tau, n_bf, curve, seconds))
    return result


def load_corpus(directory) -> list[tuple[str, np.ndarray]]:
    """All PGM/PNG images in ``directory``, sorted by file name."""
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise ValueError(f"no PGM/PNG images in {directory}")
    return [(p.stem, read_image(p)) for p in paths]


def synthetic_corpus(count: int, seed: int, size: int = 512) -> list[tuple[str, np.ndarray]]:
    """Smooth random textures with a few hard edges, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    images = []
    for i in range(count):
        field_ = ndimage.gaussian_filter(rng.normal(size=(size, size)), sigma=rng.uniform(3, 12))
        field_ = (field_ - field_.mean()) / field_.std()
        yy, xx = np.mgrid[:size, :size]
        for _ in range(3):
            angle, shift = rng.uniform(0, np.pi), rng.uniform(-size / 3, size / 3)
            side = (xx - size / 2) * np.cos(angle) + (yy - size / 2) * np.sin(angle) > shift
            field_ += rng.uniform(-1, 1) * side
        lo, hi = field_.min(), field_.max()
        img = np.floor(255 * (field_ - lo) / (hi - lo) + 0.5).astype(np.uint8)
        images.append((f"synthetic{i:02d}", img))
    return images
