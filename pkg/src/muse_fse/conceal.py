"""Block-loss concealment of grayscale images.

Each lost block is extrapolated from a frame of known samples around it.
Isolated blocks are independent and may be processed in parallel; arbitrary
loss masks are tiled and concealed in raster order, with already concealed
tiles joining later windows at a reduced weight.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .basis import build_dictionary
from .fse import IterationTrace, fse_run
from .grid import DataArea, ExtrapolationConfig, build_isotropic_weights
from .metrics import psnr, psnr_from_sse, quantize, saturation_iterations
from .muse import muse_run

__all__ = [
    "METHODS",
    "LossPattern",
    "BlockResult",
    "ConcealmentReport",
    "window_bounds",
    "extract_window",
    "conceal_image",
    "conceal_sequential",
    "psnr",
    "saturation_iterations",
]

METHODS = {"fse": fse_run, "muse": muse_run}


@dataclass(frozen=True)
class LossPattern:
    """Regular grid of square loss blocks.

    ``offset`` is the top-left corner of the first block; blocks that would
    cross the image border are not placed.
    """

    block_size: int = 16
    spacing: int = 64
    offset: tuple[int, int] = (24, 24)
    frame: int = 16

    def __post_init__(self):
        if self.block_size < 1 or self.spacing < 1 or self.frame < 0:
            raise ValueError("block_size and spacing must be positive, frame non-negative")
        if min(self.offset) < 0:
            raise ValueError("offset must be non-negative")

    @property
    def isolated(self) -> bool:
        """True if no block's support frame touches another block."""
        return self.spacing >= self.block_size + self.frame

    def blocks(self, shape: tuple[int, int]) -> list[tuple[int, int]]:
        H, W = shape
        b = self.block_size
        rows = range(self.offset[0], H - b + 1, self.spacing)
        cols = range(self.offset[1], W - b + 1, self.spacing)
        return [(r, c) for r in rows for c in cols]

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean image, True on lost pixels."""
        lost = np.zeros(shape, dtype=bool)
        b = self.block_size
        for r, c in self.blocks(shape):
            lost[r:r + b, c:c + b] = True
        return lost


def window_bounds(shape, origin, size, frame) -> tuple[slice, slice]:
    """Block of ``size`` at ``origin`` grown by ``frame``, clipped to the image."""
    H, W = shape
    r, c = origin
    h, w = (size, size) if np.isscalar(size) else size
    if r < 0 or c < 0 or r + h > H or c + w > W:
        raise ValueError(f"block at {origin} of size {size} lies outside a {shape} image")
    return (slice(max(r - frame, 0), min(r + h + frame, H)),
            slice(max(c - frame, 0), min(c + w + frame, W)))


def extract_window(image: np.ndarray, pattern: LossPattern, block_id: int,
                   lost: np.ndarray | None = None) -> DataArea:
    """Data area for block ``block_id`` of ``pattern``.

    Every pixel of the window marked lost in the pattern (or in ``lost`` when
    given) is a loss sample.
    """
    image = np.asarray(image)
    blocks = pattern.blocks(image.shape)
    if not 0 <= block_id < len(blocks):
        raise IndexError(f"block {block_id} outside the pattern ({len(blocks)} blocks)")
    if lost is None:
        lost = pattern.mask(image.shape)
    rs, cs = window_bounds(image.shape, blocks[block_id], pattern.block_size, pattern.frame)
    return DataArea(image[rs, cs], lost[rs, cs])


@dataclass
class BlockResult:
    block_id: int
    origin: tuple[int, int]
    window: tuple[slice, slice]
    values: np.ndarray          # quantized values for the lost pixels of the window
    lost: np.ndarray            # lost-pixel mask inside the window
    trace: IterationTrace | None
    seconds: float
    psnr_db: float | None = None


@dataclass
class ConcealmentReport:
    blocks: list[BlockResult] = field(default_factory=list)
    aggregate_psnr: float | None = None
    seconds: float = 0.0

    @property
    def block_psnr(self) -> list[float | None]:
        return [b.psnr_db for b in self.blocks]

    @property
    def traces(self) -> list[IterationTrace | None]:
        return [b.trace for b in self.blocks]

    def psnr_curve(self) -> np.ndarray:
        """Per-iteration PSNR pooled over the lost pixels of every block."""
        traces = [b.trace for b in self.blocks if b.trace is not None]
        if not traces:
            raise ValueError("no traces recorded")
        sse = np.sum([t.sse_curve for t in traces], axis=0)
        if np.isnan(sse).any():
            raise ValueError("traces carry no PSNR data (no reference given)")
        count = sum(int(b.lost.sum()) for b in self.blocks)
        return np.array([psnr_from_sse(s, count) for s in sse])

    def saturation_iterations(self, delta: float = 0.25) -> int:
        return saturation_iterations(self.psnr_curve(), delta)


def _conceal_window(samples, lost, weights_scale, method, config, reference,
                    score_mask=None):
    """Run one engine on one window; returns (float model, trace)."""
    area = DataArea(samples, lost)
    weights = build_isotropic_weights(area, config.rho_hat)
    if weights_scale is not None:
        weights = weights.scaled(weights_scale[0], weights_scale[1])
    if config.iterations == 0:
        return np.zeros(area.shape), None
    run = METHODS[method]
    model, trace = run(area, weights, build_dictionary(area, weights), config,
                       reference=reference, score_mask=score_mask)
    return model.values, trace


def _isolated_block(args):
    block_id, origin, window, samples, lost, reference, method, config = args
    t0 = time.perf_counter()
    try:
        model, trace = _conceal_window(samples, lost, None, method, config, reference)
    except Exception as exc:
        raise RuntimeError(f"block {block_id} at {origin}: {exc}") from exc
    return BlockResult(block_id, origin, window, quantize(model[lost]), lost, trace,
                       time.perf_counter() - t0)


def _check(image, reference, method):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("expected a 2D grayscale image")
    if reference is not None:
        reference = np.asarray(reference, dtype=np.float64)
        if reference.shape != image.shape:
            raise ValueError(f"reference shape {reference.shape} != image shape {image.shape}")
    return image, reference


def _finish(image, lost_all, reference, results, t0):
    out = np.array(image, dtype=np.uint8, copy=True)
    for res in results:
        out[res.window][res.lost] = res.values
    report = ConcealmentReport(results)
    if reference is not None and lost_all.any():
        for res in results:
            ref = reference[res.window][res.lost]
            res.psnr_db = psnr(ref, res.values.astype(np.float64))
        report.aggregate_psnr = psnr(reference, out.astype(np.float64), lost_all)
    report.seconds = time.perf_counter() - t0
    return out, report


def conceal_image(image, pattern: LossPattern, method: str = "muse",
                  config: ExtrapolationConfig = ExtrapolationConfig(),
                  reference=None, jobs: int = 1):
    """Conceal every block of an isolated loss pattern.

    Returns ``(concealed uint8 image, ConcealmentReport)``. Support pixels are
    copied unchanged. With ``reference`` the report carries per-block and
    pooled PSNR plus per-iteration curves.
    """
    t0 = time.perf_counter()
    image, reference = _check(image, reference, method)
    lost_all = pattern.mask(image.shape)
    tasks = []
    for i, origin in enumerate(pattern.blocks(image.shape)):
        window = window_bounds(image.shape, origin, pattern.block_size, pattern.frame)
        ref = None if reference is None else reference[window]
        tasks.append((i, origin, window, image[window], lost_all[window], ref, method, config))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_isolated_block, tasks))
    else:
        results = [_isolated_block(t) for t in tasks]
    return _finish(image, lost_all, reference, results, t0)


def _tiles(lost: np.ndarray, size: int) -> list[tuple[int, int, int, int]]:
    """Tiles covering each connected lost region, components in raster order."""
    labels, _ = ndimage.label(lost)
    boxes = ndimage.find_objects(labels)
    boxes.sort(key=lambda s: (s[0].start, s[1].start))
    tiles = []
    for rs, cs in boxes:
        for r in range(rs.start, rs.stop, size):
            for c in range(cs.start, cs.stop, size):
                tiles.append((r, c, min(size, rs.stop - r), min(size, cs.stop - c)))
    return tiles


def conceal_sequential(image, lost, method: str = "muse",
                       config: ExtrapolationConfig = ExtrapolationConfig(),
                       concealed_weight: float = 0.5, block_size: int = 16,
                       frame: int = 16, reference=None):
    """Conceal an arbitrary loss mask tile by tile.

    Concealed pixels become support for later tiles with their weight
    multiplied by ``concealed_weight``.
    """
    t0 = time.perf_counter()
    image, reference = _check(image, reference, method)
    lost = np.asarray(lost, dtype=bool)
    if lost.shape != image.shape:
        raise ValueError(f"mask shape {lost.shape} != image shape {image.shape}")
    if not 0 <= concealed_weight <= 1:
        raise ValueError("concealed_weight must be in [0, 1]")
    work = np.array(image, dtype=np.uint8, copy=True)
    pending = lost.copy()
    concealed = np.zeros_like(lost)
    results = []
    for i, (r, c, h, w) in enumerate(_tiles(lost, block_size)):
        window = window_bounds(image.shape, (r, c), (h, w), frame)
        t1 = time.perf_counter()
        tile = np.zeros_like(lost)
        tile[r:r + h, c:c + w] = True
        win_lost = pending[window]
        # only this tile is written; other pending pixels stay lost
        write = win_lost & tile[window]
        scale = (concealed[window], concealed_weight) if concealed[window].any() else None
        ref = None if reference is None else reference[window]
        try:
            model, trace = _conceal_window(work[window], win_lost, scale, method, config,
                                           ref, write)
        except Exception as exc:
            raise RuntimeError(f"tile {i} at {(r, c)}: {exc}") from exc
        values = quantize(model[write])
        work[window][write] = values
        pending[window] &= ~write
        concealed[window] |= write
        results.append(BlockResult(i, (r, c), window, values, write, trace,
                                   time.perf_counter() - t1))
    return _finish(image, lost, reference, results, t0)
