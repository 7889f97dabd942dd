"""8-bit grayscale image I/O: binary PGM (read/write) and PNG (read)."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

__all__ = ["read_pgm", "write_pgm", "read_image", "read_mask", "write_mask"]

_PGM_HEADER = re.compile(rb"P5(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)"
                         rb"(?:\s+|#[^\n]*\n)+?(\d+)\s")


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ValueError(f"{path}: not a binary (P5) PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM (maxval 255) is supported, got {maxval}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=m.end())
    return pixels.reshape(height, width).copy()


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("PGM images must be 2D")
    if image.dtype != np.uint8:
        if image.min() < 0 or image.max() > 255 or not np.all(image == np.round(image)):
            raise ValueError("image values must be integers in [0, 255]")
        image = image.astype(np.uint8)
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(np.ascontiguousarray(image).tobytes())


def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM or PNG, detected from the file signature."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic.startswith(b"P5"):
        return read_pgm(path)
    if magic.startswith(b"\x89PNG\r\n\x1a\n"):
        from PIL import Image

        with Image.open(path) as im:
            if im.mode != "L":
                raise ValueError(f"{path}: expected an 8-bit grayscale PNG, got mode {im.mode}")
            return np.asarray(im, dtype=np.uint8).copy()
    raise ValueError(f"{path}: unsupported image format (expected PGM P5 or PNG)")


def read_mask(path) -> np.ndarray:
    """Loss mask from an image: 0 is lost, 255 is support. Returns True where lost."""
    img = read_image(path)
    if not np.all((img == 0) | (img == 255)):
        raise ValueError(f"{path}: mask pixels must be 0 (lost) or 255 (support)")
    return img == 0


def write_mask(path, lost: np.ndarray) -> None:
    write_pgm(path, np.where(np.asarray(lost, dtype=bool), 0, 255).astype(np.uint8))
