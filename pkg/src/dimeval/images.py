"""Lossless 8-bit RGB raster I/O with a normalized float representation.

Everything downstream (distortions, color conversions) works on float arrays
in [0, 1]; quantization back to 8 bits uses round-half-up so that the
PNG round-trip is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ValidationError


def to_float(raster8: np.ndarray) -> np.ndarray:
    """Map 8-bit values to reals via v / 255."""
    return np.asarray(raster8, dtype=np.float64) / 255.0


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] reals back to 8 bits with round-half-up."""
    img = np.asarray(img, dtype=np.float64)
    return np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)


def read_image(path: str | Path) -> np.ndarray:
    """Load an RGB image as an (H, W, 3) float64 array in [0, 1]."""
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"unsupported image format: {path}") from exc
    return to_float(arr)


def write_image(path: str | Path, img: np.ndarray) -> None:
    """Write an (H, W, 3) [0, 1] float array as a lossless 8-bit PNG."""
    path = Path(path)
    if path.suffix.lower() != ".png":
        raise FormatError(f"only lossless .png output is supported, got {path.suffix!r}")
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValidationError(f"expected (H, W, 3) array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValidationError("image contains non-finite values")
    Image.fromarray(to_uint8(img), mode="RGB").save(path, format="PNG")
