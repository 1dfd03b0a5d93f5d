"""Detector heatmap containers and the LMEH binary interchange format.

A detector is run elsewhere; what this toolkit consumes are its per-image
confidence maps: a background probability map per scale plus one confidence
map per class.  Maps are stored as probabilities in [0, 1] (post-activation),
never raw logits, and serialized as little-endian float32 so that round-trips
are bit-exact.

LMEH layout (all integers unsigned 32-bit little-endian):

    magic "LMEH" | version=1 | S (scale count) | K (class count)
    then per scale: H | W | H*W float32 bg (row-major)
                    | K*H*W float32 class maps (class-major, then row-major)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"LMEH"
VERSION = 1

_HEADER = struct.Struct("<4sIII")
_SCALE_HEADER = struct.Struct("<II")


def _check_unit_range(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValidationError(f"{name} has values outside [0, 1]")


@dataclass(frozen=True)
class ScaleMap:
    """One prediction scale: background map ``bg`` (H, W) and class maps ``cls`` (K, H, W)."""

    bg: np.ndarray
    cls: np.ndarray

    def __post_init__(self):
        bg = np.ascontiguousarray(np.asarray(self.bg, dtype=np.float32))
        cls = np.ascontiguousarray(np.asarray(self.cls, dtype=np.float32))
        if bg.ndim != 2:
            raise ValidationError(f"bg must be 2-D (H, W), got shape {bg.shape}")
        if cls.ndim != 3:
            raise ValidationError(f"cls must be 3-D (K, H, W), got shape {cls.shape}")
        if cls.shape[1:] != bg.shape:
            raise ValidationError(
                f"cls spatial shape {cls.shape[1:]} does not match bg shape {bg.shape}"
            )
        if bg.shape[0] < 1 or bg.shape[1] < 1 or cls.shape[0] < 1:
            raise ValidationError("H, W and K must all be >= 1")
        _check_unit_range("bg", bg)
        _check_unit_range("cls", cls)
        object.__setattr__(self, "bg", bg)
        object.__setattr__(self, "cls", cls)

    @property
    def height(self) -> int:
        return self.bg.shape[0]

    @property
    def width(self) -> int:
        return self.bg.shape[1]

    @property
    def class_count(self) -> int:
        return self.cls.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScaleMap):
            return NotImplemented
        return (
            self.bg.shape == other.bg.shape
            and self.cls.shape == other.cls.shape
            and np.array_equal(self.bg, other.bg)
            and np.array_equal(self.cls, other.cls)
        )


@dataclass(frozen=True)
class DetectorHeatmaps:
    """All prediction maps a detector emitted for one image."""

    image_id: str
    scales: tuple[ScaleMap, ...] = field(default_factory=tuple)

    def __post_init__(self):
        scales = tuple(self.scales)
        if not scales:
            raise ValidationError("at least one scale is required")
        k0 = scales[0].class_count
        for s in scales[1:]:
            if s.class_count != k0:
                raise ValidationError(
                    f"all scales must share one class count, got {k0} and {s.class_count}"
                )
        object.__setattr__(self, "scales", scales)

    @property
    def class_count(self) -> int:
        return self.scales[0].class_count


def write_heatmaps(heatmaps: DetectorHeatmaps, destination: BinaryIO | str | Path) -> None:
    """Serialize ``heatmaps`` in LMEH format to a binary sink or path."""
    if isinstance(destination, (str, Path)):
        with open(destination, "wb") as fh:
            write_heatmaps(heatmaps, fh)
        return
    k = heatmaps.class_count
    destination.write(_HEADER.pack(MAGIC, VERSION, len(heatmaps.scales), k))
    for scale in heatmaps.scales:
        destination.write(_SCALE_HEADER.pack(scale.height, scale.width))
        destination.write(scale.bg.astype("<f4", copy=False).tobytes(order="C"))
        destination.write(scale.cls.astype("<f4", copy=False).tobytes(order="C"))


def read_heatmaps(source: BinaryIO | str | Path, image_id: str | None = None) -> DetectorHeatmaps:
    """Parse an LMEH stream, validating structure and value ranges.

    ``image_id`` defaults to the file stem when reading from a path and to
    ``""`` when reading from a raw stream (the format itself carries no id).
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if image_id is None:
            image_id = path.stem
        with open(path, "rb") as fh:
            return read_heatmaps(fh, image_id=image_id)

    data = source.read()
    if len(data) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, n_scales, k = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    if n_scales < 1:
        raise ValidationError("scale count must be >= 1")
    if k < 1:
        raise ValidationError("class count must be >= 1")

    offset = _HEADER.size
    scales = []
    for _ in range(n_scales):
        if offset + _SCALE_HEADER.size > len(data):
            raise FormatError("truncated scale header")
        h, w = _SCALE_HEADER.unpack_from(data, offset)
        offset += _SCALE_HEADER.size
        if h < 1 or w < 1:
            raise ValidationError("H and W must be >= 1")
        n_bg = h * w
        n_cls = k * n_bg
        nbytes = 4 * (n_bg + n_cls)
        if offset + nbytes > len(data):
            raise FormatError("truncated payload")
        bg = np.frombuffer(data, dtype="<f4", count=n_bg, offset=offset).reshape(h, w)
        cls = np.frombuffer(data, dtype="<f4", count=n_cls, offset=offset + 4 * n_bg)
        scales.append(ScaleMap(bg=bg.copy(), cls=cls.reshape(k, h, w).copy()))
        offset += nbytes
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after last scale")
    return DetectorHeatmaps(image_id=image_id or "", scales=tuple(scales))


def read_heatmap_dir(directory: str | Path, suffix: str = ".lmeh") -> list[DetectorHeatmaps]:
    """Load every heatmap file in a directory, sorted by file name."""
    directory = Path(directory)
    paths = sorted(p for p in directory.iterdir() if p.suffix == suffix)
    if not paths:
        raise ValidationError(f"no {suffix} files found in {directory}")
    return [read_heatmaps(p) for p in paths]


def iter_image_ids(heatmaps: Iterable[DetectorHeatmaps]) -> list[str]:
    return [h.image_id for h in heatmaps]
