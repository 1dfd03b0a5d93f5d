"""Synthetic detector for desk-scale end-to-end experiments.

Given ground truth and a severity knob in [0, 1], this renders the heatmaps
and detections an idealized detector would produce on an increasingly
degraded version of the dataset: at severity 0 objects light up near
``base_confidence``, at severity 1 everything sinks into the noise floor.
It exists so the energy-vs-mAP correlation can be exercised without any
neural network.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .detection import Detection, DetectionSet, GroundTruthSet
from .errors import ValidationError
from .heatmaps import DetectorHeatmaps, ScaleMap


@dataclass(frozen=True)
class SimSpec:
    severity: float
    base_confidence: float = 0.95
    noise_sigma: float = 0.02
    grid_stride: int = 8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.severity <= 1.0:
            raise ValidationError(f"severity must be in [0, 1], got {self.severity}")
        if not 0.0 < self.base_confidence <= 1.0:
            raise ValidationError(f"base_confidence must be in (0, 1], got {self.base_confidence}")
        if self.noise_sigma < 0.0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.grid_stride < 1:
            raise ValidationError(f"grid_stride must be >= 1, got {self.grid_stride}")


def _image_rng(spec: SimSpec, image_id: Hashable, stream: str) -> np.random.Generator:
    tag = f"{spec.seed}|{stream}|{image_id}".encode()
    digest = hashlib.sha256(tag).digest()
    return np.random.default_rng(np.random.SeedSequence(int.from_bytes(digest[:16], "little")))


def _signal(rng: np.random.Generator, spec: SimSpec, size) -> np.ndarray:
    raw = spec.base_confidence * (1.0 - spec.severity) + rng.normal(0.0, spec.noise_sigma, size)
    return np.clip(raw, 0.0, 1.0)


def render_heatmaps(gt: GroundTruthSet, spec: SimSpec) -> list[DetectorHeatmaps]:
    """One single-scale heatmap per ground-truth image.

    Cells whose centers fall inside a box carry object signal in both the
    objectness map and that box's class map; everything else sits at the
    noise floor (background probability near 1, class scores near 0).
    """
    cat_index = {cat: k for k, cat in enumerate(gt.categories)}
    boxes_by_image: dict[Hashable, list] = {}
    for ann in gt.annotations:
        if not ann.ignore:
            boxes_by_image.setdefault(ann.image_id, []).append(ann)

    out = []
    for image_id, width, height in gt.images:
        rng = _image_rng(spec, image_id, "heatmaps")
        grid_h = max(1, math.ceil(height / spec.grid_stride))
        grid_w = max(1, math.ceil(width / spec.grid_stride))
        k = len(gt.categories)

        bg = np.clip(1.0 - np.abs(rng.normal(0.0, spec.noise_sigma, (grid_h, grid_w))), 0.0, 1.0)
        cls = np.clip(np.abs(rng.normal(0.0, spec.noise_sigma, (k, grid_h, grid_w))), 0.0, 1.0)

        centers_x = (np.arange(grid_w) + 0.5) * spec.grid_stride
        centers_y = (np.arange(grid_h) + 0.5) * spec.grid_stride
        for ann in boxes_by_image.get(image_id, []):
            x, y, w, h = ann.bbox
            cols = (centers_x >= x) & (centers_x < x + w)
            rows = (centers_y >= y) & (centers_y < y + h)
            inside = np.outer(rows, cols)
            n_inside = int(inside.sum())
            if n_inside == 0:
                continue
            bg[inside] = 1.0 - _signal(rng, spec, n_inside)
            cls[cat_index[ann.category_id]][inside] = _signal(rng, spec, n_inside)

        out.append(
            DetectorHeatmaps(image_id=str(image_id), scales=(ScaleMap(bg=bg, cls=cls),))
        )
    return out


def render_detections(gt: GroundTruthSet, spec: SimSpec) -> DetectionSet:
    """One jittered detection per ground-truth box.

    Scores decay with severity; box corners are jittered uniformly within
    +- severity * 10% of the box size per coordinate.  Detections whose
    score falls below 0.05 are dropped, as a real pipeline would.
    """
    detections = []
    boxes_by_image: dict[Hashable, list] = {}
    for ann in gt.annotations:
        if not ann.ignore:
            boxes_by_image.setdefault(ann.image_id, []).append(ann)

    for image_id, _, _ in gt.images:
        rng = _image_rng(spec, image_id, "detections")
        for ann in boxes_by_image.get(image_id, []):
            x, y, w, h = ann.bbox
            score = float(_signal(rng, spec, None))
            jitter = spec.severity * 0.1
            x1 = x + rng.uniform(-jitter, jitter) * w
            x2 = x + w + rng.uniform(-jitter, jitter) * w
            y1 = y + rng.uniform(-jitter, jitter) * h
            y2 = y + h + rng.uniform(-jitter, jitter) * h
            if score < 0.05:
                continue
            detections.append(
                Detection(
                    image_id=image_id,
                    category_id=ann.category_id,
                    bbox=(x1, y1, x2 - x1, y2 - y1),
                    score=score,
                )
            )
    return DetectionSet(detections=tuple(detections))


def severity_ladder(n_levels: int) -> list[float]:
    """Evenly spaced severities covering [0, 1]."""
    if n_levels < 2:
        raise ValidationError("a ladder needs at least 2 levels")
    return [i / (n_levels - 1) for i in range(n_levels)]
