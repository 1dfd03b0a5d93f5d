"""COCO-protocol mAP@[.5:.95] and AP50 over axis-aligned boxes.

Boxes are [x, y, w, h] in pixels.  Matching is greedy per image and
category: detections in descending score order claim the unmatched,
non-ignored ground truth with the highest IoU at or above the threshold.
Detections whose only matches are ignore-flagged ground truths count as
neither true nor false positives.  Precision is enveloped and sampled at 101
recall points; AP averages over categories that have ground truth, mAP over
the ten IoU thresholds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .errors import ValidationError

IOU_THRESHOLDS = tuple(np.arange(50, 100, 5) / 100.0)  # 0.50, 0.55, ... 0.95
RECALL_POINTS = np.arange(101) / 100.0
MAX_DETECTIONS_PER_IMAGE = 100

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class GtBox:
    image_id: Hashable
    category_id: Hashable
    bbox: Box
    ignore: bool = False


@dataclass(frozen=True)
class Detection:
    image_id: Hashable
    category_id: Hashable
    bbox: Box
    score: float


@dataclass(frozen=True)
class GroundTruthSet:
    """Images, annotations and the category vocabulary of one dataset."""

    images: tuple[tuple[Hashable, float, float], ...]
    annotations: tuple[GtBox, ...]
    categories: tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "categories", tuple(self.categories))
        image_ids = {i for i, _, _ in self.images}
        if len(image_ids) != len(self.images):
            raise ValidationError("duplicate image ids")
        cat_ids = set(self.categories)
        for ann in self.annotations:
            if ann.bbox[2] < 0 or ann.bbox[3] < 0:
                raise ValidationError(f"negative box size in annotation {ann}")
            if ann.image_id not in image_ids:
                raise ValidationError(f"annotation references unknown image {ann.image_id!r}")
            if ann.category_id not in cat_ids:
                raise ValidationError(f"annotation references unknown category {ann.category_id!r}")


@dataclass(frozen=True)
class DetectionSet:
    detections: tuple[Detection, ...]

    def __post_init__(self):
        object.__setattr__(self, "detections", tuple(self.detections))
        for det in self.detections:
            if not 0.0 <= det.score <= 1.0:
                raise ValidationError(f"detection score {det.score} outside [0, 1]")


@dataclass(frozen=True)
class APResult:
    mAP: float
    ap50: float
    per_category: dict[Hashable, float]
    by_threshold: dict[float, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "mAP": self.mAP,
                "ap50": self.ap50,
                "per_category": {str(k): v for k, v in self.per_category.items()},
                "by_threshold": {f"{t:.2f}": v for t, v in self.by_threshold.items()},
            },
            indent=2,
            sort_keys=True,
        )


def iou(a: Sequence[float], b: Sequence[float]) -> float:
    """Intersection over union of two [x, y, w, h] boxes; 0 when the union is empty."""
    ax1, ay1, aw, ah = a
    bx1, by1, bw, bh = b
    ix1 = max(ax1, bx1)
    iy1 = max(ay1, by1)
    ix2 = min(ax1 + aw, bx1 + bw)
    iy2 = min(ay1 + ah, by1 + bh)
    inter = max(0.0, ix2 - ix1) * max(0.0, iy2 - iy1)
    union = aw * ah + bw * bh - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def interpolated_ap(tp_flags: np.ndarray, n_positive: int) -> float:
    """101-point interpolated AP from ordered hit flags.

    ``tp_flags`` follows descending score order with neutral (ignored)
    detections already removed.
    """
    if n_positive <= 0:
        raise ValidationError("n_positive must be >= 1")
    if tp_flags.size == 0:
        return 0.0
    tp = np.cumsum(tp_flags)
    fp = np.cumsum(1 - tp_flags)
    recall = tp / n_positive
    precision = tp / (tp + fp)
    # envelope: best precision at this recall or beyond
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    indices = np.searchsorted(recall, RECALL_POINTS, side="left")
    sampled = np.where(indices < envelope.size, envelope[np.minimum(indices, envelope.size - 1)], 0.0)
    return float(np.mean(sampled))


def _cap_per_image(detections: Sequence[Detection]) -> list[tuple[int, Detection]]:
    """Keep the top-scoring 100 detections of each image (ties by input order)."""
    by_image: dict[Hashable, list[tuple[int, Detection]]] = {}
    for idx, det in enumerate(detections):
        by_image.setdefault(det.image_id, []).append((idx, det))
    kept: list[tuple[int, Detection]] = []
    for dets in by_image.values():
        dets.sort(key=lambda pair: (-pair[1].score, pair[0]))
        kept.extend(dets[:MAX_DETECTIONS_PER_IMAGE])
    kept.sort(key=lambda pair: pair[0])
    return kept


def _greedy_flags(
    dets: list[tuple[int, Detection]],
    gts_by_image: dict[Hashable, list[GtBox]],
    threshold: float,
) -> np.ndarray:
    """TP(1)/FP(0) flags in score order, neutral detections dropped."""
    matched: dict[Hashable, set[int]] = {img: set() for img in gts_by_image}
    flags: list[int] = []
    for _, det in dets:
        gts = gts_by_image.get(det.image_id, [])
        best_iou = 0.0
        best_gt = -1
        ignore_hit = False
        for gt_idx, gt in enumerate(gts):
            overlap = iou(det.bbox, gt.bbox)
            if overlap < threshold:
                continue
            if gt.ignore:
                ignore_hit = True
            elif gt_idx not in matched[det.image_id] and overlap > best_iou:
                best_iou = overlap
                best_gt = gt_idx
        if best_gt >= 0:
            matched[det.image_id].add(best_gt)
            flags.append(1)
        elif not ignore_hit:
            flags.append(0)
    return np.asarray(flags, dtype=np.float64)


def evaluate_map(gt: GroundTruthSet, det: DetectionSet) -> APResult:
    """COCO-protocol evaluation of a detection set against ground truth."""
    known_images = {i for i, _, _ in gt.images}
    known_categories = set(gt.categories)
    for d in det.detections:
        if d.category_id not in known_categories:
            raise ValidationError(f"detection references unknown category {d.category_id!r}")
        if d.image_id not in known_images:
            raise ValidationError(f"detection references unknown image {d.image_id!r}")

    capped = _cap_per_image(det.detections)

    # categories scored = those with at least one non-ignored ground truth
    n_positive: dict[Hashable, int] = {}
    gts_by_cat_image: dict[Hashable, dict[Hashable, list[GtBox]]] = {}
    for ann in gt.annotations:
        gts_by_cat_image.setdefault(ann.category_id, {}).setdefault(ann.image_id, []).append(ann)
        if not ann.ignore:
            n_positive[ann.category_id] = n_positive.get(ann.category_id, 0) + 1
    scored_categories = sorted(n_positive, key=str)
    if not scored_categories:
        raise ValidationError("ground truth contains no non-ignored annotations")

    dets_by_cat: dict[Hashable, list[tuple[int, Detection]]] = {c: [] for c in scored_categories}
    for idx, d in capped:
        if d.category_id in dets_by_cat:
            dets_by_cat[d.category_id].append((idx, d))
    for dets in dets_by_cat.values():
        dets.sort(key=lambda pair: (-pair[1].score, pair[0]))

    ap = np.zeros((len(IOU_THRESHOLDS), len(scored_categories)))
    for ti, threshold in enumerate(IOU_THRESHOLDS):
        for ci, cat in enumerate(scored_categories):
            flags = _greedy_flags(dets_by_cat[cat], gts_by_cat_image[cat], threshold)
            ap[ti, ci] = interpolated_ap(flags, n_positive[cat])

    by_threshold = {t: float(np.mean(ap[ti])) for ti, t in enumerate(IOU_THRESHOLDS)}
    return APResult(
        mAP=float(np.mean([by_threshold[t] for t in IOU_THRESHOLDS])),
        ap50=by_threshold[IOU_THRESHOLDS[0]],
        per_category={cat: float(np.mean(ap[:, ci])) for ci, cat in enumerate(scored_categories)},
        by_threshold=by_threshold,
    )


# ---------------------------------------------------------------------------
# COCO-style document I/O


def ground_truth_from_coco(doc: dict) -> GroundTruthSet:
    images = tuple(
        (img["id"], float(img.get("width", 0)), float(img.get("height", 0)))
        for img in doc["images"]
    )
    annotations = tuple(
        GtBox(
            image_id=ann["image_id"],
            category_id=ann["category_id"],
            bbox=tuple(float(v) for v in ann["bbox"]),
            ignore=bool(ann.get("ignore", ann.get("iscrowd", 0))),
        )
        for ann in doc["annotations"]
    )
    categories = tuple(cat["id"] for cat in doc["categories"])
    return GroundTruthSet(images=images, annotations=annotations, categories=categories)


def detections_from_coco(doc: list) -> DetectionSet:
    return DetectionSet(
        detections=tuple(
            Detection(
                image_id=d["image_id"],
                category_id=d["category_id"],
                bbox=tuple(float(v) for v in d["bbox"]),
                score=float(d["score"]),
            )
            for d in doc
        )
    )


def load_ground_truth(path: str | Path) -> GroundTruthSet:
    return ground_truth_from_coco(json.loads(Path(path).read_text()))


def load_detections(path: str | Path) -> DetectionSet:
    return detections_from_coco(json.loads(Path(path).read_text()))


def save_detections(det: DetectionSet, path: str | Path) -> None:
    doc = [
        {
            "image_id": d.image_id,
            "category_id": d.category_id,
            "bbox": list(d.bbox),
            "score": d.score,
        }
        for d in det.detections
    ]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def save_ground_truth(gt: GroundTruthSet, path: str | Path) -> None:
    doc = {
        "images": [{"id": i, "width": w, "height": h} for i, w, h in gt.images],
        "annotations": [
            {
                "image_id": a.image_id,
                "category_id": a.category_id,
                "bbox": list(a.bbox),
                "ignore": int(a.ignore),
            }
            for a in gt.annotations
        ],
        "categories": [{"id": c} for c in gt.categories],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
