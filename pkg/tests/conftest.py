import numpy as np
import pytest

from dimeval.detection import ground_truth_from_coco
from dimeval.heatmaps import DetectorHeatmaps, ScaleMap


@pytest.fixture
def make_heatmaps():
    """Factory for single- or multi-scale heatmaps from raw arrays."""

    def build(cls, bg, image_id="img", extra_scales=()):
        scales = [ScaleMap(bg=np.asarray(bg), cls=np.asarray(cls))]
        for extra_cls, extra_bg in extra_scales:
            scales.append(ScaleMap(bg=np.asarray(extra_bg), cls=np.asarray(extra_cls)))
        return DetectorHeatmaps(image_id=image_id, scales=tuple(scales))

    return build


@pytest.fixture
def random_gt():
    """Factory for a randomized multi-image ground-truth set.

    Boxes are kept well separated (no two boxes of one image overlap), so
    matching behaviour is unambiguous for oracle comparisons.
    """

    def build(seed, n_images=5, max_boxes=4, n_categories=3, image_size=96):
        rng = np.random.default_rng(seed)
        images, annotations = [], []
        ann_id = 1
        cell = image_size // 2
        for image_id in range(1, n_images + 1):
            images.append({"id": image_id, "width": image_size, "height": image_size})
            # one box per quadrant at most: separation by construction
            quadrants = [(0, 0), (cell, 0), (0, cell), (cell, cell)]
            rng.shuffle(quadrants)
            for qx, qy in quadrants[: rng.integers(1, max_boxes + 1)]:
                bw = float(rng.uniform(cell * 0.35, cell * 0.7))
                bh = float(rng.uniform(cell * 0.35, cell * 0.7))
                x = qx + float(rng.uniform(0, cell - bw))
                y = qy + float(rng.uniform(0, cell - bh))
                annotations.append(
                    {
                        "id": ann_id,
                        "image_id": image_id,
                        "category_id": int(rng.integers(1, n_categories + 1)),
                        "bbox": [x, y, bw, bh],
                    }
                )
                ann_id += 1
        doc = {
            "images": images,
            "annotations": annotations,
            "categories": [{"id": c} for c in range(1, n_categories + 1)],
        }
        return ground_truth_from_coco(doc)

    return build
