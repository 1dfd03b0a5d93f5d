"""COCO-protocol mAP on a scene small enough to verify by hand.

One image, two ground-truth boxes, three detections: a perfect hit, a
shifted hit with IoU exactly 0.6, and a confident false positive. The
shifted box passes the 0.50/0.55/0.60 thresholds and fails the rest, which
is visible directly in the per-threshold table.
"""

from dimeval import (
    Detection,
    DetectionSet,
    GroundTruthSet,
    GtBox,
    evaluate_map,
    iou,
)

gt = GroundTruthSet(
    images=((1, 100.0, 100.0),),
    annotations=(
        GtBox(image_id=1, category_id="person", bbox=(0.0, 0.0, 10.0, 10.0)),
        GtBox(image_id=1, category_id="car", bbox=(50.0, 50.0, 20.0, 20.0)),
    ),
    categories=("person", "car"),
)

detections = DetectionSet(
    detections=(
        # vertical shift of 2.5 px on a 10 px box: IoU = 7.5 / 12.5 = 0.6
        Detection(image_id=1, category_id="person", bbox=(0.0, 2.5, 10.0, 10.0), score=0.9),
        Detection(image_id=1, category_id="car", bbox=(50.0, 50.0, 20.0, 20.0), score=0.8),
        Detection(image_id=1, category_id="car", bbox=(10.0, 80.0, 8.0, 8.0), score=0.7),
    )
)

print("IoU of the shifted person box:", iou((0, 0, 10, 10), (0, 2.5, 10, 10)))

result = evaluate_map(gt, detections)
print("\nthreshold  mean AP over categories")
for threshold, value in sorted(result.by_threshold.items()):
    print(f"   {threshold:.2f}        {value:.4f}")

print("\nper category:", {k: round(v, 4) for k, v in result.per_category.items()})
print(f"AP50 = {result.ap50:.4f}   mAP = {result.mAP:.4f}")
print("\nThe person AP is 1 for thresholds up to 0.60 and 0 above; the car geometry")
print("is exact, so its AP hinges only on the false positive's position in the")
print("score ordering (the envelope keeps it at 1 here).")
