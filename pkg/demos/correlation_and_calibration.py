"""Correlate energy with mAP on a synthetic severity ladder, then calibrate.

This is the whole pipeline in one script, no real detector required:

  1. invent a ground-truth dataset,
  2. simulate detector outputs at increasing degradation severity,
  3. score heatmaps (energy) and detections (mAP) per severity,
  4. check the rank correlation, fit the linear energy->mAP map,
  5. predict mAP for a held-out severity from its energy alone.
"""

import numpy as np

from dimeval import (
    EnergyConfig,
    PairedSeries,
    SimSpec,
    dataset_energy,
    evaluate_map,
    fit_calibration,
    ground_truth_from_coco,
    pearson,
    predict_map,
    render_detections,
    render_heatmaps,
    severity_ladder,
    spearman,
)

rng = np.random.default_rng(3)
images, annotations = [], []
for image_id in range(1, 31):
    images.append({"id": image_id, "width": 96, "height": 96})
    for quadrant, (qx, qy) in enumerate([(0, 0), (48, 0), (0, 48), (48, 48)]):
        if rng.uniform() < 0.4:
            continue
        annotations.append(
            {
                "id": len(annotations) + 1,
                "image_id": image_id,
                "category_id": int(rng.integers(1, 4)),
                "bbox": [qx + 8.0, qy + 8.0, 28.0, 28.0],
            }
        )
gt = ground_truth_from_coco(
    {"images": images, "annotations": annotations, "categories": [{"id": c} for c in (1, 2, 3)]}
)

config = EnergyConfig(temperature=0.01)
ladder = severity_ladder(12)
rows = []
print("severity   energy      mAP")
for severity in ladder:
    spec = SimSpec(severity=severity)
    energy_value = dataset_energy(render_heatmaps(gt, spec), config).dataset_energy
    map_value = evaluate_map(gt, render_detections(gt, spec)).mAP
    rows.append((f"s{severity:.2f}", energy_value, map_value))
    print(f"  {severity:.2f}   {energy_value:9.4f}   {map_value:.4f}")

series = PairedSeries(tuple(rows))
rho, p = spearman(series)
print(f"\npearson r  = {pearson(series):+.4f}")
print(f"spearman   = {rho:+.4f} (p = {p:.2e})")

# Hold the middle severity out, fit on the rest, predict it back.
held_out = rows[len(rows) // 2]
training = PairedSeries(tuple(r for r in rows if r is not held_out))
model = fit_calibration(training)
predicted = predict_map(model, held_out[1])
print(f"\ncalibration: mAP ~ {model.slope:.4f} * E + {model.intercept:.4f}"
      f"  (r^2 = {model.r_squared:.4f})")
print(f"held-out {held_out[0]}: true mAP {held_out[2]:.4f}, predicted {predicted:.4f}")
