"""Reproduce the temperature ablation with the command-line interface.

Everything here shells out to `dimeval` subcommands, so it doubles as a
smoke test of the installed entry point: synthesize detector outputs at
three severities, compute each severity's mAP, then sweep the energy
temperature and correlate against those mAP values.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from dimeval import ground_truth_from_coco, save_ground_truth

scratch = Path(tempfile.mkdtemp(prefix="dimeval_sweep_demo_"))


def cli(*args):
    result = subprocess.run(
        [sys.executable, "-m", "dimeval", *map(str, args)],
        capture_output=True,
        text=True,
        check=True,
    )
    return result.stdout


# a 20-image ground truth, one centered box per image
doc = {
    "images": [{"id": n, "width": 64, "height": 64} for n in range(1, 21)],
    "annotations": [
        {"id": n, "image_id": n, "category_id": 1 + n % 2, "bbox": [16, 16, 32, 32]}
        for n in range(1, 21)
    ],
    "categories": [{"id": 1}, {"id": 2}],
}
gt_path = scratch / "gt.json"
save_ground_truth(ground_truth_from_coco(doc), gt_path)

map_rows = []
dirs = []
for tag, severity in (("mild", 0.1), ("medium", 0.5), ("harsh", 0.9)):
    heat_dir = scratch / tag
    det_path = scratch / f"det_{tag}.json"
    print(cli(
        "simdet", "--gt", gt_path, "--severity", severity,
        "--out-heatmaps", heat_dir, "--out-dets", det_path,
    ).strip())
    report = json.loads(cli("map", "--gt", gt_path, "--det", det_path, "--json"))
    map_rows.append(f"{tag},{report['mAP']}")
    dirs.append(heat_dir)

map_file = scratch / "map_values.csv"
map_file.write_text("\n".join(map_rows) + "\n")

print()
print(cli(
    "sweep", "--heatmaps", *dirs, "--map-values", map_file,
    "--temperatures", "0.1", "0.01", "0.001", "0.0001",
    "--out", scratch / "sweep.csv",
))
print("per-temperature rows written to", scratch / "sweep.csv")
print((scratch / "sweep.csv").read_text())
