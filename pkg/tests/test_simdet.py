"""Synthetic detector: rendering rules and the severity/energy/mAP chain."""

import numpy as np
import pytest

from dimeval.detection import evaluate_map
from dimeval.energy import EnergyConfig, dataset_energy, image_energy
from dimeval.errors import ValidationError
from dimeval.simdet import SimSpec, render_detections, render_heatmaps, severity_ladder


class TestSimSpec:
    @pytest.mark.parametrize("severity", [-0.1, 1.1, 2.0])
    def test_severity_range(self, severity):
        with pytest.raises(ValidationError):
            SimSpec(severity=severity)

    def test_base_confidence_range(self):
        with pytest.raises(ValidationError):
            SimSpec(severity=0.5, base_confidence=0.0)

    def test_negative_noise(self):
        with pytest.raises(ValidationError):
            SimSpec(severity=0.5, noise_sigma=-0.01)

    def test_stride_positive(self):
        with pytest.raises(ValidationError):
            SimSpec(severity=0.5, grid_stride=0)


class TestHeatmapRendering:
    def test_grid_shape_rounds_up(self, random_gt):
        gt = random_gt(seed=1, n_images=1, image_size=100)
        rendered = render_heatmaps(gt, SimSpec(severity=0.0))
        scale = rendered[0].scales[0]
        assert scale.bg.shape == (13, 13)  # ceil(100 / 8)
        assert scale.cls.shape == (3, 13, 13)

    def test_one_heatmap_per_image_in_order(self, random_gt):
        gt = random_gt(seed=2)
        rendered = render_heatmaps(gt, SimSpec(severity=0.3))
        assert [h.image_id for h in rendered] == [str(i) for i, _, _ in gt.images]

    def test_noiseless_cells_inside_boxes(self, random_gt):
        gt = random_gt(seed=3, n_images=1)
        spec = SimSpec(severity=0.0, noise_sigma=0.0)
        scale = render_heatmaps(gt, spec)[0].scales[0]
        inside = scale.bg < 0.5
        assert inside.any()
        assert np.allclose(scale.bg[inside], 1.0 - 0.95, atol=1e-7)
        assert np.allclose(scale.bg[~inside], 1.0, atol=0)
        # the matching class map carries the same signal
        assert np.allclose(scale.cls.max(axis=0)[inside], 0.95, atol=1e-7)
        assert np.allclose(scale.cls[:, ~inside], 0.0, atol=0)

    def test_full_severity_flattens_signal(self, random_gt):
        gt = random_gt(seed=4, n_images=1)
        spec = SimSpec(severity=1.0, noise_sigma=0.0)
        scale = render_heatmaps(gt, spec)[0].scales[0]
        assert np.allclose(scale.bg, 1.0, atol=0)
        assert np.allclose(scale.cls, 0.0, atol=0)

    def test_box_missing_all_cell_centers_leaves_floor(self):
        from dimeval.detection import GroundTruthSet, GtBox

        gt = GroundTruthSet(
            images=((1, 32.0, 32.0),),
            annotations=(GtBox(image_id=1, category_id=1, bbox=(5.0, 5.0, 2.0, 2.0)),),
            categories=(1,),
        )
        # centers sit at 4, 12, 20, 28; the box [5, 7) covers none of them
        scale = render_heatmaps(gt, SimSpec(severity=0.0, noise_sigma=0.0))[0].scales[0]
        assert np.allclose(scale.bg, 1.0, atol=0)

    def test_deterministic_per_spec(self, random_gt):
        gt = random_gt(seed=5)
        spec = SimSpec(severity=0.4, seed=9)
        first = render_heatmaps(gt, spec)
        second = render_heatmaps(gt, spec)
        for a, b in zip(first, second):
            assert np.array_equal(a.scales[0].bg, b.scales[0].bg)
            assert np.array_equal(a.scales[0].cls, b.scales[0].cls)

    def test_seed_changes_noise(self, random_gt):
        gt = random_gt(seed=6)
        first = render_heatmaps(gt, SimSpec(severity=0.4, seed=0))
        second = render_heatmaps(gt, SimSpec(severity=0.4, seed=1))
        assert not np.array_equal(first[0].scales[0].bg, second[0].scales[0].bg)

    def test_heavy_noise_stays_in_range(self, random_gt):
        gt = random_gt(seed=7, n_images=2)
        rendered = render_heatmaps(gt, SimSpec(severity=0.5, noise_sigma=0.5))
        for h in rendered:
            assert float(h.scales[0].bg.min()) >= 0.0
            assert float(h.scales[0].bg.max()) <= 1.0
            assert float(h.scales[0].cls.min()) >= 0.0
            assert float(h.scales[0].cls.max()) <= 1.0


class TestDetectionRendering:
    def test_noiseless_zero_severity_reproduces_truth(self, random_gt):
        gt = random_gt(seed=8)
        det = render_detections(gt, SimSpec(severity=0.0, noise_sigma=0.0))
        n_boxes = sum(1 for a in gt.annotations if not a.ignore)
        assert len(det.detections) == n_boxes
        for ann, d in zip(gt.annotations, det.detections):
            assert d.image_id == ann.image_id
            assert d.category_id == ann.category_id
            assert d.bbox == pytest.approx(ann.bbox, abs=1e-9)
            assert d.score == 0.95

    def test_perfect_detections_score_full_map(self, random_gt):
        gt = random_gt(seed=9)
        det = render_detections(gt, SimSpec(severity=0.0, noise_sigma=0.0))
        assert evaluate_map(gt, det).mAP == 1.0

    def test_noiseless_full_severity_drops_everything(self, random_gt):
        gt = random_gt(seed=10)
        det = render_detections(gt, SimSpec(severity=1.0, noise_sigma=0.0))
        assert det.detections == ()

    def test_score_threshold_is_exact(self, random_gt):
        gt = random_gt(seed=11)
        # signal = 0.95 * (1 - 0.95) = 0.0475, just under the 0.05 cutoff
        det = render_detections(gt, SimSpec(severity=0.95, noise_sigma=0.0))
        assert det.detections == ()

    def test_jitter_bounded_by_severity(self, random_gt):
        gt = random_gt(seed=12)
        severity = 0.5
        det = render_detections(gt, SimSpec(severity=severity, noise_sigma=0.0))
        assert len(det.detections) == len(gt.annotations)
        for ann, d in zip(gt.annotations, det.detections):
            x, y, w, h = ann.bbox
            bound_x = severity * 0.1 * w + 1e-9
            bound_y = severity * 0.1 * h + 1e-9
            assert abs(d.bbox[0] - x) <= bound_x
            assert abs(d.bbox[1] - y) <= bound_y
            assert abs((d.bbox[0] + d.bbox[2]) - (x + w)) <= bound_x
            assert abs((d.bbox[1] + d.bbox[3]) - (y + h)) <= bound_y

    def test_deterministic_per_spec(self, random_gt):
        gt = random_gt(seed=13)
        spec = SimSpec(severity=0.3, seed=4)
        assert render_detections(gt, spec) == render_detections(gt, spec)


class TestSeverityLadder:
    def test_five_levels(self):
        assert severity_ladder(5) == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_endpoints(self):
        for n in (2, 3, 7):
            ladder = severity_ladder(n)
            assert ladder[0] == 0.0
            assert ladder[-1] == 1.0
            assert ladder == sorted(ladder)

    def test_too_short(self):
        with pytest.raises(ValidationError):
            severity_ladder(1)


class TestSeverityChain:
    """Degrading the synthetic detector must raise energy and lower mAP."""

    def test_energy_strictly_increases_with_severity(self, random_gt):
        gt = random_gt(seed=14)
        config = EnergyConfig(temperature=0.01)
        energies = []
        for severity in severity_ladder(5):
            rendered = render_heatmaps(gt, SimSpec(severity=severity))
            energies.append(dataset_energy(rendered, config).dataset_energy)
        assert all(a < b for a, b in zip(energies, energies[1:]))

    def test_map_never_increases_with_severity(self, random_gt):
        gt = random_gt(seed=15)
        values = []
        for severity in severity_ladder(5):
            det = render_detections(gt, SimSpec(severity=severity))
            values.append(evaluate_map(gt, det).mAP)
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[0] > values[-1]

    def test_single_image_energy_orders_two_severities(self, random_gt):
        gt = random_gt(seed=16, n_images=1)
        clean = render_heatmaps(gt, SimSpec(severity=0.1))[0]
        dirty = render_heatmaps(gt, SimSpec(severity=0.9))[0]
        assert image_energy(clean) < image_energy(dirty)
