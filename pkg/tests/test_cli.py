"""Command-line interface: exit codes, output lines, artifact files."""

import json
import subprocess
import sys

import numpy as np
import pytest

from dimeval import elo, energy, heatmaps
from dimeval.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, run
from dimeval.detection import save_ground_truth
from dimeval.images import write_image
from dimeval.simdet import SimSpec, render_heatmaps


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def line_pairs(tmp_path):
    """Pairs file lying exactly on y = -0.5 x + 0.3."""
    path = tmp_path / "pairs.csv"
    rows = [(f"d{i}", float(x)) for i, x in enumerate((-0.9, -0.5, -0.1, 0.3))]
    path.write_text("".join(f"{label},{x},{-0.5 * x + 0.3}\n" for label, x in rows))
    return path


@pytest.fixture
def heatmap_dir(tmp_path, random_gt):
    """Directory of synthetic heatmap files for one severity level."""

    def build(severity, name):
        gt = random_gt(seed=31)
        directory = tmp_path / name
        directory.mkdir()
        for maps in render_heatmaps(gt, SimSpec(severity=severity)):
            heatmaps.write_heatmaps(maps, directory / f"{maps.image_id}.lmeh")
        return directory

    return build


class TestExitCodes:
    def test_missing_required_flag(self, capsys):
        code, _, err = invoke(capsys, "energy")
        assert code == EXIT_USAGE
        assert "usage" in err

    def test_unknown_subcommand(self, capsys):
        code, _, _ = invoke(capsys, "frobnicate")
        assert code == EXIT_USAGE

    def test_no_subcommand(self, capsys):
        code, _, _ = invoke(capsys)
        assert code == EXIT_USAGE

    def test_missing_input_file(self, capsys, tmp_path):
        code, _, err = invoke(
            capsys, "map", "--gt", str(tmp_path / "absent.json"), "--det", "x.json"
        )
        assert code == EXIT_IO
        assert "error:" in err

    def test_corrupt_heatmap_file(self, capsys, tmp_path):
        directory = tmp_path / "maps"
        directory.mkdir()
        (directory / "bad.lmeh").write_bytes(b"NOPE" + b"\x00" * 20)
        code, _, err = invoke(capsys, "energy", "--heatmaps", str(directory))
        assert code == EXIT_IO
        assert "error:" in err

    def test_zero_variance_pairs(self, capsys, tmp_path):
        path = tmp_path / "pairs.csv"
        path.write_text("a,1.0,0.5\nb,1.0,0.7\nc,1.0,0.9\n")
        code, _, err = invoke(capsys, "correlate", "--pairs", str(path))
        assert code == EXIT_USAGE
        assert "error:" in err

    def test_help_exits_zero(self, capsys):
        code, out, _ = invoke(capsys, "--help")
        assert code == EXIT_OK


class TestCorrelate:
    def test_perfect_line(self, capsys, line_pairs):
        code, out, _ = invoke(capsys, "correlate", "--pairs", str(line_pairs))
        assert code == EXIT_OK
        assert "n=4" in out
        assert "pearson r=-1.000000" in out
        assert "spearman rho=-1.000000" in out

    def test_exact_pvalue(self, capsys, line_pairs):
        code, out, _ = invoke(capsys, "correlate", "--pairs", str(line_pairs), "--exact")
        assert code == EXIT_OK
        # 2 of the 4! rank permutations reach |rho| = 1
        assert f"p={2 / 24:.6g}" in out

    def test_json_output(self, capsys, line_pairs):
        code, out, _ = invoke(capsys, "correlate", "--pairs", str(line_pairs), "--json")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["n"] == 4
        assert doc["pearson"] == pytest.approx(-1.0, abs=1e-12)
        assert doc["spearman"] == pytest.approx(-1.0, abs=1e-12)


class TestCalibrateAndPredict:
    def test_round_trip(self, capsys, line_pairs, tmp_path):
        model_path = tmp_path / "model.json"
        code, out, _ = invoke(
            capsys, "calibrate", "--pairs", str(line_pairs), "--out", str(model_path)
        )
        assert code == EXIT_OK
        assert "slope -0.5" in out
        assert model_path.exists()

        code, out, _ = invoke(
            capsys, "predict", "--model", str(model_path), "--energy", "0"
        )
        assert code == EXIT_OK
        assert "predicted_map 0.300000" in out

    def test_predict_clamps(self, capsys, line_pairs, tmp_path):
        model_path = tmp_path / "model.json"
        invoke(capsys, "calibrate", "--pairs", str(line_pairs), "--out", str(model_path))
        code, out, _ = invoke(
            capsys, "predict", "--model", str(model_path), "--energy", "5", "--json"
        )
        assert code == EXIT_OK
        assert json.loads(out)["predicted_map"] == 0.0


class TestEnergyCommand:
    def test_scores_directory(self, capsys, heatmap_dir, tmp_path):
        directory = heatmap_dir(0.2, "maps_a")
        report_path = tmp_path / "report.json"
        code, out, _ = invoke(
            capsys, "energy", "--heatmaps", str(directory), "--out", str(report_path)
        )
        assert code == EXIT_OK
        expected = energy.score_directory(directory)
        for image_id in expected.per_image:
            assert image_id in out
        assert f"dataset_energy {expected.dataset_energy:.9g}" in out
        saved = energy.load_report(report_path)
        assert saved.dataset_energy == expected.dataset_energy

    def test_lower_severity_scores_lower(self, capsys, heatmap_dir):
        clean = heatmap_dir(0.0, "maps_clean")
        dirty = heatmap_dir(1.0, "maps_dirty")
        _, out_clean, _ = invoke(capsys, "energy", "--heatmaps", str(clean), "--json")
        _, out_dirty, _ = invoke(capsys, "energy", "--heatmaps", str(dirty), "--json")
        assert json.loads(out_clean)["dataset_energy"] < json.loads(out_dirty)["dataset_energy"]


class TestMapCommand:
    def test_single_box_scene(self, capsys, tmp_path):
        gt = {
            "images": [{"id": 1, "width": 100, "height": 100}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 10, 10]}
            ],
            "categories": [{"id": 1}],
        }
        det = [{"image_id": 1, "category_id": 1, "bbox": [0, 2.5, 10, 10], "score": 0.9}]
        gt_path = tmp_path / "gt.json"
        det_path = tmp_path / "det.json"
        gt_path.write_text(json.dumps(gt))
        det_path.write_text(json.dumps(det))
        code, out, _ = invoke(
            capsys, "map", "--gt", str(gt_path), "--det", str(det_path)
        )
        assert code == EXIT_OK
        assert "AP50 1.000000" in out
        assert "mAP 0.300000" in out


class TestEloCommand:
    def test_replay_matches_library(self, capsys, tmp_path):
        votes = [
            elo.VoteRecord(
                vote_id=f"v{n}",
                image_id="img",
                attribute="overall",
                method_a="gamma",
                method_b="zerodce",
                outcome="a_better" if n % 2 else "b_better",
                timestamp=float(n),
            )
            for n in range(6)
        ]
        log = tmp_path / "votes.jsonl"
        elo.save_votes(log, votes)
        code, out, _ = invoke(capsys, "elo", "--votes", str(log), "--json")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["votes"] == 6
        table = elo.replay(votes)
        expected = [
            {"method": m, "rating": r, "votes": c}
            for m, r, c in elo.leaderboard(table, "overall")
        ]
        assert doc["leaderboards"]["overall"] == expected

    def test_text_sections(self, capsys, tmp_path):
        log = tmp_path / "votes.jsonl"
        elo.append_vote(
            log,
            elo.VoteRecord.create("img", "color", "gamma", "zerodce", "both_good", 1.0),
        )
        code, out, _ = invoke(capsys, "elo", "--votes", str(log), "--attribute", "color")
        assert code == EXIT_OK
        assert "[color]" in out
        assert "gamma" in out


class TestDistortCommand:
    def test_subset_of_grid(self, capsys, tmp_path):
        input_dir = tmp_path / "input"
        input_dir.mkdir()
        rng = np.random.default_rng(0)
        for name in ("one.png", "two.png"):
            write_image(input_dir / name, rng.uniform(size=(8, 8, 3)))
        out_dir = tmp_path / "out"
        code, out, _ = invoke(
            capsys,
            "distort",
            "--input-dir",
            str(input_dir),
            "--output-dir",
            str(out_dir),
            "--spec",
            "gaussian_noise:2:under_2.0",
            "--spec",
            "brightness:0:identity_1.0",
            "--json",
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["input_images"] == 2
        assert doc["variants"] == 4
        assert sorted(doc["specs"]) == [
            "brightness:0:identity_1.0",
            "gaussian_noise:2:under_2.0",
        ]

    def test_spec_and_grid_flags_exclusive(self, capsys, tmp_path):
        code, _, err = invoke(
            capsys,
            "distort",
            "--input-dir",
            str(tmp_path),
            "--output-dir",
            str(tmp_path / "o"),
            "--spec",
            "brightness:0:identity_1.0",
            "--full-grid",
        )
        assert code == EXIT_USAGE


class TestSimdetCommand:
    def test_writes_heatmaps_and_detections(self, capsys, tmp_path, random_gt):
        gt = random_gt(seed=21)
        gt_path = tmp_path / "gt.json"
        save_ground_truth(gt, gt_path)
        maps_dir = tmp_path / "maps"
        det_path = tmp_path / "det.json"
        code, out, _ = invoke(
            capsys,
            "simdet",
            "--gt",
            str(gt_path),
            "--severity",
            "0.5",
            "--out-heatmaps",
            str(maps_dir),
            "--out-dets",
            str(det_path),
            "--json",
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["images"] == len(gt.images)
        lmeh_files = sorted(maps_dir.glob("*.lmeh"))
        assert len(lmeh_files) == len(gt.images)
        loaded = heatmaps.read_heatmaps(lmeh_files[0])
        assert loaded.scales[0].cls.shape[0] == len(gt.categories)
        assert json.loads(det_path.read_text())


class TestSweepCommand:
    def test_three_severities(self, capsys, heatmap_dir, tmp_path):
        dirs = [
            heatmap_dir(severity, name)
            for severity, name in ((0.0, "sev0"), (0.5, "sev5"), (1.0, "sev9"))
        ]
        map_file = tmp_path / "map.csv"
        map_file.write_text("sev0,0.9\nsev5,0.5\nsev9,0.1\n")
        csv_out = tmp_path / "sweep.csv"
        code, out, _ = invoke(
            capsys,
            "sweep",
            "--heatmaps",
            *[str(d) for d in dirs],
            "--map-values",
            str(map_file),
            "--temperatures",
            "0.01",
            "0.001",
            "--out",
            str(csv_out),
        )
        assert code == EXIT_OK
        assert "T=0.01" in out
        assert "spearman=-1.000000" in out
        lines = csv_out.read_text().splitlines()
        assert lines[0] == "temperature,pearson,spearman,spearman_p"
        assert len(lines) == 3

    def test_single_directory_rejected(self, capsys, heatmap_dir, tmp_path):
        directory = heatmap_dir(0.0, "solo")
        map_file = tmp_path / "map.csv"
        map_file.write_text("solo,0.9\n")
        code, _, err = invoke(
            capsys,
            "sweep",
            "--heatmaps",
            str(directory),
            "--map-values",
            str(map_file),
        )
        assert code == EXIT_USAGE
        assert "undefined" in err

    def test_missing_map_value(self, capsys, heatmap_dir, tmp_path):
        dirs = [heatmap_dir(0.0, "sa"), heatmap_dir(1.0, "sb")]
        map_file = tmp_path / "map.csv"
        map_file.write_text("sa,0.9\n")
        code, _, err = invoke(
            capsys,
            "sweep",
            "--heatmaps",
            *[str(d) for d in dirs],
            "--map-values",
            str(map_file),
        )
        assert code == EXIT_USAGE
        assert "sb" in err


class TestModuleEntryPoint:
    def test_module_help(self):
        result = subprocess.run(
            [sys.executable, "-m", "dimeval", "--help"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "usage" in result.stdout
