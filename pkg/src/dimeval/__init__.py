"""Detector-agnostic scoring of enhanced low-light images.

The package turns a frozen detector's raw confidence maps into a label-free
quality score (lower is better), plus the supporting cast needed to trust
that score: a reproducible degradation grid, a COCO-protocol mAP
implementation, rank-correlation and calibration statistics, an Elo pipeline
over human pairwise votes, and a synthetic detector for end-to-end checks.
"""

from .detection import (
    APResult,
    Detection,
    DetectionSet,
    GroundTruthSet,
    GtBox,
    detections_from_coco,
    evaluate_map,
    ground_truth_from_coco,
    iou,
    load_detections,
    load_ground_truth,
    save_detections,
    save_ground_truth,
)
from .distort import DistortionSpec, full_grid, synthesize_dataset, synthesize_variant
from .elo import (
    ATTRIBUTES,
    OUTCOMES,
    RatingTable,
    VoteRecord,
    append_vote,
    apply_vote,
    expected_score,
    leaderboard,
    load_votes,
    replay,
    save_votes,
)
from .images import read_image, write_image
from .energy import (
    EnergyConfig,
    EnergyReport,
    dataset_energy,
    energy_gradient,
    image_energy,
    load_report,
    rank_candidates,
    reweight,
    save_report,
    scale_energy,
    score_directory,
)
from .errors import (
    DimensionError,
    DimevalError,
    FormatError,
    UndefinedCorrelationError,
    UsageError,
    ValidationError,
)
from .heatmaps import DetectorHeatmaps, ScaleMap, read_heatmap_dir, read_heatmaps, write_heatmaps
from .simdet import SimSpec, render_detections, render_heatmaps, severity_ladder
from .stats import (
    CalibrationModel,
    PairedSeries,
    average_ranks,
    fit_calibration,
    load_pairs,
    pearson,
    predict_map,
    save_pairs,
    spearman,
    spearman_exact_pvalue,
    spearman_pvalue,
)

__version__ = "0.1.0"

__all__ = [
    "APResult",
    "ATTRIBUTES",
    "CalibrationModel",
    "Detection",
    "DetectionSet",
    "DetectorHeatmaps",
    "DimensionError",
    "DimevalError",
    "DistortionSpec",
    "EnergyConfig",
    "EnergyReport",
    "FormatError",
    "GroundTruthSet",
    "GtBox",
    "OUTCOMES",
    "PairedSeries",
    "RatingTable",
    "ScaleMap",
    "SimSpec",
    "UndefinedCorrelationError",
    "UsageError",
    "ValidationError",
    "VoteRecord",
    "append_vote",
    "apply_vote",
    "average_ranks",
    "dataset_energy",
    "detections_from_coco",
    "energy_gradient",
    "evaluate_map",
    "expected_score",
    "fit_calibration",
    "full_grid",
    "ground_truth_from_coco",
    "image_energy",
    "iou",
    "leaderboard",
    "load_detections",
    "load_ground_truth",
    "load_pairs",
    "load_report",
    "load_votes",
    "pearson",
    "predict_map",
    "rank_candidates",
    "read_heatmap_dir",
    "read_heatmaps",
    "read_image",
    "render_detections",
    "render_heatmaps",
    "replay",
    "reweight",
    "save_detections",
    "save_ground_truth",
    "save_pairs",
    "save_report",
    "save_votes",
    "scale_energy",
    "score_directory",
    "severity_ladder",
    "spearman",
    "spearman_exact_pvalue",
    "spearman_pvalue",
    "synthesize_dataset",
    "synthesize_variant",
    "write_heatmaps",
    "write_image",
]
