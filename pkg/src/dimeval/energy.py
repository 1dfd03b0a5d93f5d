"""Energy scoring of detector heatmaps.

Each prediction cell fuses its per-class confidence with objectness via a
geometric mean, ``sqrt(cls * (1 - bg))``; a tempered log-sum-exp over classes
then turns the fused map into a scalar score per image:

    E = - sum_{i,j} T * log( sum_y exp( fused[y,i,j] / T ) )

summed over scales.  A confident, natural-looking detector response drives
the fused values up and the energy down, so lower energy means better input.
As T -> 0 the per-cell term approaches the best class confidence; the
log-sum-exp is always evaluated max-shifted so any temperature down to 1e-6
stays finite.

All arithmetic here is float64 regardless of the float32 storage format.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, UsageError, ValidationError
from .heatmaps import DetectorHeatmaps

DEFAULT_TEMPERATURE = 0.01
THREADS_ENV_VAR = "DIMEVAL_THREADS"


@dataclass(frozen=True)
class EnergyConfig:
    """Scoring parameters.

    ``pixel_mean`` divides each scale's sum by its cell count; it exists for
    cross-resolution comparisons only and is never the default.
    """

    temperature: float = DEFAULT_TEMPERATURE
    scale_aggregation: str = "sum"
    epsilon: float = 1e-12
    pixel_mean: bool = False

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if self.scale_aggregation != "sum":
            raise ValidationError(f"unknown scale_aggregation {self.scale_aggregation!r}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class EnergyReport:
    """Per-image energies plus their arithmetic mean over the dataset."""

    per_image: dict[str, float]
    dataset_energy: float
    config: EnergyConfig = field(default_factory=EnergyConfig)

    def to_json(self) -> str:
        return json.dumps(
            {
                "temperature": self.config.temperature,
                "per_image": self.per_image,
                "dataset_energy": self.dataset_energy,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str, config: EnergyConfig | None = None) -> "EnergyReport":
        doc = json.loads(text)
        cfg = config or EnergyConfig(temperature=float(doc["temperature"]))
        return cls(
            per_image={str(k): float(v) for k, v in doc["per_image"].items()},
            dataset_energy=float(doc["dataset_energy"]),
            config=cfg,
        )


def _validate_pair(cls: np.ndarray, bg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cls = np.asarray(cls, dtype=np.float64)
    bg = np.asarray(bg, dtype=np.float64)
    if cls.ndim != 3 or bg.ndim != 2:
        raise DimensionError(
            f"expected cls (K, H, W) and bg (H, W), got {cls.shape} and {bg.shape}"
        )
    if cls.shape[1:] != bg.shape:
        raise DimensionError(f"cls spatial shape {cls.shape[1:]} != bg shape {bg.shape}")
    for name, arr in (("cls", cls), ("bg", bg)):
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name} contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError(f"{name} has values outside [0, 1]")
    return cls, bg


def reweight(cls: np.ndarray, bg: np.ndarray, epsilon: float = 1e-12) -> np.ndarray:
    """Fuse class confidences with objectness: sqrt(cls * (1 - bg)).

    The product is floored at zero before the square root (float rounding can
    produce tiny negatives); ``epsilon`` marks where the gradient is cut off
    and does not perturb the value itself.
    """
    cls, bg = _validate_pair(cls, bg)
    product = cls * (1.0 - bg)[np.newaxis, :, :]
    return np.sqrt(np.maximum(product, 0.0))


def _pixel_logsumexp(fused: np.ndarray, temperature: float) -> np.ndarray:
    """Per-cell T * log sum_y exp(fused / T), max-shifted for stability."""
    m = fused.max(axis=0)
    shifted = np.exp((fused - m[np.newaxis, :, :]) / temperature)
    return m + temperature * np.log(shifted.sum(axis=0))


def scale_energy(cls: np.ndarray, bg: np.ndarray, config: EnergyConfig | None = None) -> float:
    """Energy of one prediction grid, taken at full float64 precision.

    This is the primitive under :func:`image_energy`; it accepts raw arrays
    so callers (gradient checks in particular) can bypass float32 storage.
    """
    config = config or EnergyConfig()
    fused = reweight(cls, bg, config.epsilon)
    lse = _pixel_logsumexp(fused, config.temperature)
    total = -float(np.sum(lse))
    if config.pixel_mean:
        total /= lse.size
    return total


def image_energy(heatmaps: DetectorHeatmaps, config: EnergyConfig | None = None) -> float:
    """Energy of one image: per-scale energies summed over scales.

    Lower is better; the minimizer over candidate enhancements of the same
    image is the preferred one.
    """
    config = config or EnergyConfig()
    return float(sum(scale_energy(s.cls, s.bg, config) for s in heatmaps.scales))


def dataset_energy(
    items: Sequence[DetectorHeatmaps | tuple[str, DetectorHeatmaps]],
    config: EnergyConfig | None = None,
    n_threads: int | None = None,
) -> EnergyReport:
    """Score every image and aggregate with an arithmetic mean.

    The mean is accumulated in sorted image-id order, so the report is
    invariant to input order and to how work was scheduled.  ``n_threads``
    defaults to the ``DIMEVAL_THREADS`` environment variable (or 1).
    """
    config = config or EnergyConfig()
    pairs: list[tuple[str, DetectorHeatmaps]] = []
    for item in items:
        if isinstance(item, DetectorHeatmaps):
            pairs.append((item.image_id, item))
        else:
            image_id, h = item
            pairs.append((str(image_id), h))
    if not pairs:
        raise UsageError("dataset_energy requires at least one image")
    ids = [image_id for image_id, _ in pairs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate image ids: {dupes}")

    if n_threads is None:
        n_threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            energies = list(pool.map(lambda p: image_energy(p[1], config), pairs))
    else:
        energies = [image_energy(h, config) for _, h in pairs]

    per_image = {image_id: e for (image_id, _), e in zip(pairs, energies)}
    ordered = [per_image[i] for i in sorted(per_image)]
    mean = float(np.sum(np.asarray(ordered, dtype=np.float64)) / len(ordered))
    return EnergyReport(per_image=per_image, dataset_energy=mean, config=config)


def rank_candidates(candidates: Mapping[str, EnergyReport]) -> list[str]:
    """Order candidate names by ascending dataset energy (best first).

    All reports must share one config and one image-id set; ties break
    lexicographically by name.
    """
    if not candidates:
        raise UsageError("rank_candidates requires at least one candidate")
    names = sorted(candidates)
    ref = candidates[names[0]]
    ref_ids = set(ref.per_image)
    for name in names[1:]:
        report = candidates[name]
        if report.config != ref.config:
            raise ValidationError(f"candidate {name!r} was scored under a different config")
        if set(report.per_image) != ref_ids:
            raise ValidationError(f"candidate {name!r} covers a different image set")
    return sorted(names, key=lambda n: (candidates[n].dataset_energy, n))


def energy_gradient(
    heatmaps: DetectorHeatmaps, config: EnergyConfig | None = None
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Analytic gradient of :func:`image_energy` per scale.

    Returns one ``(d_cls, d_bg)`` pair per scale, shaped like that scale's
    maps.  With ``s`` the per-cell softmax of ``fused / T`` and
    ``u = cls * (1 - bg)``:

        dE/dcls = -s * (1 - bg) / (2 * sqrt(u))
        dE/dbg  = sum_y s * cls / (2 * sqrt(u))

    Cells with ``u <= epsilon`` sit on the square root's singularity and get
    gradient zero.
    """
    config = config or EnergyConfig()
    grads = []
    for scale in heatmaps.scales:
        cls, bg = _validate_pair(scale.cls, scale.bg)
        one_minus_bg = (1.0 - bg)[np.newaxis, :, :]
        u = cls * one_minus_bg
        fused = np.sqrt(np.maximum(u, 0.0))

        m = fused.max(axis=0)
        shifted = np.exp((fused - m[np.newaxis, :, :]) / config.temperature)
        softmax = shifted / shifted.sum(axis=0)[np.newaxis, :, :]

        safe = u > config.epsilon
        inv_2root = np.zeros_like(u)
        inv_2root[safe] = 0.5 / fused[safe]

        d_cls = -softmax * one_minus_bg * inv_2root
        d_bg = np.sum(softmax * cls * inv_2root, axis=0)
        if config.pixel_mean:
            n_cells = bg.size
            d_cls = d_cls / n_cells
            d_bg = d_bg / n_cells
        grads.append((d_cls, d_bg))
    return grads


def load_report(path: str | Path) -> EnergyReport:
    return EnergyReport.from_json(Path(path).read_text())


def save_report(report: EnergyReport, path: str | Path) -> None:
    Path(path).write_text(report.to_json() + "\n")


def score_directory(
    directory: str | Path,
    config: EnergyConfig | None = None,
    n_threads: int | None = None,
) -> EnergyReport:
    """Convenience: read every heatmap file in a directory and score it."""
    from .heatmaps import read_heatmap_dir

    return dataset_energy(read_heatmap_dir(directory), config=config, n_threads=n_threads)
