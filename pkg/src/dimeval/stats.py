"""Correlation and linear calibration between energy scores and mAP.

Spearman significance uses the usual t approximation,
t = r * sqrt((n - 2) / (1 - r^2)) against Student-t with n - 2 degrees of
freedom; an exact permutation p-value is available for small n as a
cross-check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import UndefinedCorrelationError, UsageError, ValidationError


@dataclass(frozen=True)
class PairedSeries:
    """Labelled (x, y) observations, e.g. (dataset, energy, mAP)."""

    points: tuple[tuple[str, float, float], ...]

    def __post_init__(self):
        points = tuple((str(l), float(x), float(y)) for l, x, y in self.points)
        for label, x, y in points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError(f"non-finite value in point {label!r}")
        object.__setattr__(self, "points", points)

    @property
    def x(self) -> np.ndarray:
        return np.array([x for _, x, _ in self.points])

    @property
    def y(self) -> np.ndarray:
        return np.array([y for _, _, y in self.points])

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_arrays(cls, x: Sequence[float], y: Sequence[float]) -> "PairedSeries":
        if len(x) != len(y):
            raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
        return cls(tuple((str(i), float(a), float(b)) for i, (a, b) in enumerate(zip(x, y))))


@dataclass(frozen=True)
class CalibrationModel:
    """Least-squares line mapping energy to predicted mAP."""

    slope: float
    intercept: float
    r_squared: float

    def to_json(self) -> str:
        return json.dumps(
            {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationModel":
        doc = json.loads(text)
        return cls(float(doc["slope"]), float(doc["intercept"]), float(doc["r_squared"]))


def pearson(series: PairedSeries) -> float:
    """Product-moment correlation coefficient."""
    if len(series) < 2:
        raise UsageError("pearson requires at least 2 points")
    x = series.x
    y = series.y
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: zero variance in x or y")
    return float(np.sum(dx * dy) / math.sqrt(sxx * syy))


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the average of their rank span."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_pvalue(r: float, n: int) -> float:
    """Two-sided significance of a rank correlation via the t approximation."""
    if n < 3:
        raise UsageError("p-value requires n >= 3")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * sps.t.sf(abs(t), df=n - 2))


def spearman(series: PairedSeries) -> tuple[float, float]:
    """Rank correlation with its two-sided p-value."""
    if len(series) < 3:
        raise UsageError("spearman requires at least 3 points")
    ranked = PairedSeries.from_arrays(average_ranks(series.x), average_ranks(series.y))
    r = pearson(ranked)
    return r, spearman_pvalue(r, len(series))


def spearman_exact_pvalue(series: PairedSeries, max_n: int = 10) -> float:
    """Exact permutation p-value, feasible for small series only."""
    n = len(series)
    if n < 3:
        raise UsageError("p-value requires n >= 3")
    if n > max_n:
        raise UsageError(f"exact permutation p-value limited to n <= {max_n}")
    observed, _ = spearman(series)
    rank_x = average_ranks(series.x)
    rank_y = average_ranks(series.y)
    hits = 0
    total = 0
    for perm in itertools.permutations(rank_y):
        r = pearson(PairedSeries.from_arrays(rank_x, perm))
        if abs(r) >= abs(observed) - 1e-12:
            hits += 1
        total += 1
    return hits / total


def fit_calibration(series: PairedSeries) -> CalibrationModel:
    """Ordinary least squares of y on x, with the usual R^2."""
    if len(series) < 2:
        raise UsageError("fit_calibration requires at least 2 points")
    x = series.x
    y = series.y
    dx = x - x.mean()
    sxx = float(np.sum(dx * dx))
    if sxx == 0.0:
        raise UndefinedCorrelationError("cannot fit: zero variance in x")
    slope = float(np.sum(dx * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return CalibrationModel(slope=slope, intercept=intercept, r_squared=r_squared)


def predict_map(model: CalibrationModel, energy: float) -> float:
    """Calibrated mAP estimate, clamped to [0, 1]."""
    return float(min(1.0, max(0.0, model.slope * energy + model.intercept)))


# ---------------------------------------------------------------------------
# pairs file I/O: comma-separated "label,x,y" rows


def load_pairs(path: str | Path) -> PairedSeries:
    points = []
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValidationError(f"{path}:{line_no}: expected label,x,y got {raw!r}")
        if line_no == 1 and parts[1].lower() == "x" and parts[2].lower() == "y":
            continue  # optional header
        try:
            points.append((parts[0], float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ValidationError(f"{path}:{line_no}: non-numeric value in {raw!r}") from exc
    return PairedSeries(tuple(points))


def save_pairs(series: PairedSeries, path: str | Path) -> None:
    lines = [f"{label},{x!r},{y!r}" for label, x, y in series.points]
    Path(path).write_text("\n".join(lines) + "\n")
