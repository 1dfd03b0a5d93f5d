"""Calibrated synthetic distortions for energy/mAP correlation studies.

A distorted variant is produced in two phases: a degradation (blur, one of
three noise types, or an HSV brightness/saturation shift) at one of five
strengths, followed by a gamma exposure shift.  Six degradations x five
levels x five exposures gives the full 150-variant grid.

All operations act on (H, W, 3) float arrays in [0, 1] and return values in
the same range.  Randomized operations take an explicit generator; the grid
driver derives one deterministic stream per (seed, image, spec), so parallel
scheduling cannot change outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve1d

from .errors import FormatError, UsageError, ValidationError
from .images import read_image, write_image

DEGRADATIONS = (
    "gaussian_blur",
    "gaussian_noise",
    "impulse_noise",
    "shot_noise",
    "brightness",
    "saturate",
)

# name -> gamma value applied in the exposure phase
EXPOSURES = {
    "under_1.5": 1.5,
    "under_2.0": 2.0,
    "over_0.75": 0.75,
    "over_0.5": 0.5,
    "identity_1.0": 1.0,
}

# Strength tables, index 0..4.
BLUR_SIGMA = (0.1, 0.2, 0.4, 0.8, 1.6)
GAUSS_LEVELS = (5, 10, 15, 20, 25)
IMPULSE_AMOUNT = (0.01, 0.025, 0.05, 0.075, 0.1)
SHOT_LEVELS = (60, 45, 30, 20, 12)
BRIGHTNESS_DELTA = (0.1, 0.2, 0.3, 0.4, 0.5)
SATURATE_ALPHA = (0.3, 0.1, 2, 5, 20)
SATURATE_BETA = (0, 0, 0, 0.1, 0.2)

GRID_SIZE = len(DEGRADATIONS) * len(BLUR_SIGMA) * len(EXPOSURES)  # 150


@dataclass(frozen=True)
class DistortionSpec:
    """One point of the degradation x level x exposure grid."""

    degradation: str
    level_index: int
    exposure: str
    seed: int = 0

    def __post_init__(self):
        if self.degradation not in DEGRADATIONS:
            raise ValidationError(f"unknown degradation {self.degradation!r}")
        if not 0 <= self.level_index <= 4:
            raise ValidationError(f"level_index must be in 0..4, got {self.level_index}")
        if self.exposure not in EXPOSURES:
            raise ValidationError(f"unknown exposure {self.exposure!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")

    @property
    def key(self) -> str:
        return f"{self.degradation}:{self.level_index}:{self.exposure}"

    @property
    def gamma(self) -> float:
        return EXPOSURES[self.exposure]

    @classmethod
    def parse(cls, key: str, seed: int = 0) -> "DistortionSpec":
        parts = key.split(":")
        if len(parts) != 3:
            raise ValidationError(f"spec key must be degradation:level:exposure, got {key!r}")
        return cls(parts[0], int(parts[1]), parts[2], seed=seed)


def full_grid(seed: int = 0) -> list[DistortionSpec]:
    """All 150 specs in a fixed degradation-major order."""
    return [
        DistortionSpec(deg, level, exposure, seed=seed)
        for deg in DEGRADATIONS
        for level in range(5)
        for exposure in EXPOSURES
    ]


# ---------------------------------------------------------------------------
# color space


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Convert (..., 3) RGB in [0, 1] to HSV with H in [0, 360), S, V in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    chroma = maxc - minc

    h = np.zeros_like(maxc)
    mask = chroma > 0
    safe = np.where(mask, chroma, 1.0)
    r_max = mask & (maxc == r)
    g_max = mask & (maxc == g) & ~r_max
    b_max = mask & ~r_max & ~g_max
    h = np.where(r_max, ((g - b) / safe) % 6.0, h)
    h = np.where(g_max, (b - r) / safe + 2.0, h)
    h = np.where(b_max, (r - g) / safe + 4.0, h)
    h = (h * 60.0) % 360.0

    s = np.where(maxc > 0, chroma / np.where(maxc > 0, maxc, 1.0), 0.0)
    return np.stack([h, s, maxc], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    hp = (h % 360.0) / 60.0
    chroma = v * s
    x = chroma * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - chroma

    sector = np.floor(hp).astype(int) % 6
    zeros = np.zeros_like(chroma)
    # per-sector (r, g, b) before adding m
    r = np.choose(sector, [chroma, x, zeros, zeros, x, chroma])
    g = np.choose(sector, [x, chroma, chroma, x, zeros, zeros])
    b = np.choose(sector, [zeros, zeros, x, chroma, chroma, x])
    return np.stack([r + m, g + m, b + m], axis=-1)


# ---------------------------------------------------------------------------
# individual distortions


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValidationError(f"expected (H, W, 3) image, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValidationError("image values must be finite and in [0, 1]")
    return img


def apply_gamma(img: np.ndarray, gamma: float) -> np.ndarray:
    """Exposure shift: out = in ** gamma (gamma > 1 darkens, < 1 brightens)."""
    img = _check_image(img)
    if not gamma > 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    return img**gamma


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Discrete Gaussian, radius ceil(3 sigma), normalized to sum 1."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def apply_gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflect-edge padding."""
    img = _check_image(img)
    kernel = gaussian_kernel(sigma)
    out = convolve1d(img, kernel, axis=0, mode="reflect")
    out = convolve1d(out, kernel, axis=1, mode="reflect")
    return np.clip(out, 0.0, 1.0)


def apply_gaussian_noise(img: np.ndarray, level: float, rng: np.random.Generator) -> np.ndarray:
    """Additive white noise with sigma = level / 255 on normalized values."""
    img = _check_image(img)
    if level < 0:
        raise ValidationError(f"level must be >= 0, got {level}")
    if level == 0:
        return img.copy()
    return np.clip(img + rng.normal(0.0, level / 255.0, size=img.shape), 0.0, 1.0)


def apply_impulse_noise(img: np.ndarray, amount: float, rng: np.random.Generator) -> np.ndarray:
    """Salt-and-pepper over a fraction ``amount`` of pixel positions.

    Positions are drawn without replacement; half become white, half black,
    across all three channels.
    """
    img = _check_image(img)
    if not 0 <= amount <= 1:
        raise ValidationError(f"amount must be in [0, 1], got {amount}")
    h, w = img.shape[:2]
    n = int(round(amount * h * w))
    if n == 0:
        return img.copy()
    flat_positions = rng.choice(h * w, size=n, replace=False)
    n_salt = n - n // 2
    out = img.copy().reshape(-1, 3)
    out[flat_positions[:n_salt]] = 1.0
    out[flat_positions[n_salt:]] = 0.0
    return out.reshape(h, w, 3)


def apply_shot_noise(img: np.ndarray, level: float, rng: np.random.Generator) -> np.ndarray:
    """Photon-count noise: out = Poisson(in * level) / level, clipped to [0, 1]."""
    img = _check_image(img)
    if not level > 0:
        raise ValidationError(f"level must be > 0, got {level}")
    return np.clip(rng.poisson(img * level) / level, 0.0, 1.0)


def apply_brightness(img: np.ndarray, delta: float) -> np.ndarray:
    """Shift the HSV value channel by ``delta`` and clip."""
    img = _check_image(img)
    hsv = rgb_to_hsv(img)
    hsv[..., 2] = np.clip(hsv[..., 2] + delta, 0.0, 1.0)
    return np.clip(hsv_to_rgb(hsv), 0.0, 1.0)


def apply_saturate(img: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Rescale the HSV saturation channel: S -> clip(alpha * S + beta)."""
    img = _check_image(img)
    hsv = rgb_to_hsv(img)
    hsv[..., 1] = np.clip(alpha * hsv[..., 1] + beta, 0.0, 1.0)
    return np.clip(hsv_to_rgb(hsv), 0.0, 1.0)


# ---------------------------------------------------------------------------
# grid driver


def variant_rng(spec: DistortionSpec, image_id: str) -> np.random.Generator:
    """Independent, reproducible stream for one (seed, image, spec) triple."""
    tag = f"{spec.seed}|{image_id}|{spec.key}".encode()
    digest = hashlib.sha256(tag).digest()
    return np.random.default_rng(np.random.SeedSequence(int.from_bytes(digest[:16], "little")))


def synthesize_variant(img: np.ndarray, spec: DistortionSpec, image_id: str = "") -> np.ndarray:
    """Apply one grid point: degradation first, exposure shift second."""
    rng = variant_rng(spec, image_id)
    i = spec.level_index
    if spec.degradation == "gaussian_blur":
        out = apply_gaussian_blur(img, BLUR_SIGMA[i])
    elif spec.degradation == "gaussian_noise":
        out = apply_gaussian_noise(img, GAUSS_LEVELS[i], rng)
    elif spec.degradation == "impulse_noise":
        out = apply_impulse_noise(img, IMPULSE_AMOUNT[i], rng)
    elif spec.degradation == "shot_noise":
        out = apply_shot_noise(img, SHOT_LEVELS[i], rng)
    elif spec.degradation == "brightness":
        out = apply_brightness(img, BRIGHTNESS_DELTA[i])
    else:
        out = apply_saturate(img, SATURATE_ALPHA[i], SATURATE_BETA[i])
    return apply_gamma(out, spec.gamma)


def spec_dirname(spec: DistortionSpec) -> str:
    return f"{spec.degradation}_l{spec.level_index}_{spec.exposure}"


def synthesize_dataset(
    input_dir: str | Path,
    output_dir: str | Path,
    specs: list[DistortionSpec],
    manifest_name: str = "manifest.json",
) -> dict:
    """Render every spec over every input image; returns (and writes) the manifest.

    Output layout is one subdirectory per spec; re-running with the same
    seeds is byte-identical.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    image_paths = sorted(input_dir.glob("*.png"))
    if not image_paths:
        raise UsageError(f"no .png images found in {input_dir}")

    images = []
    for path in image_paths:
        try:
            images.append((path.stem, read_image(path)))
        except FormatError:
            raise
        except OSError as exc:
            raise OSError(f"failed to read input image {path}") from exc

    output_dir.mkdir(parents=True, exist_ok=True)
    entries = {}
    for spec in specs:
        subdir = output_dir / spec_dirname(spec)
        subdir.mkdir(exist_ok=True)
        files = []
        for image_id, img in images:
            out_path = subdir / f"{image_id}.png"
            write_image(out_path, synthesize_variant(img, spec, image_id=image_id))
            files.append(str(out_path.relative_to(output_dir)))
        entries[spec.key] = {"directory": spec_dirname(spec), "seed": spec.seed, "files": files}

    manifest = {"input_images": [p.name for p in image_paths], "entries": entries}
    (output_dir / manifest_name).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
