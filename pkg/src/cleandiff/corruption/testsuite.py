"""Severity-graded test-time corruptions, disjoint from the training mixing ops.

Nine kinds at five severities with closed-form per-severity parameters. Kept
in its own registry on purpose: nothing here shares code with the crafting
pipeline, so evaluation never sees a training-time corruption.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

TEST_CORRUPTION_KINDS: tuple[str, ...] = (
    "gaussian_noise",
    "shot_noise",
    "impulse_noise",
    "box_blur",
    "motion_blur",
    "haze",
    "contrast",
    "pixelate",
    "quantize",
)

# severity -> magnitude parameter, index 0 unused
SEVERITY_PARAMS: dict[str, list] = {
    "gaussian_noise": [None, 0.04, 0.08, 0.13, 0.19, 0.26],  # additive sigma
    "shot_noise": [None, 60.0, 30.0, 15.0, 8.0, 4.0],  # photons at full scale
    "impulse_noise": [None, 0.02, 0.05, 0.09, 0.14, 0.20],  # salt/pepper fraction
    "box_blur": [None, 3, 5, 7, 9, 11],  # kernel size
    "motion_blur": [None, 3, 5, 7, 9, 12],  # kernel length
    "haze": [None, 0.15, 0.30, 0.45, 0.60, 0.75],  # veil opacity
    "contrast": [None, 0.75, 0.60, 0.45, 0.30, 0.15],  # gamma toward the mean
    "pixelate": [None, 2, 4, 8, 12, 16],  # block size
    "quantize": [None, 10, 7, 5, 3, 2],  # levels
}

HAZE_LIGHT = 0.92


@dataclass(frozen=True)
class TestCorruption:
    kind: str
    severity: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in TEST_CORRUPTION_KINDS:
            raise ValueError(f"unknown test corruption kind {self.kind!r}")
        if not 1 <= self.severity <= 5:
            raise ValueError(f"severity {self.severity} outside [1, 5]")


def _clip(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0.0, 1.0).astype(np.float32)


def _gaussian_noise(x, sigma, rng):
    return _clip(x + sigma * rng.standard_normal(x.shape))


def _shot_noise(x, photons, rng):
    return _clip(rng.poisson(x * photons) / photons)


def _impulse_noise(x, frac, rng):
    out = x.copy()
    mask = rng.uniform(size=x.shape[:2]) < frac
    salt = rng.uniform(size=x.shape[:2]) < 0.5
    out[mask & salt] = 1.0
    out[mask & ~salt] = 0.0
    return _clip(out)


def _box_blur(x, k):
    return _clip(ndimage.uniform_filter(x, size=(k, k, 1), mode="nearest"))


def _motion_blur(x, length, rng):
    angle = rng.uniform(0.0, np.pi)
    kernel = np.zeros((length, length), dtype=np.float64)
    c = (length - 1) / 2
    for i in range(length):
        r = i - c
        y, xk = c + r * np.sin(angle), c + r * np.cos(angle)
        yi, xi = int(round(y)), int(round(xk))
        kernel[np.clip(yi, 0, length - 1), np.clip(xi, 0, length - 1)] += 1.0
    kernel /= kernel.sum()
    out = np.stack(
        [ndimage.convolve(x[..., ch], kernel, mode="nearest") for ch in range(3)], axis=-1
    )
    return _clip(out)


def _haze(x, opacity):
    return _clip((1.0 - opacity) * x + opacity * HAZE_LIGHT)


def _contrast(x, gamma):
    mean = x.mean(axis=(0, 1), keepdims=True)
    return _clip(mean + gamma * (x - mean))


def _pixelate(x, block):
    h, w = x.shape[:2]
    out = np.empty_like(x)
    for top in range(0, h, block):
        for left in range(0, w, block):
            cell = x[top : top + block, left : left + block]
            out[top : top + block, left : left + block] = cell.mean(axis=(0, 1))
    return _clip(out)


def _quantize(x, levels):
    return _clip(np.round(x * (levels - 1)) / (levels - 1))


def apply_test_corruption(image: np.ndarray, corruption: TestCorruption) -> np.ndarray:
    """Corrupt one [H, W, 3] image; deterministic given (image, kind, severity, seed)."""
    p = SEVERITY_PARAMS[corruption.kind][corruption.severity]
    rng = np.random.default_rng(
        np.random.SeedSequence(
            entropy=corruption.seed,
            spawn_key=(TEST_CORRUPTION_KINDS.index(corruption.kind), corruption.severity),
        )
    )
    kind = corruption.kind
    if kind == "gaussian_noise":
        return _gaussian_noise(image, p, rng)
    if kind == "shot_noise":
        return _shot_noise(image, p, rng)
    if kind == "impulse_noise":
        return _impulse_noise(image, p, rng)
    if kind == "box_blur":
        return _box_blur(image, p)
    if kind == "motion_blur":
        return _motion_blur(image, p, rng)
    if kind == "haze":
        return _haze(image, p)
    if kind == "contrast":
        return _contrast(image, p)
    if kind == "pixelate":
        return _pixelate(image, p)
    if kind == "quantize":
        return _quantize(image, p)
    raise ValueError(f"unknown test corruption kind {kind!r}")
