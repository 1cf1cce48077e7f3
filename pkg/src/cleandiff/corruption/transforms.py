"""Per-sample base transforms applied during pair crafting.

Contrastive-learning style augmentations; each is applied with a configured
probability drawn from the recipe's rng stream. All transforms map
[H, W, 3] float32 in [0,1] to the same shape and range.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

BASE_TRANSFORMS: tuple[str, ...] = (
    "random_crop_resize",
    "color_jitter",
    "grayscale",
    "gaussian_blur",
    "horizontal_flip",
)

# application probabilities and parameter ranges, keyed by transform name
DEFAULT_TRANSFORM_PARAMS: dict[str, dict] = {
    "random_crop_resize": {"p": 1.0, "scale": (0.75, 1.0)},
    "color_jitter": {"p": 0.8, "strength": 0.35},
    "grayscale": {"p": 0.2},
    "gaussian_blur": {"p": 0.5, "sigma": (0.3, 1.3)},
    "horizontal_flip": {"p": 0.5},
}

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float32)


def _bilinear_resize(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = image.shape[:2]
    yy = np.linspace(0, h - 1, out_h)
    xx = np.linspace(0, w - 1, out_w)
    grid_y, grid_x = np.meshgrid(yy, xx, indexing="ij")
    out = np.empty((out_h, out_w, 3), dtype=np.float32)
    for c in range(3):
        out[..., c] = ndimage.map_coordinates(
            image[..., c], [grid_y, grid_x], order=1, mode="nearest"
        )
    return out


def random_crop_resize(image: np.ndarray, rng: np.random.Generator, scale=(0.75, 1.0)) -> np.ndarray:
    h, w = image.shape[:2]
    s = rng.uniform(*scale)
    ch, cw = max(1, round(h * s)), max(1, round(w * s))
    top = int(rng.integers(0, h - ch + 1))
    left = int(rng.integers(0, w - cw + 1))
    crop = image[top : top + ch, left : left + cw]
    if (ch, cw) == (h, w):
        return crop.copy()
    return _bilinear_resize(crop, h, w)


def color_jitter(image: np.ndarray, rng: np.random.Generator, strength: float = 0.35) -> np.ndarray:
    brightness, contrast, saturation = rng.uniform(1 - strength, 1 + strength, size=3)
    out = image * brightness
    mean = out.mean(axis=(0, 1), keepdims=True)
    out = mean + contrast * (out - mean)
    gray = (out @ GRAY_WEIGHTS)[..., None]
    out = gray + saturation * (out - gray)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def grayscale(image: np.ndarray) -> np.ndarray:
    gray = image @ GRAY_WEIGHTS
    return np.repeat(gray[..., None], 3, axis=-1).astype(np.float32)


def gaussian_blur(image: np.ndarray, rng: np.random.Generator, sigma=(0.3, 1.3)) -> np.ndarray:
    s = rng.uniform(*sigma)
    out = ndimage.gaussian_filter(image, sigma=(s, s, 0), mode="nearest")
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def horizontal_flip(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(image[:, ::-1])


def apply_base_transforms(
    image: np.ndarray,
    transforms: tuple[str, ...],
    rng: np.random.Generator,
    params: dict[str, dict] | None = None,
) -> np.ndarray:
    """Apply each listed transform with its configured probability."""
    params = params or DEFAULT_TRANSFORM_PARAMS
    out = image
    for name in transforms:
        p = params[name]["p"]
        if rng.uniform() >= p:
            continue
        if name == "random_crop_resize":
            out = random_crop_resize(out, rng, params[name]["scale"])
        elif name == "color_jitter":
            out = color_jitter(out, rng, params[name]["strength"])
        elif name == "grayscale":
            out = grayscale(out)
        elif name == "gaussian_blur":
            out = gaussian_blur(out, rng, params[name]["sigma"])
        elif name == "horizontal_flip":
            out = horizontal_flip(out)
        else:
            raise ValueError(f"unknown base transform {name!r}")
    return np.clip(out, 0.0, 1.0).astype(np.float32)
