"""Procedural 10-class shapes benchmark (5 shapes x 2 color families).

Fully self-contained stand-in for a natural-image classification set: bold
anti-aliased shapes over soft gradient backgrounds with randomized pose.
Images are emitted on the uint8 grid (k/255) so PNG round-trips are exact.
"""

from __future__ import annotations

import numpy as np

SHAPE_NAMES = ("circle", "square", "triangle", "plus", "star")
COLOR_FAMILIES = ("warm", "cool")
CLASS_NAMES = tuple(f"{s}_{c}" for s in SHAPE_NAMES for c in COLOR_FAMILIES)
N_CLASSES = len(CLASS_NAMES)

WARM_BASE = np.array([0.85, 0.25, 0.15])
COOL_BASE = np.array([0.15, 0.35, 0.85])


def _rot(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return points @ np.array([[c, -s], [s, c]]).T


def _polygon_mask(xx, yy, verts: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon over the pixel grid."""
    inside = np.zeros(xx.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        crosses = (yy > np.minimum(y0, y1)) & (yy <= np.maximum(y0, y1)) & (y0 != y1)
        xint = x0 + (yy - y0) * (x1 - x0) / np.where(y0 != y1, y1 - y0, 1.0)
        inside ^= crosses & (xx < xint)
    return inside


def _shape_mask(shape: str, size: int, cx, cy, radius, angle) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    if shape == "circle":
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2
    if shape == "square":
        verts = _rot(np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]) * radius * 0.9, angle)
    elif shape == "triangle":
        base = np.array([[np.cos(a), np.sin(a)] for a in np.linspace(0, 2 * np.pi, 4)[:-1]])
        verts = _rot(base * radius * 1.1, angle)
    elif shape == "plus":
        w = 0.38
        base = np.array(
            [
                [-w, -1], [w, -1], [w, -w], [1, -w], [1, w], [w, w],
                [w, 1], [-w, 1], [-w, w], [-1, w], [-1, -w], [-w, -w],
            ]
        )
        verts = _rot(base * radius, angle)
    elif shape == "star":
        pts = []
        for i in range(10):
            r = radius * (1.15 if i % 2 == 0 else 0.45)
            a = np.pi * i / 5
            pts.append([r * np.cos(a), r * np.sin(a)])
        verts = _rot(np.array(pts), angle)
    else:
        raise ValueError(f"unknown shape {shape!r}")
    return _polygon_mask(xx, yy, verts + np.array([cx, cy]))


def render_shape_image(label: int, rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """One [size, size, 3] image for a class label, pose randomized by rng."""
    shape = SHAPE_NAMES[label // 2]
    family = COLOR_FAMILIES[label % 2]
    base = WARM_BASE if family == "warm" else COOL_BASE
    color = np.clip(base + rng.uniform(-0.12, 0.12, size=3), 0.05, 1.0)

    # soft background gradient around a neutral tone
    g0, g1 = rng.uniform(0.55, 0.8, size=2)
    ramp = np.linspace(0, 1, size)
    direction = rng.integers(0, 2)
    grad = np.outer(ramp, np.ones(size)) if direction == 0 else np.outer(np.ones(size), ramp)
    bg_tint = rng.uniform(-0.05, 0.05, size=3)
    img = (g0 + (g1 - g0) * grad)[..., None] + bg_tint

    # render the mask at 2x and box-downsample for anti-aliased edges
    ss = 2
    cx = (size / 2 + rng.uniform(-8, 8)) * ss
    cy = (size / 2 + rng.uniform(-8, 8)) * ss
    radius = rng.uniform(14, 21) * ss
    angle = rng.uniform(0, 2 * np.pi)
    mask_hi = _shape_mask(shape, size * ss, cx, cy, radius, angle).astype(np.float64)
    mask = mask_hi.reshape(size, ss, size, ss).mean(axis=(1, 3))

    img = img * (1 - mask[..., None]) + color * mask[..., None]
    img = np.clip(img, 0.0, 1.0)
    return (np.round(img * 255.0) / 255.0).astype(np.float32)


def make_shapes_dataset(
    n: int, seed: int, size: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """n images with balanced class labels; deterministic in (n, seed, size)."""
    images = np.empty((n, size, size, 3), dtype=np.float32)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        label = i % N_CLASSES
        images[i] = render_shape_image(label, rng, size)
        labels[i] = label
    return images, labels
