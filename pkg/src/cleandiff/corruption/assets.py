"""Procedural mixing assets: IFS fractals and band-limited noise fields.

Self-contained substitutes for downloaded fractal/feature-visualization
corpora. Every asset is a pure function of (kind, seed, size) so crafted
datasets are reproducible byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

AssetKind = str
ASSET_KINDS: tuple[AssetKind, ...] = ("fractal_like", "feature_viz_like")


@dataclass(frozen=True)
class MixingAsset:
    image: np.ndarray  # [H, W, 3] float32 in [0, 1]
    kind: AssetKind
    seed: int


def _normalize01(x: np.ndarray) -> np.ndarray:
    lo, hi = float(x.min()), float(x.max())
    return (x - lo) / max(hi - lo, 1e-8)


def _colorize(field: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Map a scalar field through a random smooth 3-stop color ramp."""
    stops = rng.uniform(0.05, 0.95, size=(3, 3))
    t = field[..., None]
    lo, mid, hi = stops
    ramp = np.where(t < 0.5, lo + (mid - lo) * (2 * t), mid + (hi - mid) * (2 * t - 1))
    return ramp.astype(np.float32)


def _fractal_like(seed: int, size: int) -> np.ndarray:
    """Chaos-game rendering of a random iterated function system."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(101,)))
    n_maps = int(rng.integers(4, 8))
    # contractive affine maps with random fixed points
    mats = rng.uniform(-0.9, 0.9, size=(n_maps, 2, 2))
    norms = np.linalg.norm(mats, axis=(1, 2), keepdims=True)
    mats = mats / np.maximum(norms, 1.0) * rng.uniform(0.5, 0.95, size=(n_maps, 1, 1))
    offsets = rng.uniform(-1.0, 1.0, size=(n_maps, 2))
    weights = rng.dirichlet(np.ones(n_maps))

    n_points, n_iters, burn_in = 2048, 260, 20
    pts = rng.uniform(-1, 1, size=(n_points, 2))
    hist = np.zeros((size, size), dtype=np.float64)
    for it in range(n_iters):
        choice = rng.choice(n_maps, size=n_points, p=weights)
        pts = np.einsum("nij,nj->ni", mats[choice], pts) + offsets[choice]
        if it >= burn_in:
            ij = np.clip(((pts + 1.6) / 3.2 * size).astype(np.int64), 0, size - 1)
            np.add.at(hist, (ij[:, 1], ij[:, 0]), 1.0)

    field = _normalize01(np.log1p(ndimage.gaussian_filter(hist, sigma=0.6)))
    img = _colorize(field, rng)
    # overlay a second octave for texture depth
    octave = _normalize01(ndimage.gaussian_filter(hist, sigma=2.5))
    img = 0.75 * img + 0.25 * octave[..., None]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _feature_viz_like(seed: int, size: int) -> np.ndarray:
    """Band-limited noise: random spectrum with 1/f^p falloff per channel."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(202,)))
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    radius = np.sqrt(fy**2 + fx**2)
    radius[0, 0] = 1.0
    chans = []
    base_phase = rng.uniform(0, 2 * np.pi, size=(size, size // 2 + 1))
    for _ in range(3):
        p = rng.uniform(1.2, 2.4)
        phase = base_phase + rng.uniform(0, 2 * np.pi / 3) * rng.standard_normal(base_phase.shape)
        spectrum = (radius**-p) * np.exp(1j * phase)
        spectrum[0, 0] = 0.0
        chans.append(_normalize01(np.fft.irfft2(spectrum, s=(size, size))))
    return np.stack(chans, axis=-1).astype(np.float32)


@lru_cache(maxsize=512)
def _generate_cached(kind: AssetKind, seed: int, size: int) -> np.ndarray:
    if kind == "fractal_like":
        img = _fractal_like(seed, size)
    elif kind == "feature_viz_like":
        img = _feature_viz_like(seed, size)
    else:
        raise ValueError(f"unknown mixing-asset kind {kind!r}")
    img.setflags(write=False)
    return img


def generate_mixing_asset(kind: AssetKind, seed: int, size: int) -> MixingAsset:
    """Deterministic visually complex texture in [0,1], [size, size, 3]."""
    return MixingAsset(image=_generate_cached(kind, int(seed), int(size)), kind=kind, seed=int(seed))
