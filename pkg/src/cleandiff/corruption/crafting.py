"""Crafting (clean, corrupted) training pairs by mixing complex assets into clean images.

One clean image yields many corrupted variants (one-to-many crafting); every
pair carries the single universal instruction id, so training is many-to-one
back to the clean target. All randomness flows from per-sample seeds derived
from a master seed, independent of iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import UNIVERSAL_INSTRUCTION_ID
from .assets import ASSET_KINDS, MixingAsset, generate_mixing_asset
from .transforms import BASE_TRANSFORMS, DEFAULT_TRANSFORM_PARAMS, apply_base_transforms

MIX_OPS: tuple[str, ...] = ("additive_mix", "multiplicative_mix")


@dataclass(frozen=True)
class CorruptionRecipe:
    seed: int
    mixing_rounds: int
    ops: tuple[str, ...]
    base_transforms: tuple[str, ...]
    mix_weight_bounds: tuple[float, float]

    def __post_init__(self):
        if self.mixing_rounds != len(self.ops):
            raise ValueError("mixing_rounds must equal len(ops)")
        lo, hi = self.mix_weight_bounds
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError("mix weight bounds must satisfy 0 < lo <= hi < 1")
        for op in self.ops:
            if op not in MIX_OPS:
                raise ValueError(f"unknown mixing op {op!r}")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "mixing_rounds": self.mixing_rounds,
            "ops": list(self.ops),
            "base_transforms": list(self.base_transforms),
            "mix_weight_bounds": list(self.mix_weight_bounds),
        }

    @staticmethod
    def from_dict(d: dict) -> "CorruptionRecipe":
        return CorruptionRecipe(
            seed=int(d["seed"]),
            mixing_rounds=int(d["mixing_rounds"]),
            ops=tuple(d["ops"]),
            base_transforms=tuple(d["base_transforms"]),
            mix_weight_bounds=tuple(d["mix_weight_bounds"]),
        )


@dataclass(frozen=True)
class PairedSample:
    clean: np.ndarray
    corrupted: np.ndarray
    instruction_id: int
    recipe: CorruptionRecipe


@dataclass(frozen=True)
class CraftSettings:
    """Knobs for recipe sampling; defaults are the reference toy configuration."""

    mixing_rounds_range: tuple[int, int] = (1, 4)
    mix_weight_bounds: tuple[float, float] = (0.1, 0.6)
    beta_shape: tuple[float, float] = (3.0, 3.0)
    base_transforms: tuple[str, ...] = BASE_TRANSFORMS
    transform_params: dict = field(default_factory=lambda: DEFAULT_TRANSFORM_PARAMS)
    asset_pool_size: int = 64

    def to_dict(self) -> dict:
        return {
            "mixing_rounds_range": list(self.mixing_rounds_range),
            "mix_weight_bounds": list(self.mix_weight_bounds),
            "beta_shape": list(self.beta_shape),
            "base_transforms": list(self.base_transforms),
            "transform_params": self.transform_params,
            "asset_pool_size": self.asset_pool_size,
        }


def sample_recipe(rng: np.random.Generator, settings: CraftSettings) -> CorruptionRecipe:
    lo, hi = settings.mixing_rounds_range
    rounds = int(rng.integers(lo, hi + 1))
    ops = tuple(str(rng.choice(MIX_OPS)) for _ in range(rounds))
    return CorruptionRecipe(
        seed=int(rng.integers(0, 2**63 - 1)),
        mixing_rounds=rounds,
        ops=ops,
        base_transforms=settings.base_transforms,
        mix_weight_bounds=settings.mix_weight_bounds,
    )


def pixmix_round(
    image: np.ndarray,
    asset: MixingAsset,
    op: str,
    weight: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Mix one asset into the image: convex blend or normalized geometric blend."""
    if image.shape != asset.image.shape:
        raise ValueError(f"image/asset shape mismatch: {image.shape} vs {asset.image.shape}")
    if op == "additive_mix":
        out = (1.0 - weight) * image + weight * asset.image
    elif op == "multiplicative_mix":
        eps = 1e-4
        mixed = np.power(image + eps, 1.0 - weight) * np.power(asset.image + eps, weight)
        lo, hi = float(mixed.min()), float(mixed.max())
        out = (mixed - lo) / max(hi - lo, 1e-8)
    else:
        raise ValueError(f"unknown mixing op {op!r}")
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def craft_corrupted(
    clean: np.ndarray,
    recipe: CorruptionRecipe,
    settings: CraftSettings = CraftSettings(),
) -> PairedSample:
    """Base transforms, then the recipe's mixing rounds, all from the recipe seed."""
    rng = np.random.default_rng(recipe.seed)
    img = apply_base_transforms(clean, recipe.base_transforms, rng, settings.transform_params)
    size = clean.shape[0]
    a, b = settings.beta_shape
    lo, hi = recipe.mix_weight_bounds
    for op in recipe.ops:
        kind = str(rng.choice(ASSET_KINDS))
        asset_seed = int(rng.integers(0, settings.asset_pool_size))
        asset = generate_mixing_asset(kind, asset_seed, size)
        weight = lo + (hi - lo) * float(rng.beta(a, b))
        img = pixmix_round(img, asset, op, weight, rng)
    return PairedSample(
        clean=clean, corrupted=img, instruction_id=UNIVERSAL_INSTRUCTION_ID, recipe=recipe
    )


def derive_pair_rng(master_seed: int, image_index: int, variant_index: int) -> np.random.Generator:
    """Per-(image, variant) stream; independent of crafting order."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(image_index, variant_index))
    return np.random.default_rng(ss)


def build_paired_dataset(
    clean_set: list[np.ndarray] | np.ndarray,
    variants_per_image: int,
    master_seed: int,
    settings: CraftSettings = CraftSettings(),
) -> list[PairedSample]:
    """variants_per_image distinct recipes per clean image, deterministic order."""
    if variants_per_image < 1:
        raise ValueError("variants_per_image must be >= 1")
    if len(clean_set) == 0:
        raise ValueError("clean_set is empty")
    samples = []
    for i, clean in enumerate(clean_set):
        for v in range(variants_per_image):
            rng = derive_pair_rng(master_seed, i, v)
            recipe = sample_recipe(rng, settings)
            samples.append(craft_corrupted(clean, recipe, settings))
    return samples
