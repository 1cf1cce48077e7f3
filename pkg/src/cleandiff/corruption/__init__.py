"""Training-pair crafting via mixing augmentations, plus the held-out test-corruption suite."""

from .assets import AssetKind, MixingAsset, generate_mixing_asset
from .crafting import (
    CorruptionRecipe,
    CraftSettings,
    PairedSample,
    build_paired_dataset,
    craft_corrupted,
    pixmix_round,
    sample_recipe,
)
from .testsuite import TEST_CORRUPTION_KINDS, TestCorruption, apply_test_corruption
from .transforms import BASE_TRANSFORMS, apply_base_transforms

__all__ = [
    "AssetKind",
    "MixingAsset",
    "generate_mixing_asset",
    "CorruptionRecipe",
    "CraftSettings",
    "PairedSample",
    "build_paired_dataset",
    "craft_corrupted",
    "pixmix_round",
    "sample_recipe",
    "TestCorruption",
    "TEST_CORRUPTION_KINDS",
    "apply_test_corruption",
    "BASE_TRANSFORMS",
    "apply_base_transforms",
]
