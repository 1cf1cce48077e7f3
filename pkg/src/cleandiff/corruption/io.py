"""Paired-dataset persistence: PNG images plus a recipe metadata file.

Layout of a dataset directory:
    dataset.json        header (config hash, sizes, master seed, settings)
    metadata.jsonl      one record per pair (paths, label, instruction, recipe)
    clean/img_00000.png one per source image
    corrupted/img_00000_v0.png ...

Re-crafting from the metadata reproduces the corrupted PNGs byte-for-byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .crafting import CorruptionRecipe, CraftSettings, PairedSample, craft_corrupted


def save_png(path: Path, image: np.ndarray) -> None:
    arr = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")


def load_png(path: Path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32)
    return arr / 255.0


def write_manifest(path: Path, entries: list[dict]) -> None:
    """Line-delimited clean-image manifest: {"path": ..., "label": ...} per line."""
    with open(path, "w") as f:
        for e in entries:
            f.write(json.dumps(e) + "\n")


def read_manifest(path: Path) -> list[dict]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def write_paired_dataset(
    out_dir: Path,
    samples: list[PairedSample],
    pair_keys: list[tuple[int, int]],
    labels: list[int],
    master_seed: int,
    settings: CraftSettings,
    config_hash: str,
) -> dict:
    """Persist pairs; clean images stored once per source index."""
    out_dir = Path(out_dir)
    (out_dir / "clean").mkdir(parents=True, exist_ok=True)
    (out_dir / "corrupted").mkdir(parents=True, exist_ok=True)

    records = []
    seen_clean: set[int] = set()
    for sample, (img_idx, var_idx), label in zip(samples, pair_keys, labels):
        clean_rel = f"clean/img_{img_idx:05d}.png"
        if img_idx not in seen_clean:
            save_png(out_dir / clean_rel, sample.clean)
            seen_clean.add(img_idx)
        corrupted_rel = f"corrupted/img_{img_idx:05d}_v{var_idx}.png"
        save_png(out_dir / corrupted_rel, sample.corrupted)
        records.append(
            {
                "image_index": img_idx,
                "variant_index": var_idx,
                "clean_path": clean_rel,
                "corrupted_path": corrupted_rel,
                "label": int(label),
                "instruction_id": sample.instruction_id,
                "recipe": sample.recipe.to_dict(),
            }
        )

    with open(out_dir / "metadata.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")

    header = {
        "config_hash": config_hash,
        "master_seed": master_seed,
        "n_pairs": len(records),
        "n_clean": len(seen_clean),
        "image_size": int(samples[0].clean.shape[0]),
        "settings": settings.to_dict(),
    }
    with open(out_dir / "dataset.json", "w") as f:
        json.dump(header, f, indent=2)
    return header


def read_paired_dataset(dataset_dir: Path) -> tuple[list[dict], dict]:
    """Return (records with loaded images, header)."""
    dataset_dir = Path(dataset_dir)
    with open(dataset_dir / "dataset.json") as f:
        header = json.load(f)
    records = []
    with open(dataset_dir / "metadata.jsonl") as f:
        for line in f:
            r = json.loads(line)
            r["clean"] = load_png(dataset_dir / r["clean_path"])
            r["corrupted"] = load_png(dataset_dir / r["corrupted_path"])
            r["recipe"] = CorruptionRecipe.from_dict(r["recipe"])
            records.append(r)
    return records, header


def recraft_from_metadata(
    dataset_dir: Path, settings: CraftSettings | None = None
) -> list[np.ndarray]:
    """Re-run crafting from stored recipes; used to verify exact round-trips."""
    dataset_dir = Path(dataset_dir)
    with open(dataset_dir / "dataset.json") as f:
        header = json.load(f)
    if settings is None:
        s = header["settings"]
        settings = CraftSettings(
            mixing_rounds_range=tuple(s["mixing_rounds_range"]),
            mix_weight_bounds=tuple(s["mix_weight_bounds"]),
            beta_shape=tuple(s["beta_shape"]),
            base_transforms=tuple(s["base_transforms"]),
            transform_params=s["transform_params"],
            asset_pool_size=s["asset_pool_size"],
        )
    out = []
    with open(dataset_dir / "metadata.jsonl") as f:
        for line in f:
            r = json.loads(line)
            clean = load_png(dataset_dir / r["clean_path"])
            recipe = CorruptionRecipe.from_dict(r["recipe"])
            out.append(craft_corrupted(clean, recipe, settings).corrupted)
    return out
