"""Exactly invertible image<->latent codec.

A space-to-depth rearrangement followed by the affine map v -> 2v - 1. Unlike a
learned autoencoder this codec is a bijection on the valid range, so every
latent-space identity downstream can be asserted without tolerance games.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F


@dataclass(frozen=True)
class LatentCodec:
    """Space-to-depth codec with downsample factor ``f``.

    Images are [B, 3, H, W] in [0, 1]; latents are [B, 3*f*f, H/f, W/f] in
    roughly [-1, 1].
    """

    f: int = 2

    @property
    def latent_channels(self) -> int:
        return 3 * self.f * self.f

    def latent_shape(self, height: int, width: int) -> tuple[int, int, int]:
        self._check_dims(height, width)
        return (self.latent_channels, height // self.f, width // self.f)

    def _check_dims(self, height: int, width: int) -> None:
        if height % self.f or width % self.f:
            raise ValueError(
                f"image dims ({height}x{width}) not divisible by codec factor f={self.f}"
            )

    def encode(self, image: torch.Tensor) -> torch.Tensor:
        """Rearrange pixels into channels and map [0,1] -> [-1,1]."""
        if image.ndim != 4 or image.shape[1] != 3:
            raise ValueError(f"expected [B, 3, H, W] image, got {tuple(image.shape)}")
        self._check_dims(image.shape[2], image.shape[3])
        z = F.pixel_unshuffle(image, self.f)
        return z * 2.0 - 1.0

    def decode(self, latent: torch.Tensor) -> torch.Tensor:
        """Inverse affine then depth-to-space; output clamped to [0,1]."""
        if latent.ndim != 4 or latent.shape[1] != self.latent_channels:
            raise ValueError(
                f"expected [B, {self.latent_channels}, h, w] latent, got {tuple(latent.shape)}"
            )
        x = F.pixel_shuffle((latent + 1.0) / 2.0, self.f)
        return x.clamp(0.0, 1.0)

    def params(self) -> dict:
        """Codec identity block stored in checkpoints."""
        return {"kind": "space_to_depth", "f": self.f, "scale": 2.0, "offset": -1.0}


def to_chw(images: np.ndarray) -> torch.Tensor:
    """[B, H, W, 3] (or [H, W, 3]) float array in [0,1] -> [B, 3, H, W] tensor."""
    if images.ndim == 3:
        images = images[None]
    return torch.from_numpy(np.ascontiguousarray(images)).permute(0, 3, 1, 2).contiguous()


def to_hwc(images: torch.Tensor) -> np.ndarray:
    """[B, 3, H, W] tensor -> [B, H, W, 3] float32 array."""
    return images.detach().permute(0, 2, 3, 1).contiguous().numpy().astype(np.float32, copy=False)
