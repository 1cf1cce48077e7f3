"""Tiny conditional U-Net denoiser for latent-space noise prediction.

Dual conditioning: the corrupted-image latent enters by channel concatenation
(extra input channels zero-initialized so the net starts blind to it), the
instruction enters as a learned embedding added to the timestep embedding.
An optional guidance embedding (Fourier features of the two CFG scales through
a zero-initialized projection) rides the same embedding pathway; it is unused
while training the base denoiser and only comes alive during distillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass(frozen=True)
class DenoiserConfig:
    latent_channels: int = 12
    latent_size: int = 32
    base_width: int = 32
    channel_mults: tuple[int, ...] = (1, 2, 3)
    res_blocks: int = 2
    emb_dim: int = 64
    attn_levels: tuple[int, ...] = (2,)
    n_instructions: int = 2
    guidance_freqs: int = 8

    def to_dict(self) -> dict:
        return {
            "latent_channels": self.latent_channels,
            "latent_size": self.latent_size,
            "base_width": self.base_width,
            "channel_mults": list(self.channel_mults),
            "res_blocks": self.res_blocks,
            "emb_dim": self.emb_dim,
            "attn_levels": list(self.attn_levels),
            "n_instructions": self.n_instructions,
            "guidance_freqs": self.guidance_freqs,
        }

    @staticmethod
    def from_dict(d: dict) -> "DenoiserConfig":
        d = dict(d)
        d["channel_mults"] = tuple(d["channel_mults"])
        d["attn_levels"] = tuple(d["attn_levels"])
        return DenoiserConfig(**d)


def timestep_embedding(t: torch.Tensor, dim: int, max_period: float = 10000.0) -> torch.Tensor:
    """Standard sinusoidal embedding of (possibly fractional) timesteps."""
    half = dim // 2
    freqs = torch.exp(-math.log(max_period) * torch.arange(half, dtype=t.dtype) / half)
    args = t[:, None].to(freqs.dtype) * freqs[None]
    return torch.cat([torch.cos(args), torch.sin(args)], dim=-1)


def fourier_scale_features(omega: torch.Tensor, n_freqs: int) -> torch.Tensor:
    """sin/cos features of a guidance scale at log-spaced frequencies, [B, 2*n_freqs]."""
    freqs = torch.logspace(0.0, 2.0, n_freqs, dtype=omega.dtype)
    args = omega[:, None] * freqs[None]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=-1)


class ResBlock(nn.Module):
    def __init__(self, cin: int, cout: int, emb_dim: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(8, cin)
        self.conv1 = nn.Conv2d(cin, cout, 3, padding=1)
        self.emb_proj = nn.Linear(emb_dim, cout)
        self.norm2 = nn.GroupNorm(8, cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.skip = nn.Conv2d(cin, cout, 1) if cin != cout else nn.Identity()

    def forward(self, x, emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.emb_proj(emb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class SelfAttention2d(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.norm = nn.GroupNorm(8, channels)
        self.qkv = nn.Conv2d(channels, channels * 3, 1)
        self.proj = nn.Conv2d(channels, channels, 1)

    def forward(self, x):
        b, c, h, w = x.shape
        q, k, v = self.qkv(self.norm(x)).reshape(b, 3, c, h * w).unbind(1)
        attn = torch.softmax(q.transpose(1, 2) @ k / math.sqrt(c), dim=-1)
        out = (v @ attn.transpose(1, 2)).reshape(b, c, h, w)
        return x + self.proj(out)


class Denoiser(nn.Module):
    """Epsilon-prediction U-Net over latents, with dual conditioning.

    Forward input is the noisy latent concatenated with the image-condition
    latent along channels. ``eval_rows`` counts sample-rows processed, which is
    the NFE bookkeeping unit (a batched forward of B rows adds B).
    """

    def __init__(self, config: DenoiserConfig | None = None):
        super().__init__()
        cfg = config or DenoiserConfig()
        self.config = cfg
        self.eval_rows = 0
        ch = cfg.base_width
        emb = cfg.emb_dim

        self.time_mlp = nn.Sequential(
            nn.Linear(emb, emb), nn.SiLU(), nn.Linear(emb, emb)
        )
        self.instruction_emb = nn.Embedding(cfg.n_instructions, emb)
        # guidance pathway: fourier(omega_I) * fourier(omega_T) -> zero-init linear
        self.guidance_proj = nn.Linear(2 * cfg.guidance_freqs, emb)
        nn.init.zeros_(self.guidance_proj.weight)
        nn.init.zeros_(self.guidance_proj.bias)

        self.conv_in = nn.Conv2d(cfg.latent_channels * 2, ch, 3, padding=1)
        with torch.no_grad():
            self.conv_in.weight[:, cfg.latent_channels:].zero_()

        widths = [cfg.base_width * m for m in cfg.channel_mults]
        self.down_blocks = nn.ModuleList()
        self.down_samplers = nn.ModuleList()
        skip_chs = [ch]
        for level, w in enumerate(widths):
            blocks = nn.ModuleList()
            for _ in range(cfg.res_blocks):
                blocks.append(ResBlock(ch, w, emb))
                ch = w
                skip_chs.append(ch)
            if level in cfg.attn_levels:
                blocks.append(SelfAttention2d(ch))
            self.down_blocks.append(blocks)
            if level < len(widths) - 1:
                self.down_samplers.append(nn.Conv2d(ch, ch, 3, stride=2, padding=1))
                skip_chs.append(ch)

        self.mid1 = ResBlock(ch, ch, emb)
        self.mid_attn = SelfAttention2d(ch)
        self.mid2 = ResBlock(ch, ch, emb)

        self.up_blocks = nn.ModuleList()
        self.up_samplers = nn.ModuleList()
        for level, w in reversed(list(enumerate(widths))):
            blocks = nn.ModuleList()
            for _ in range(cfg.res_blocks + 1):
                blocks.append(ResBlock(ch + skip_chs.pop(), w, emb))
                ch = w
            if level in cfg.attn_levels:
                blocks.append(SelfAttention2d(ch))
            self.up_blocks.append(blocks)
            if level > 0:
                self.up_samplers.append(nn.ConvTranspose2d(ch, ch, 4, stride=2, padding=1))

        self.norm_out = nn.GroupNorm(8, ch)
        self.conv_out = nn.Conv2d(ch, cfg.latent_channels, 3, padding=1)
        nn.init.zeros_(self.conv_out.weight)
        nn.init.zeros_(self.conv_out.bias)

    def embed_guidance(self, omega_I: torch.Tensor, omega_T: torch.Tensor) -> torch.Tensor:
        """Elementwise product of the two scales' Fourier features, projected."""
        fi = fourier_scale_features(omega_I, self.config.guidance_freqs)
        ft = fourier_scale_features(omega_T, self.config.guidance_freqs)
        return self.guidance_proj(fi * ft)

    def forward(
        self,
        z_t: torch.Tensor,
        t: torch.Tensor,
        instruction_ids: torch.Tensor,
        image_latent: torch.Tensor,
        guidance_emb: torch.Tensor | None = None,
    ) -> torch.Tensor:
        if z_t.shape != image_latent.shape:
            raise ValueError(
                f"noisy/image-condition latent shape mismatch: "
                f"{tuple(z_t.shape)} vs {tuple(image_latent.shape)}"
            )
        self.eval_rows += z_t.shape[0]

        emb = self.time_mlp(timestep_embedding(t.to(z_t.dtype), self.config.emb_dim))
        emb = emb + self.instruction_emb(instruction_ids)
        if guidance_emb is not None:
            emb = emb + guidance_emb

        h = self.conv_in(torch.cat([z_t, image_latent], dim=1))
        skips = [h]
        for level, blocks in enumerate(self.down_blocks):
            for block in blocks:
                h = block(h, emb) if isinstance(block, ResBlock) else block(h)
                if isinstance(block, ResBlock):
                    skips.append(h)
            if level < len(self.down_samplers):
                h = self.down_samplers[level](h)
                skips.append(h)

        h = self.mid2(self.mid_attn(self.mid1(h, emb)), emb)

        for i, blocks in enumerate(self.up_blocks):
            for block in blocks:
                if isinstance(block, ResBlock):
                    h = block(torch.cat([h, skips.pop()], dim=1), emb)
                else:
                    h = block(h)
            if i < len(self.up_samplers):
                h = self.up_samplers[i](h)

        return self.conv_out(F.silu(self.norm_out(h)))
