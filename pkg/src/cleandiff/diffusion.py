"""Denoiser training objective, condition handling, and guided DDIM sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from . import NULL_INSTRUCTION_ID, UNIVERSAL_INSTRUCTION_ID
from .codec import LatentCodec, to_chw, to_hwc
from .guidance import GuidanceConfig, cfg_multimodal
from .schedule import NoiseSchedule, add_noise, ddim_step
from .unet import Denoiser


@dataclass
class ConditionBundle:
    """Conditioning for one denoiser call.

    ``instruction`` is a token id or None; ``image_latent`` is the encoded
    corrupted image or None. Nulls are realized as the dedicated null
    embedding id and the all-zero latent sentinel, never as absent inputs.
    """

    instruction: int | None = UNIVERSAL_INSTRUCTION_ID
    image_latent: torch.Tensor | None = None

    def resolve(self, batch: int, latent_shape: tuple[int, int, int]) -> tuple[torch.Tensor, torch.Tensor]:
        instr = NULL_INSTRUCTION_ID if self.instruction is None else self.instruction
        ids = torch.full((batch,), instr, dtype=torch.long)
        if self.image_latent is None:
            lat = torch.zeros((batch, *latent_shape))
        else:
            lat = self.image_latent
            if lat.ndim == 3:
                lat = lat[None].expand(batch, -1, -1, -1)
        return ids, lat


def eps_predict(
    model: Denoiser,
    z_t: torch.Tensor,
    t: torch.Tensor,
    cond: ConditionBundle,
    guidance_emb: torch.Tensor | None = None,
) -> torch.Tensor:
    """Network noise prediction under a condition bundle."""
    ids, lat = cond.resolve(z_t.shape[0], tuple(z_t.shape[1:]))
    return model(z_t, t, ids, lat.to(z_t.dtype), guidance_emb)


def eps_loss(
    model: Denoiser,
    z: torch.Tensor,
    image_latent: torch.Tensor,
    instruction_ids: torch.Tensor,
    t: torch.Tensor,
    eps: torch.Tensor,
    schedule: NoiseSchedule,
) -> torch.Tensor:
    """Denoising objective: mean squared error between eps and its prediction.

    Pure function of explicit randomness (t, eps, already-dropped conditions),
    which keeps it usable for finite-difference gradient checks.
    """
    z_t = add_noise(z, eps, t, schedule)
    eps_hat = model(z_t, t, instruction_ids, image_latent)
    return F.mse_loss(eps_hat, eps)


@dataclass
class DPMTrainConfig:
    batch_size: int = 16
    lr: float = 2e-4
    steps: int = 1200
    p_drop_text: float = 0.05
    p_drop_image: float = 0.05
    p_drop_both: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for p in (self.p_drop_text, self.p_drop_image, self.p_drop_both):
            if not 0.0 <= p <= 1.0:
                raise ValueError("dropout probabilities must lie in [0, 1]")
        if self.p_drop_text + self.p_drop_image + self.p_drop_both > 1.0:
            raise ValueError("dropout probabilities must sum to at most 1")


def apply_condition_dropout(
    instruction_ids: torch.Tensor,
    image_latent: torch.Tensor,
    u: torch.Tensor,
    cfg: DPMTrainConfig,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Null out conditions per sample from a shared uniform draw u in [0,1)."""
    drop_text = u < cfg.p_drop_text
    drop_image = (u >= cfg.p_drop_text) & (u < cfg.p_drop_text + cfg.p_drop_image)
    drop_both = (u >= cfg.p_drop_text + cfg.p_drop_image) & (
        u < cfg.p_drop_text + cfg.p_drop_image + cfg.p_drop_both
    )
    ids = instruction_ids.clone()
    ids[drop_text | drop_both] = NULL_INSTRUCTION_ID
    lat = image_latent.clone()
    lat[drop_image | drop_both] = 0.0
    return ids, lat


class DPMTrainer:
    """Adam training loop over pre-encoded (clean, corrupted) latent pairs."""

    def __init__(
        self,
        model: Denoiser,
        schedule: NoiseSchedule,
        config: DPMTrainConfig,
    ):
        self.model = model
        self.schedule = schedule
        self.config = config
        self.opt = torch.optim.Adam(model.parameters(), lr=config.lr)
        self.gen = torch.Generator().manual_seed(config.seed)
        self.index_rng = np.random.default_rng(config.seed)
        self.step_count = 0

    def sample_batch_indices(self, n: int) -> np.ndarray:
        return self.index_rng.integers(0, n, size=self.config.batch_size)

    def train_step(self, z: torch.Tensor, image_latent: torch.Tensor) -> float:
        """One optimizer step on a latent batch; returns the loss value."""
        if z.shape[0] == 0:
            raise ValueError("empty batch")
        b = z.shape[0]
        t = torch.randint(1, self.schedule.T + 1, (b,), generator=self.gen)
        eps = torch.randn(z.shape, generator=self.gen)
        u = torch.rand(b, generator=self.gen)
        ids = torch.full((b,), UNIVERSAL_INSTRUCTION_ID, dtype=torch.long)
        ids, lat = apply_condition_dropout(ids, image_latent, u, self.config)

        self.model.train()
        self.opt.zero_grad(set_to_none=True)
        loss = eps_loss(self.model, z, lat, ids, t, eps, self.schedule)
        loss.backward()
        self.opt.step()
        self.step_count += 1
        return float(loss.detach())


def dpm_timesteps(T: int, steps: int) -> list[int]:
    """Uniform stride over [T, 0], inclusive of both ends; steps+1 points."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return [round(T * (1 - i / steps)) for i in range(steps + 1)]


@torch.no_grad()
def sample_dpm(
    model: Denoiser,
    schedule: NoiseSchedule,
    codec: LatentCodec,
    corrupted: np.ndarray,
    steps: int = 20,
    guidance: GuidanceConfig | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Edit corrupted images with guided DDIM sampling from pure noise.

    Each of the ``steps`` timesteps costs three denoiser evaluations (the
    unconditional, image-only and fully conditional branches of the dual CFG),
    run as one batched forward of 3B rows.
    """
    guidance = guidance or GuidanceConfig()
    model.eval()
    c_img = to_chw(corrupted)
    b = c_img.shape[0]
    c_lat = codec.encode(c_img)
    gen = torch.Generator().manual_seed(seed)
    z = torch.randn(c_lat.shape, generator=gen)

    ids3 = torch.cat(
        [
            torch.full((b,), NULL_INSTRUCTION_ID, dtype=torch.long),
            torch.full((b,), NULL_INSTRUCTION_ID, dtype=torch.long),
            torch.full((b,), UNIVERSAL_INSTRUCTION_ID, dtype=torch.long),
        ]
    )
    lat3 = torch.cat([torch.zeros_like(c_lat), c_lat, c_lat])

    ts = dpm_timesteps(schedule.T, steps)
    for t, t_prev in zip(ts[:-1], ts[1:]):
        t3 = torch.full((3 * b,), t, dtype=torch.long)
        eps3 = model(z.repeat(3, 1, 1, 1), t3, ids3, lat3)
        eps_uu, eps_iu, eps_it = eps3.chunk(3)
        omega_I = guidance.omega_I_at(t, schedule.T)
        eps_hat = cfg_multimodal(eps_uu, eps_iu, eps_it, omega_I, guidance.omega_T)
        z = ddim_step(z, eps_hat, t, t_prev, schedule)

    return to_hwc(codec.decode(z))
