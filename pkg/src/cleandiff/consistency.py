"""Few-step consistency editing distilled from the trained denoiser.

The consistency function maps any point of the sampling trajectory straight to
its clean endpoint: f(z_t, t) = c_skip(t) z_t + c_out(t) (z_t - sigma_t eps_hat)/alpha_t,
with boundary conditions c_skip(eps)=1, c_out(eps)=0 so f(z, eps)=z holds for
any parameters. Guidance scales are consumed as learned embeddings rather than
as inference-time CFG combinations, so sampling costs one evaluation per step.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from . import NULL_INSTRUCTION_ID, UNIVERSAL_INSTRUCTION_ID
from .codec import LatentCodec, to_chw, to_hwc
from .diffusion import ConditionBundle, eps_predict
from .guidance import cfg_multimodal
from .schedule import NoiseSchedule, add_noise, ddim_step
from .unet import Denoiser


@dataclass(frozen=True)
class BoundaryConfig:
    """Boundary-coefficient shape: epsilon timestep and data-scale constant."""

    eps_step: float = 1.0
    s: float = 0.5


def boundary_coeffs(t, cfg: BoundaryConfig = BoundaryConfig()):
    """(c_skip, c_out) at timestep t; exact (1, 0) at t = eps_step."""
    if isinstance(t, torch.Tensor):
        d = t.to(torch.float64) - cfg.eps_step
    else:
        d = torch.as_tensor(float(t) - cfg.eps_step, dtype=torch.float64)
    c_skip = cfg.s**2 / (d**2 + cfg.s**2)
    c_out = d / torch.sqrt(d**2 + cfg.s**2)
    return c_skip, c_out


@dataclass
class DistillConfig:
    grid_size: int = 50  # N: teacher-timestep grid points over [eps, T]
    skip: int = 20  # k: skipping interval, in grid points
    mu: float = 0.95  # EMA coefficient for the target network
    omega_T_range: tuple[float, float] = (5.0, 15.0)
    omega_I_range: tuple[float, float] = (1.0, 1.5)
    batch_size: int = 16
    lr: float = 1e-4
    steps: int = 700
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.skip < self.grid_size:
            raise ValueError("require 1 <= skip < grid_size")
        if not 0.0 <= self.mu < 1.0:
            raise ValueError("require 0 <= mu < 1")
        for lo, hi in (self.omega_T_range, self.omega_I_range):
            if lo > hi:
                raise ValueError("guidance ranges must be ordered")


def cm_grid(schedule: NoiseSchedule, grid_size: int, eps_step: float = 1.0) -> np.ndarray:
    """Integer timestep grid of grid_size points from eps_step up to T."""
    ts = np.round(np.linspace(eps_step, schedule.T, grid_size)).astype(np.int64)
    return ts


def embed_guidance(model: Denoiser, omega_I, omega_T, batch: int) -> torch.Tensor:
    """Per-sample guidance embedding; scalar scales are broadcast over the batch."""
    if not isinstance(omega_I, torch.Tensor):
        omega_I = torch.full((batch,), float(omega_I))
    if not isinstance(omega_T, torch.Tensor):
        omega_T = torch.full((batch,), float(omega_T))
    return model.embed_guidance(omega_I, omega_T)


def f_consistency(
    model: Denoiser,
    z_t: torch.Tensor,
    t: torch.Tensor | int,
    omega_I,
    omega_T,
    cond: ConditionBundle,
    schedule: NoiseSchedule,
    boundary: BoundaryConfig = BoundaryConfig(),
) -> torch.Tensor:
    """Consistency prediction of the clean latent from (z_t, t)."""
    b = z_t.shape[0]
    if isinstance(t, int):
        t = torch.full((b,), t, dtype=torch.long)
    if bool((t.to(torch.float64) < boundary.eps_step).any()):
        raise ValueError(f"timestep below boundary eps={boundary.eps_step}")
    gemb = embed_guidance(model, omega_I, omega_T, b).to(z_t.dtype)
    eps_hat = eps_predict(model, z_t, t, cond, guidance_emb=gemb)
    a, s = schedule.gather(t, dtype=z_t.dtype)
    c_skip, c_out = boundary_coeffs(t, boundary)
    c_skip = c_skip.to(z_t.dtype).view(-1, 1, 1, 1)
    c_out = c_out.to(z_t.dtype).view(-1, 1, 1, 1)
    return c_skip * z_t + c_out * (z_t - s * eps_hat) / a


@torch.no_grad()
def teacher_estimate(
    teacher: Denoiser,
    z_high: torch.Tensor,
    t_high: torch.Tensor,
    t_low: torch.Tensor,
    omega_I: torch.Tensor,
    omega_T: torch.Tensor,
    image_latent: torch.Tensor,
    schedule: NoiseSchedule,
) -> torch.Tensor:
    """One multi-modally guided solver hop of the frozen teacher, t_high -> t_low.

    The three condition branches are one batched forward (3 teacher rows per
    sample); their DDIM increments combine with the same algebra as the
    dual-scale CFG.
    """
    if bool((t_low >= t_high).any()):
        raise ValueError("teacher_estimate requires t_low < t_high")
    b = z_high.shape[0]
    ids3 = torch.cat(
        [
            torch.full((b,), NULL_INSTRUCTION_ID, dtype=torch.long),
            torch.full((b,), NULL_INSTRUCTION_ID, dtype=torch.long),
            torch.full((b,), UNIVERSAL_INSTRUCTION_ID, dtype=torch.long),
        ]
    )
    lat3 = torch.cat([torch.zeros_like(image_latent), image_latent, image_latent])
    t3 = t_high.repeat(3)
    eps3 = teacher(z_high.repeat(3, 1, 1, 1), t3, ids3, lat3)
    eps_uu, eps_iu, eps_it = eps3.chunk(3)

    def increment(eps_hat):
        return ddim_step(z_high, eps_hat, t_high, t_low, schedule) - z_high

    w_i = omega_I.view(-1, 1, 1, 1)
    w_t = omega_T.view(-1, 1, 1, 1)
    psi = cfg_multimodal(increment(eps_uu), increment(eps_iu), increment(eps_it), w_i, w_t)
    return z_high + psi


@torch.no_grad()
def ema_update(target: Denoiser, student: Denoiser, mu: float) -> None:
    """theta_minus <- mu * theta_minus + (1 - mu) * theta, elementwise."""
    for p_t, p_s in zip(target.parameters(), student.parameters()):
        p_t.mul_(mu).add_(p_s, alpha=1.0 - mu)


class Distiller:
    """Consistency distillation against a frozen teacher with an EMA target."""

    def __init__(
        self,
        student: Denoiser,
        teacher: Denoiser,
        schedule: NoiseSchedule,
        config: DistillConfig,
        boundary: BoundaryConfig = BoundaryConfig(),
    ):
        self.student = student
        self.teacher = teacher
        self.teacher.eval()
        for p in self.teacher.parameters():
            p.requires_grad_(False)
        self.target = copy.deepcopy(student)
        for p in self.target.parameters():
            p.requires_grad_(False)
        self.schedule = schedule
        self.config = config
        self.boundary = boundary
        self.grid = cm_grid(schedule, config.grid_size, boundary.eps_step)
        self.opt = torch.optim.Adam(student.parameters(), lr=config.lr)
        self.gen = torch.Generator().manual_seed(config.seed)
        self.index_rng = np.random.default_rng(config.seed)
        self.step_count = 0

    def sample_batch_indices(self, n: int) -> np.ndarray:
        return self.index_rng.integers(0, n, size=self.config.batch_size)

    def distill_step(self, z: torch.Tensor, image_latent: torch.Tensor) -> float:
        """One distillation step on a latent batch; returns the loss value."""
        cfg = self.config
        b = z.shape[0]
        n = torch.randint(0, cfg.grid_size - cfg.skip, (b,), generator=self.gen)
        t_high = torch.from_numpy(self.grid)[n + cfg.skip]
        t_low = torch.from_numpy(self.grid)[n]
        eps = torch.randn(z.shape, generator=self.gen)
        w_i = cfg.omega_I_range[0] + (cfg.omega_I_range[1] - cfg.omega_I_range[0]) * torch.rand(
            b, generator=self.gen
        )
        w_t = cfg.omega_T_range[0] + (cfg.omega_T_range[1] - cfg.omega_T_range[0]) * torch.rand(
            b, generator=self.gen
        )

        z_high = add_noise(z, eps, t_high, self.schedule)
        z_low_hat = teacher_estimate(
            self.teacher, z_high, t_high, t_low, w_i, w_t, image_latent, self.schedule
        )
        cond = ConditionBundle(UNIVERSAL_INSTRUCTION_ID, image_latent)
        with torch.no_grad():
            target_out = f_consistency(
                self.target, z_low_hat, t_low, w_i, w_t, cond, self.schedule, self.boundary
            )

        self.student.train()
        self.opt.zero_grad(set_to_none=True)
        student_out = f_consistency(
            self.student, z_high, t_high, w_i, w_t, cond, self.schedule, self.boundary
        )
        loss = F.mse_loss(student_out, target_out)
        loss.backward()
        self.opt.step()
        ema_update(self.target, self.student, cfg.mu)
        self.step_count += 1
        return float(loss.detach())


def cm_sample_timesteps(grid: np.ndarray, nfe: int) -> list[int]:
    """nfe timesteps striding the grid uniformly down from T."""
    n = len(grid)
    idx = [round((n - 1) * (1 - j / nfe)) for j in range(nfe)]
    return [int(grid[i]) for i in idx]


@torch.no_grad()
def sample_cm(
    model: Denoiser,
    schedule: NoiseSchedule,
    codec: LatentCodec,
    corrupted: np.ndarray,
    nfe: int = 4,
    omega_I: float = 1.3,
    omega_T: float = 7.5,
    seed: int = 0,
    boundary: BoundaryConfig = BoundaryConfig(),
    grid_size: int = 50,
) -> np.ndarray:
    """Multistep consistency editing: exactly nfe denoiser evaluations.

    Starts from pure noise at T; each round maps to the clean latent and
    re-noises at the next lower grid timestep, z ~ N(alpha(t) z0, sigma^2(t) I).
    """
    if nfe < 1:
        raise ValueError("nfe must be >= 1")
    model.eval()
    c_img = to_chw(corrupted)
    c_lat = codec.encode(c_img)
    cond = ConditionBundle(UNIVERSAL_INSTRUCTION_ID, c_lat)
    gen = torch.Generator().manual_seed(seed)
    z = torch.randn(c_lat.shape, generator=gen)

    grid = cm_grid(schedule, grid_size, boundary.eps_step)
    ts = cm_sample_timesteps(grid, nfe)
    z0 = z
    for j, t in enumerate(ts):
        z0 = f_consistency(model, z, t, omega_I, omega_T, cond, schedule, boundary)
        if j < nfe - 1:
            t_next = ts[j + 1]
            noise = torch.randn(z0.shape, generator=gen)
            z = add_noise(z0, noise, t_next, schedule)

    return to_hwc(codec.decode(z0))
