"""Discrete variance-preserving noise schedule.

alpha(t)^2 + sigma(t)^2 = 1 holds exactly by construction: the table is
(cos(phi_t), sin(phi_t)) for a phase phi_t linear in t (cosine schedule with
endpoint offsets so alpha(0) ~ 1 and alpha(T) stays safely above zero for the
1/alpha division in the consistency parameterization).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
import torch

DEFAULT_T = 1000
DEFAULT_PHI0 = 5e-4
DEFAULT_ALPHA_T = 0.05


@dataclass(frozen=True)
class NoiseSchedule:
    """Tabulated alpha/sigma over integer timesteps t in [0, T]."""

    T: int
    alphas: np.ndarray
    sigmas: np.ndarray
    _alphas_t: torch.Tensor = field(init=False, repr=False, compare=False)
    _sigmas_t: torch.Tensor = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.alphas.shape != (self.T + 1,) or self.sigmas.shape != (self.T + 1,):
            raise ValueError("schedule tables must have T+1 entries")
        object.__setattr__(self, "_alphas_t", torch.from_numpy(self.alphas))
        object.__setattr__(self, "_sigmas_t", torch.from_numpy(self.sigmas))

    def lookup(self, t: int) -> tuple[float, float]:
        """Return (alpha(t), sigma(t)) for an integer timestep."""
        if not 0 <= t <= self.T:
            raise ValueError(f"timestep {t} outside [0, {self.T}]")
        return float(self.alphas[t]), float(self.sigmas[t])

    def gather(self, t: torch.Tensor, dtype=torch.float32) -> tuple[torch.Tensor, torch.Tensor]:
        """Vectorized lookup for a batch of integer timesteps, shaped [B, 1, 1, 1]."""
        a = self._alphas_t.to(dtype)[t].view(-1, 1, 1, 1)
        s = self._sigmas_t.to(dtype)[t].view(-1, 1, 1, 1)
        return a, s

    def table_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.alphas.tobytes())
        h.update(self.sigmas.tobytes())
        return h.hexdigest()[:16]


def cosine_vp_schedule(
    T: int = DEFAULT_T, phi0: float = DEFAULT_PHI0, alpha_T: float = DEFAULT_ALPHA_T
) -> NoiseSchedule:
    """Cosine VP schedule: phase runs linearly from phi0 to arccos(alpha_T)."""
    phi1 = math.acos(alpha_T)
    t = np.arange(T + 1, dtype=np.float64)
    phi = phi0 + (phi1 - phi0) * t / T
    return NoiseSchedule(T=T, alphas=np.cos(phi), sigmas=np.sin(phi))


def add_noise(
    z: torch.Tensor, eps: torch.Tensor, t: torch.Tensor | int, schedule: NoiseSchedule
) -> torch.Tensor:
    """Forward diffusion: z_t = alpha(t) * z + sigma(t) * eps."""
    if z.shape != eps.shape:
        raise ValueError(f"z/eps shape mismatch: {tuple(z.shape)} vs {tuple(eps.shape)}")
    if isinstance(t, int):
        t = torch.full((z.shape[0],), t, dtype=torch.long)
    a, s = schedule.gather(t, dtype=z.dtype)
    return a * z + s * eps


def ddim_update(z_t, eps_hat, alpha_t, sigma_t, alpha_prev, sigma_prev):
    """Coefficient-level DDIM update (eta=0).

    z0_hat = (z_t - sigma_t eps_hat) / alpha_t
    z_prev = alpha_prev z0_hat + sigma_prev eps_hat
    """
    z0_hat = (z_t - sigma_t * eps_hat) / alpha_t
    return alpha_prev * z0_hat + sigma_prev * eps_hat


def ddim_step(
    z_t: torch.Tensor,
    eps_hat: torch.Tensor,
    t: torch.Tensor | int,
    t_prev: torch.Tensor | int,
    schedule: NoiseSchedule,
) -> torch.Tensor:
    """Deterministic DDIM step from timestep t down to t_prev (t_prev < t)."""
    if isinstance(t, int):
        t = torch.full((z_t.shape[0],), t, dtype=torch.long)
    if isinstance(t_prev, int):
        t_prev = torch.full((z_t.shape[0],), t_prev, dtype=torch.long)
    if bool((t_prev >= t).any()):
        raise ValueError("ddim_step requires t_prev < t")
    a, s = schedule.gather(t, dtype=z_t.dtype)
    a_p, s_p = schedule.gather(t_prev, dtype=z_t.dtype)
    return ddim_update(z_t, eps_hat, a, s, a_p, s_p)
