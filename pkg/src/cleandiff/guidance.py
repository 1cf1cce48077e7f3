"""Classifier-free guidance algebra.

Single-condition CFG, the dual (image, instruction) form used by the editor,
and the sqrt schedule that fades the image guidance scale from its maximum at
pure noise down to zero at the data end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GuidanceConfig:
    omega_T: float = 7.5
    omega_I_max: float = 1.8
    omega_I_mode: str = "sqrt_schedule"  # "constant" | "sqrt_schedule"

    def __post_init__(self):
        if self.omega_T < 0 or self.omega_I_max < 0:
            raise ValueError("guidance scales must be nonnegative")
        if self.omega_I_mode not in ("constant", "sqrt_schedule"):
            raise ValueError(f"unknown omega_I_mode {self.omega_I_mode!r}")

    def omega_I_at(self, t: float, T: int) -> float:
        if self.omega_I_mode == "constant":
            return self.omega_I_max
        return image_guidance_schedule(t, T, self.omega_I_max)

    def to_dict(self) -> dict:
        return {
            "omega_T": self.omega_T,
            "omega_I_max": self.omega_I_max,
            "omega_I_mode": self.omega_I_mode,
        }


def cfg_text(eps_cond, eps_uncond, omega: float):
    """(1 + omega) * eps_cond - omega * eps_uncond."""
    return (1.0 + omega) * eps_cond - omega * eps_uncond


def cfg_multimodal(eps_uu, eps_iu, eps_it, omega_I: float, omega_T: float):
    """Dual-scale CFG combining unconditional, image-only and fully conditional predictions.

    eps_uu + omega_I * (eps_iu - eps_uu) + omega_T * (eps_it - eps_iu),
    where uu = (no image, no text), iu = (image, no text), it = (image, text).
    """
    return eps_uu + omega_I * (eps_iu - eps_uu) + omega_T * (eps_it - eps_iu)


def image_guidance_schedule(t: float, T: int, omega_I_max: float = 1.8) -> float:
    """omega_I(t) = omega_I_max * sqrt(t / T); max at t=T, zero at t=0."""
    if not 0 <= t <= T:
        raise ValueError(f"timestep {t} outside [0, {T}]")
    return omega_I_max * math.sqrt(t / T)
