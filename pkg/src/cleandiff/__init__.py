"""Latent-diffusion corruption editing with few-step consistency sampling and a TTA harness."""

__version__ = "0.1.0"

UNIVERSAL_INSTRUCTION_ID = 0
NULL_INSTRUCTION_ID = 1
