"""Fine-tune the generative backend on (latent, caption) pairs.

Defaults mirror the production recipe: batch size 8 for 8 epochs. The
``toy`` backend trains a two-parameter affine denoiser (gain, bias) with
SGD on an MSE denoising objective -- enough to exercise checkpointing,
loss logging, and resume without any GPU. Real backends need diffusers +
torch + local weights and fail loudly otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import ModelUnavailableError, SplitMix64
from .formats import read_latents

log = logging.getLogger(__name__)

DEFAULT_EPOCHS = 8
DEFAULT_BATCH_SIZE = 8


@dataclass
class FinetuneConfig:
    latents_path: Path
    checkpoint_path: Path
    backend: str = "toy"
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    learning_rate: float = 0.05
    noise_strength: float = 0.7
    seed: int = 0
    resume_from: Path | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class FinetuneResult:
    steps_run: int
    final_step: int
    losses: list[float]
    checkpoint_path: Path | None


def plan_steps(n_samples: int, epochs: int, batch_size: int) -> int:
    return epochs * math.ceil(n_samples / batch_size)


def dry_run_summary(config: FinetuneConfig, n_samples: int) -> dict:
    """Config echo without touching any model."""
    return {
        "backend": config.backend,
        "batch_size": config.batch_size,
        "epochs": config.epochs,
        "n_samples": n_samples,
        "steps": plan_steps(n_samples, config.epochs, config.batch_size),
        "noise_strength": config.noise_strength,
        "seed": config.seed,
    }


def finetune_diffusion(config: FinetuneConfig) -> FinetuneResult:
    """Train per ``config`` and write a checkpoint usable by synthesis."""
    data, _ = read_latents(config.latents_path)
    if data.shape[0] == 0:
        raise ValueError(f"{config.latents_path}: no training samples")
    if config.backend != "toy":
        if config.backend.startswith("sd:"):
            raise ModelUnavailableError(
                f"fine-tuning backend {config.backend!r} requires diffusers + torch with "
                f"local weights and a GPU; none available here. Use backend 'toy'."
            )
        raise ValueError(f"unknown fine-tune backend {config.backend!r}")

    gain, bias, start_step = 1.0, 0.0, 0
    if config.resume_from is not None:
        with np.load(config.resume_from) as blob:
            gain, bias, start_step = float(blob["gain"]), float(blob["bias"]), int(blob["step"])

    x = data.astype(np.float64)
    n = x.shape[0]
    rng = SplitMix64(config.seed)
    total_steps = plan_steps(n, config.epochs, config.batch_size)
    losses: list[float] = []
    scale = float(np.abs(x).max()) or 1.0
    for step in range(total_steps):
        rows = np.array([rng.next_u64() % n for _ in range(config.batch_size)])
        batch = x[rows]
        noise = np.array(
            [rng.next_double() * 2.0 - 1.0 for _ in range(batch.size)]
        ).reshape(batch.shape)
        noised = batch + config.noise_strength * scale * noise
        predicted = gain * noised + bias
        residual = predicted - batch
        loss = float((residual**2).mean())
        losses.append(loss)
        grad_gain = 2.0 * float((residual * noised).mean())
        grad_bias = 2.0 * float(residual.mean())
        gain -= config.learning_rate * grad_gain / scale**2
        bias -= config.learning_rate * grad_bias
        log.info("step %d loss %.6f", start_step + step, loss)

    final_step = start_step + total_steps
    np.savez(config.checkpoint_path, gain=gain, bias=bias, step=final_step, backend=config.backend)
    return FinetuneResult(
        steps_run=total_steps,
        final_step=final_step,
        losses=losses,
        checkpoint_path=config.checkpoint_path,
    )
