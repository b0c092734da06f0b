"""Model backends behind config-string identifiers.

Real model identifiers (``sd-vae:<repo>``, ``llava:<repo>``, ``sd:<repo>``)
require the corresponding libraries and locally available weights and
raise :class:`ModelUnavailableError` otherwise. The ``toy-*`` backends are
deterministic, CPU-only stand-ins that exercise the full pipeline surface
(encode, caption, noise + decode, fine-tune) at test scale.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

_MASK64 = (1 << 64) - 1

DEFAULT_LATENT_SHAPE = (4, 32, 32)
DEFAULT_ENCODER = "toy-avgpool"
DEFAULT_CAPTIONER = "toy-template"
DEFAULT_DIFFUSION = "toy-decoder"


class ModelUnavailableError(RuntimeError):
    """A requested model backend cannot be loaded in this environment."""


class SplitMix64:
    """Same splitmix64 stream the manifest seeds are meant to drive."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def _require_real_model(kind: str, identifier: str, needs: str) -> None:
    raise ModelUnavailableError(
        f"{kind} backend {identifier!r} requires {needs} with locally available "
        f"weights; none found in this environment. Use the matching toy backend "
        f"for offline runs."
    )


def encode_image(image: Image.Image, encoder: str, latent_shape: tuple[int, ...]) -> np.ndarray:
    """Project one image into a flattened latent vector."""
    if encoder == "toy-avgpool":
        return _toy_encode(image, latent_shape)
    if encoder.startswith("sd-vae:"):
        _require_real_model("encoder", encoder, "diffusers + torch")
    raise ValueError(f"unknown encoder backend {encoder!r}")


def _toy_encode(image: Image.Image, latent_shape: tuple[int, ...]) -> np.ndarray:
    if len(latent_shape) != 3 or not 1 <= latent_shape[0] <= 4:
        raise ValueError(f"toy encoder needs a (channels<=4, h, w) latent shape, got {latent_shape}")
    channels, height, width = latent_shape
    rgb = np.asarray(
        image.convert("RGB").resize((width, height), Image.Resampling.BILINEAR),
        dtype=np.float32,
    ) / 255.0  # (h, w, 3)
    luma = rgb.mean(axis=2, keepdims=True)
    stacked = np.concatenate([rgb, luma], axis=2)[:, :, :channels]  # (h, w, c)
    return stacked.transpose(2, 0, 1).reshape(-1).astype(np.float32)


def caption_image(image: Image.Image, label: str, prompt: str, captioner: str) -> str:
    """Produce one descriptive caption for (image, label)."""
    if captioner == "toy-template":
        return _toy_caption(image, label)
    if captioner.startswith("llava:"):
        _require_real_model("captioner", captioner, "a local LLaVA checkpoint")
    raise ValueError(f"unknown captioner backend {captioner!r}")


def _toy_caption(image: Image.Image, label: str) -> str:
    """Deterministic caption from coarse pixel statistics."""
    rgb = np.asarray(image.convert("RGB").resize((16, 16), Image.Resampling.BILINEAR), dtype=np.float32)
    brightness = float(rgb.mean()) / 255.0
    channel_names = ("red", "green", "blue")
    dominant = channel_names[int(np.argmax(rgb.mean(axis=(0, 1))))]
    spread = float(rgb.std()) / 255.0
    tone = "bright" if brightness > 0.5 else "dark"
    texture = "varied" if spread > 0.15 else "uniform"
    return (
        f"The {label} in the image has a {tone}, {dominant}-tinted appearance "
        f"with a {texture} texture and a compact overall shape."
    )


def decode_latent(
    vector: np.ndarray,
    tensor_shape: tuple[int, ...],
    seed: int,
    noise_strength: float,
    resolution: int,
    backend: str,
    checkpoint: dict | None = None,
) -> Image.Image:
    """Noise the latent with the pair seed, denoise, and render an image."""
    if backend == "toy-decoder":
        return _toy_decode(vector, tensor_shape, seed, noise_strength, resolution, checkpoint)
    if backend.startswith("sd:"):
        _require_real_model("diffusion", backend, "diffusers + torch")
    raise ValueError(f"unknown diffusion backend {backend!r}")


def _toy_decode(
    vector: np.ndarray,
    tensor_shape: tuple[int, ...],
    seed: int,
    noise_strength: float,
    resolution: int,
    checkpoint: dict | None,
) -> Image.Image:
    if len(tensor_shape) != 3:
        raise ValueError(f"toy decoder needs a (c, h, w) latent, got shape {tensor_shape}")
    latent = vector.astype(np.float64).reshape(tensor_shape)
    rng = SplitMix64(seed)
    noise = np.array(
        [rng.next_double() * 2.0 - 1.0 for _ in range(latent.size)], dtype=np.float64
    ).reshape(tensor_shape)
    scale = float(np.abs(latent).max()) or 1.0
    noised = latent + noise_strength * scale * noise
    if checkpoint is not None:
        noised = float(checkpoint["gain"]) * noised + float(checkpoint["bias"])
    channels, _, _ = tensor_shape
    rgb = noised[:3] if channels >= 3 else np.repeat(noised[:1], 3, axis=0)
    low, high = rgb.min(), rgb.max()
    span = (high - low) or 1.0
    pixels = np.clip((rgb - low) / span * 255.0, 0, 255).astype(np.uint8).transpose(1, 2, 0)
    image = Image.fromarray(pixels, mode="RGB")
    return image.resize((resolution, resolution), Image.Resampling.NEAREST)
