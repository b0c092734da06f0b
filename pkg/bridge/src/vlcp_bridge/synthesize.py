"""Drive a diffusion backend from a synthesis manifest.

One image per manifest pair, named ``{class_label}_{cluster_id}.png``,
sampled with the pair's seed and noise strength so reruns are
pixel-identical on the same stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import DEFAULT_DIFFUSION, DEFAULT_LATENT_SHAPE, decode_latent
from .formats import read_manifest


@dataclass
class SynthesisReport:
    outputs: list[Path]


def _output_name(label: str, cluster_id: int) -> str:
    if "/" in label or "\x00" in label:
        raise ValueError(f"class label {label!r} cannot be used in a filename")
    return f"{label}_{cluster_id}.png"


def synthesize_from_manifest(
    manifest_path: str | Path,
    output_dir: str | Path,
    backend: str = DEFAULT_DIFFUSION,
    resolution: int = 256,
    model_latent_shape: tuple[int, ...] = DEFAULT_LATENT_SHAPE,
    checkpoint: dict | None = None,
) -> SynthesisReport:
    """Render every manifest pair into ``output_dir``."""
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    pairs = read_manifest(manifest_path)
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    for pair in pairs:
        if pair.tensor_shape != tuple(model_latent_shape):
            raise ValueError(
                f"prototype shape {pair.tensor_shape} does not match the model latent "
                f"shape {tuple(model_latent_shape)} (pair {pair.class_label}/{pair.cluster_id})"
            )
        image = decode_latent(
            pair.vector,
            pair.tensor_shape,
            seed=pair.seed,
            noise_strength=pair.noise_strength,
            resolution=resolution,
            backend=backend,
            checkpoint=checkpoint,
        )
        target = out_dir / _output_name(pair.class_label, pair.cluster_id)
        image.save(target, format="PNG")
        outputs.append(target)
    return SynthesisReport(outputs=outputs)


def load_checkpoint(path: str | Path) -> dict:
    with np.load(path) as blob:
        return {key: blob[key].item() if blob[key].shape == () else blob[key] for key in blob.files}
