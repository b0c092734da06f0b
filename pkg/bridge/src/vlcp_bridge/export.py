"""Export an image folder into the latent + caption interchange files.

Layout convention: one subdirectory per class under the image root
(``root/<class dir>/<image files>``). The class label defaults to the
directory name and can be remapped via the job's label mapping. Images
that fail to decode are skipped with a log line and the row indices are
re-compacted so the emitted files stay contiguous from 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backends import (
    DEFAULT_CAPTIONER,
    DEFAULT_ENCODER,
    DEFAULT_LATENT_SHAPE,
    caption_image,
    encode_image,
)
from .formats import write_captions, write_latents

log = logging.getLogger(__name__)

DEFAULT_PROMPT_TEMPLATE = (
    "Describe the physical appearance of the {$CLASSNAME} in the image. "
    "Include details about its shape, posture, color, and any distinct features."
)

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


@dataclass
class ExportJob:
    image_dir: Path
    latents_path: Path
    captions_path: Path
    labels: dict[str, str] = field(default_factory=dict)  # subdir name -> class label
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    encoder: str = DEFAULT_ENCODER
    captioner: str = DEFAULT_CAPTIONER
    latent_shape: tuple[int, ...] = DEFAULT_LATENT_SHAPE


@dataclass
class ExportReport:
    n_exported: int
    n_skipped: int
    classes: list[str]


def export_latents_and_captions(job: ExportJob) -> ExportReport:
    """Encode and caption every readable image under the job's root."""
    root = Path(job.image_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"image directory {root} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise FileNotFoundError(f"no class subdirectories under {root}")

    vectors: list[np.ndarray] = []
    records: list[dict] = []
    skipped = 0
    labels_seen: list[str] = []
    for class_dir in class_dirs:
        label = job.labels.get(class_dir.name, class_dir.name)
        labels_seen.append(label)
        prompt = job.prompt_template.replace("{$CLASSNAME}", label)
        files = sorted(p for p in class_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
        for image_path in files:
            try:
                with Image.open(image_path) as image:
                    image.load()
                    vector = encode_image(image, job.encoder, job.latent_shape)
                    caption = caption_image(image, label, prompt, job.captioner)
            except (UnidentifiedImageError, OSError) as exc:
                skipped += 1
                log.warning("skipping unreadable image %s: %s", image_path, exc)
                continue
            records.append(
                {
                    "index": len(vectors),
                    "sample_id": str(image_path.relative_to(root)),
                    "label": label,
                    "caption": caption,
                }
            )
            vectors.append(vector)

    if not vectors:
        raise FileNotFoundError(f"no readable images under {root}")
    data = np.stack(vectors).astype(np.float32)
    write_latents(data, job.latent_shape, job.latents_path)
    write_captions(records, job.captions_path)
    return ExportReport(n_exported=len(vectors), n_skipped=skipped, classes=labels_seen)
