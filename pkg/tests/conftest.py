from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlcp import CaptionRecord, LatentMatrix

_BACKGROUNDS = ("grassy", "sandy", "snowy")
_SIZES = ("small", "large", "medium")
_COLORS = ("brown", "white", "golden", "spotted")
_POSES = ("standing", "running", "sitting", "sleeping")
_FILLERS = ("elegant", "sleek", "alert", "graceful", "sturdy", "fluffy")


def make_synthetic_dataset(
    n_classes: int = 5,
    per_class: int = 60,
    dim: int = 8,
    seed: int = 20240501,
) -> tuple[LatentMatrix, list[CaptionRecord]]:
    """Blob-structured latents with templated captions.

    Each class has three latent blobs; the blob determines the caption's
    background word, so clusters carry a real textual signal. The caption
    vocabulary spans document frequencies on both sides of the default
    beta=0.2 threshold: class/template words appear in every caption,
    background/size words in roughly a third, colors and poses in a
    quarter, and filler adjectives in about 15%.
    """
    rng = np.random.default_rng(seed)
    labels = [f"class {chr(ord('a') + i)}" for i in range(n_classes)]
    data = np.zeros((n_classes * per_class, dim), dtype=np.float32)
    records: list[CaptionRecord] = []
    for c, label in enumerate(labels):
        class_offset = rng.normal(loc=4.0 * c, scale=0.5, size=dim)
        blob_offsets = rng.normal(scale=1.5, size=(len(_BACKGROUNDS), dim))
        for i in range(per_class):
            blob = int(i % len(_BACKGROUNDS))
            row = c * per_class + i
            data[row] = (class_offset + blob_offsets[blob] + rng.normal(scale=0.08, size=dim)).astype(
                np.float32
            )
            words = [
                "the", label, "animal", "is",
                str(_SIZES[rng.integers(len(_SIZES))]),
                "and",
                str(_COLORS[rng.integers(len(_COLORS))]),
                str(_POSES[rng.integers(len(_POSES))]),
                "on", "the", _BACKGROUNDS[blob], "ground",
            ]
            for filler in _FILLERS:
                if rng.random() < 0.15:
                    words.append(filler)
            records.append(
                CaptionRecord(
                    index=row,
                    sample_id=f"{label.replace(' ', '-')}-{i}",
                    label=label,
                    caption=" ".join(words),
                )
            )
    shape = (2, 2, dim // 4) if dim % 4 == 0 else (dim,)
    return LatentMatrix(data=data, tensor_shape=shape), records


@pytest.fixture(scope="session")
def synthetic_dataset() -> tuple[LatentMatrix, list[CaptionRecord]]:
    return make_synthetic_dataset()


@pytest.fixture()
def dataset_files(tmp_path, synthetic_dataset):
    from vlcp import write_captions, write_latents

    latents, captions = synthetic_dataset
    latents_path = tmp_path / "latents.vlpd"
    captions_path = tmp_path / "captions.jsonl"
    write_latents(latents, latents_path)
    write_captions(captions, captions_path)
    return latents_path, captions_path
