"""Codecs for the interchange wire formats the bridge reads and writes.

The bridge talks to the distillation tool purely through its documented
file formats (VLPD latents, captions JSONL, manifest JSON); these are
small standalone implementations of those formats, kept intentionally
free of any import of the distillation package itself.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

LATENT_MAGIC = b"VLPD"
LATENT_FORMAT_VERSION = 1
MANIFEST_FORMAT_VERSION = 1


class BridgeFormatError(ValueError):
    """Malformed interchange data on the bridge side."""


def write_latents(data: np.ndarray, tensor_shape: Sequence[int], path: str | Path) -> None:
    """Write (n, dim) float32 rows in the VLPD layout."""
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 2:
        raise BridgeFormatError(f"latent data must be 2-D, got {arr.ndim}-D")
    shape = tuple(int(s) for s in tensor_shape)
    if math.prod(shape) != arr.shape[1]:
        raise BridgeFormatError(f"tensor shape {shape} does not flatten to dim {arr.shape[1]}")
    if not np.isfinite(arr).all():
        raise BridgeFormatError("latent data contains non-finite values")
    header = struct.pack("<4sIIII", LATENT_MAGIC, LATENT_FORMAT_VERSION, arr.shape[0], arr.shape[1], len(shape))
    dims = struct.pack(f"<{len(shape)}I", *shape) if shape else b""
    Path(path).write_bytes(header + dims + arr.tobytes())


def read_latents(path: str | Path) -> tuple[np.ndarray, tuple[int, ...]]:
    """Read a VLPD file back as (rows, tensor_shape)."""
    blob = Path(path).read_bytes()
    if len(blob) < 20:
        raise BridgeFormatError(f"{path}: truncated header")
    magic, version, n, dim, rank = struct.unpack_from("<4sIIII", blob, 0)
    if magic != LATENT_MAGIC or version != LATENT_FORMAT_VERSION:
        raise BridgeFormatError(f"{path}: not a VLPD v{LATENT_FORMAT_VERSION} file")
    offset = 20 + 4 * rank
    shape = struct.unpack_from(f"<{rank}I", blob, 20) if rank else ()
    if len(blob) != offset + 4 * n * dim:
        raise BridgeFormatError(f"{path}: payload size mismatch")
    rows = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=offset).reshape(n, dim).copy()
    return rows, tuple(int(s) for s in shape)


def write_captions(records: Sequence[dict], path: str | Path) -> None:
    """Write caption records ({index, sample_id, label, caption}) as JSONL."""
    lines = []
    for rec in records:
        if set(rec) != {"index", "sample_id", "label", "caption"}:
            raise BridgeFormatError(f"caption record has wrong fields: {sorted(rec)}")
        lines.append(json.dumps(rec, sort_keys=True, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass
class ManifestPair:
    class_label: str
    cluster_id: int
    vector: np.ndarray  # (dim,) float32
    tensor_shape: tuple[int, ...]
    text_prototype: str
    noise_strength: float
    seed: int


def read_manifest(path: str | Path) -> list[ManifestPair]:
    """Parse a synthesis manifest, resolving externalized vectors."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format_version") != MANIFEST_FORMAT_VERSION:
        raise BridgeFormatError(f"{path}: unsupported manifest format_version")
    external_cache: dict[str, np.ndarray] = {}
    pairs = []
    for entry in doc["pairs"]:
        proto = entry["image_prototype"]
        shape = tuple(int(s) for s in proto["shape"])
        if "data" in proto:
            vector = np.asarray(proto["data"], dtype=np.float32)
        else:
            ref = proto["external"]
            ext = str(path.parent / ref["path"])
            if ext not in external_cache:
                external_cache[ext], _ = read_latents(ext)
            vector = external_cache[ext][int(ref["row"])].copy()
        if vector.shape[0] != math.prod(shape):
            raise BridgeFormatError(f"{path}: vector length {vector.shape[0]} != shape {shape}")
        pairs.append(
            ManifestPair(
                class_label=str(entry["class_label"]),
                cluster_id=int(entry["cluster_id"]),
                vector=vector,
                tensor_shape=shape,
                text_prototype=str(entry["text_prototype"]),
                noise_strength=float(entry["noise_strength"]),
                seed=int(entry["seed"]),
            )
        )
    return pairs
