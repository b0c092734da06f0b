"""On-disk formats for latents and captions, plus the per-class join.

The binary latent format (magic ``VLPD``) and the captions JSONL schema
are the wire contract shared with exporters and synthesis backends, so
reading and writing here is strict and byte-deterministic: identical
in-memory values always produce identical files.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

LATENT_MAGIC = b"VLPD"
LATENT_FORMAT_VERSION = 1

_CAPTION_FIELDS = frozenset({"index", "sample_id", "label", "caption"})


class InterchangeError(ValueError):
    """Malformed, truncated, or internally inconsistent input data."""


@dataclass
class LatentMatrix:
    """n_samples x dim float32 latent vectors with their tensor shape.

    ``data`` is row-major float32 and is frozen (read-only) after
    construction; ``tensor_shape`` records the unflattened layout (for
    example ``(4, 32, 32)``) so prototypes can be reshaped downstream.
    """

    data: np.ndarray
    tensor_shape: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise InterchangeError(f"latent data must be 2-D, got {arr.ndim}-D")
        if not self.tensor_shape:
            self.tensor_shape = (arr.shape[1],)
        self.tensor_shape = tuple(int(s) for s in self.tensor_shape)
        if any(s < 1 for s in self.tensor_shape):
            raise InterchangeError(f"tensor shape entries must be positive: {self.tensor_shape}")
        if math.prod(self.tensor_shape) != arr.shape[1]:
            raise InterchangeError(
                f"tensor shape {self.tensor_shape} has product {math.prod(self.tensor_shape)}, "
                f"but dim is {arr.shape[1]}"
            )
        if not np.isfinite(arr).all():
            raise InterchangeError("latent data contains non-finite values")
        arr.setflags(write=False)
        self.data = arr

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatentMatrix):
            return NotImplemented
        return (
            self.tensor_shape == other.tensor_shape
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass(frozen=True)
class CaptionRecord:
    """One caption line: a latent row index, sample id, label, and text."""

    index: int
    sample_id: str
    label: str
    caption: str


@dataclass
class ClassDataset:
    """All samples of one label: (latent row index, caption) pairs."""

    label: str
    rows: list[tuple[int, str]]

    @property
    def size(self) -> int:
        return len(self.rows)

    def row_indices(self) -> list[int]:
        return [idx for idx, _ in self.rows]

    def captions(self) -> list[str]:
        return [cap for _, cap in self.rows]


def write_latents(matrix: LatentMatrix, path: str | Path) -> None:
    """Write ``matrix`` in the VLPD binary format (little-endian, f32)."""
    shape = matrix.tensor_shape
    header = struct.pack(
        "<4sIIII",
        LATENT_MAGIC,
        LATENT_FORMAT_VERSION,
        matrix.n_samples,
        matrix.dim,
        len(shape),
    )
    dims = struct.pack(f"<{len(shape)}I", *shape) if shape else b""
    payload = matrix.data.astype("<f4", copy=False).tobytes()
    Path(path).write_bytes(header + dims + payload)


def read_latents(path: str | Path) -> LatentMatrix:
    """Parse a VLPD file, rejecting anything malformed or inconsistent."""
    blob = Path(path).read_bytes()
    if len(blob) < 20:
        raise InterchangeError(f"{path}: truncated header ({len(blob)} bytes, need 20)")
    magic, version, n_samples, dim, rank = struct.unpack_from("<4sIIII", blob, 0)
    if magic != LATENT_MAGIC:
        raise InterchangeError(f"{path}: bad magic {magic!r}, expected {LATENT_MAGIC!r}")
    if version != LATENT_FORMAT_VERSION:
        raise InterchangeError(f"{path}: unsupported version {version}")
    offset = 20
    if len(blob) < offset + 4 * rank:
        raise InterchangeError(f"{path}: truncated header (shape dims missing)")
    shape = struct.unpack_from(f"<{rank}I", blob, offset) if rank else ()
    offset += 4 * rank
    if math.prod(shape) != dim:
        raise InterchangeError(
            f"{path}: tensor shape {tuple(shape)} does not multiply out to dim {dim}"
        )
    expected = n_samples * dim * 4
    got = len(blob) - offset
    if got < expected:
        raise InterchangeError(f"{path}: truncated payload ({got} bytes, need {expected})")
    if got > expected:
        raise InterchangeError(f"{path}: trailing data ({got - expected} extra bytes)")
    data = np.frombuffer(blob, dtype="<f4", count=n_samples * dim, offset=offset)
    data = data.reshape(n_samples, dim).copy()
    if not np.isfinite(data).all():
        raise InterchangeError(f"{path}: payload contains non-finite values")
    return LatentMatrix(data=data, tensor_shape=tuple(shape))


def _caption_from_obj(obj: object, lineno: int) -> CaptionRecord:
    if not isinstance(obj, dict):
        raise InterchangeError(f"line {lineno}: expected a JSON object")
    missing = _CAPTION_FIELDS - obj.keys()
    if missing:
        raise InterchangeError(f"line {lineno}: missing required field {sorted(missing)[0]!r}")
    extra = obj.keys() - _CAPTION_FIELDS
    if extra:
        raise InterchangeError(f"line {lineno}: unexpected field {sorted(extra)[0]!r}")
    index = obj["index"]
    if isinstance(index, bool) or not isinstance(index, int):
        raise InterchangeError(f"line {lineno}: 'index' must be an integer")
    if index < 0:
        raise InterchangeError(f"line {lineno}: 'index' must be non-negative, got {index}")
    for key in ("sample_id", "label", "caption"):
        if not isinstance(obj[key], str):
            raise InterchangeError(f"line {lineno}: {key!r} must be a string")
    if not obj["caption"].strip():
        raise InterchangeError(f"line {lineno}: caption is empty")
    return CaptionRecord(index=index, sample_id=obj["sample_id"], label=obj["label"], caption=obj["caption"])


def read_captions(path: str | Path) -> list[CaptionRecord]:
    """Parse a captions JSONL file in file order.

    Every line must be a JSON object with exactly the fields
    ``{index, sample_id, label, caption}``; duplicate sample ids are
    rejected.
    """
    records: list[CaptionRecord] = []
    seen_ids: set[str] = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise InterchangeError(f"line {lineno}: blank line")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InterchangeError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        record = _caption_from_obj(obj, lineno)
        if record.sample_id in seen_ids:
            raise InterchangeError(f"line {lineno}: duplicate sample_id {record.sample_id!r}")
        seen_ids.add(record.sample_id)
        records.append(record)
    return records


def write_captions(records: Sequence[CaptionRecord], path: str | Path) -> None:
    """Write caption records as JSONL, one record per line, keys sorted."""
    lines = []
    for rec in records:
        lines.append(
            json.dumps(
                {"index": rec.index, "sample_id": rec.sample_id, "label": rec.label, "caption": rec.caption},
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def join_classes(matrix: LatentMatrix, captions: Sequence[CaptionRecord]) -> list[ClassDataset]:
    """Group captions by label into per-class datasets.

    Classes come back sorted by label; rows within a class are in
    ascending latent-row order. Every caption row lands in exactly one
    class, and a latent row may be referenced by at most one caption.
    """
    seen_rows: set[int] = set()
    by_label: dict[str, list[tuple[int, str]]] = {}
    for rec in captions:
        if rec.index >= matrix.n_samples:
            raise InterchangeError(
                f"caption index {rec.index} out of range [0, {matrix.n_samples}) "
                f"(sample_id {rec.sample_id!r})"
            )
        if rec.index in seen_rows:
            raise InterchangeError(f"latent row {rec.index} referenced twice")
        seen_rows.add(rec.index)
        by_label.setdefault(rec.label, []).append((rec.index, rec.caption))
    return [
        ClassDataset(label=label, rows=sorted(by_label[label]))
        for label in sorted(by_label)
    ]
