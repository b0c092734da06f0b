"""Per-class distillation and the synthesis manifest.

Each class is filtered (LOF), clustered (K-means, C = images per class),
and summarized (one text prototype per cluster); the resulting
(image prototype, text prototype, noise, seed) pairs are serialized into
a canonical JSON manifest that any conditional generative backend can
consume. Manifest bytes are a pure function of inputs and config: classes
are ordered lexicographically, clusters by id, keys sorted, floats
rendered as their shortest round-trip decimal.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import ClusterResult, KMeansParams, kmeans_fit
from .interchange import (
    CaptionRecord,
    ClassDataset,
    InterchangeError,
    LatentMatrix,
    join_classes,
    read_latents,
    write_latents,
)
from .outliers import LofParams, LofReport, filter_outliers
from .rng import derive_seed
from .textproto import (
    NonrepresentativeSet,
    TextPrototype,
    class_vocabulary,
    cluster_representative_words,
    nonrepresentative_words,
    select_text_prototype,
)

MANIFEST_FORMAT_VERSION = 1

DEFAULT_PROMPT_TEMPLATE = (
    "Describe the physical appearance of the {$CLASSNAME} in the image. "
    "Include details about its shape, posture, color, and any distinct features."
)

DEFAULT_NOISE_STRENGTH = 0.7


class ClassDistillError(RuntimeError):
    """A class could not be distilled (usually: too few samples)."""

    def __init__(self, label: str, message: str) -> None:
        super().__init__(f"class {label!r}: {message}")
        self.label = label


@dataclass(frozen=True)
class DistillConfig:
    ipc: int
    lof: LofParams = LofParams()
    beta: float = 0.2
    top_k: int = 35
    master_seed: int = 0
    noise_strength: float = DEFAULT_NOISE_STRENGTH
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    kmeans_restarts: int = 1

    def __post_init__(self) -> None:
        if self.ipc < 1:
            raise ValueError(f"ipc must be >= 1, got {self.ipc}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if not 0.0 <= self.noise_strength <= 1.0:
            raise ValueError(f"noise_strength must be in [0, 1], got {self.noise_strength}")

    def to_echo_dict(self) -> dict:
        return {
            "ipc": self.ipc,
            "lof": {"n_neighbors": self.lof.n_neighbors, "contamination": self.lof.contamination},
            "kmeans": {
                "max_iter": self.kmeans_max_iter,
                "tol": self.kmeans_tol,
                "n_restarts": self.kmeans_restarts,
            },
            "beta": self.beta,
            "top_k": self.top_k,
            "master_seed": self.master_seed,
            "noise_strength": self.noise_strength,
            "prompt_template": self.prompt_template,
        }

    @staticmethod
    def from_echo_dict(echo: Mapping) -> "DistillConfig":
        return DistillConfig(
            ipc=int(echo["ipc"]),
            lof=LofParams(
                n_neighbors=int(echo["lof"]["n_neighbors"]),
                contamination=float(echo["lof"]["contamination"]),
            ),
            beta=float(echo["beta"]),
            top_k=int(echo["top_k"]),
            master_seed=int(echo["master_seed"]),
            noise_strength=float(echo["noise_strength"]),
            prompt_template=str(echo["prompt_template"]),
            kmeans_max_iter=int(echo["kmeans"]["max_iter"]),
            kmeans_tol=float(echo["kmeans"]["tol"]),
            kmeans_restarts=int(echo["kmeans"]["n_restarts"]),
        )


@dataclass
class PrototypePair:
    """One manifest entry: image prototype + text prototype + sampling knobs."""

    class_label: str
    cluster_id: int
    image_vector: np.ndarray  # (dim,) float32
    tensor_shape: tuple[int, ...]
    text_prototype: str
    noise_strength: float
    seed: int
    # Evidence for tests and debug dumps; not serialized into the manifest.
    text_score: int = 0
    member_count: int = 0


@dataclass
class ClassDistillResult:
    """Everything distill produced for one class, for dumps and tests."""

    label: str
    pairs: list[PrototypePair]
    lof: LofReport
    clusters: ClusterResult
    kept_rows: list[int]  # global latent row indices, ascending
    nonrepresentative: NonrepresentativeSet
    text: list[TextPrototype]
    cluster_members: list[list[int]]  # global latent rows per cluster


@dataclass
class SynthesisManifest:
    pairs: list[PrototypePair]
    config: dict
    format_version: int = MANIFEST_FORMAT_VERSION
    warnings: list[str] = field(default_factory=list)


def pair_seed(master_seed: int, class_label: str, cluster_id: int) -> int:
    return derive_seed(master_seed, "pair", class_label, cluster_id)


def class_seed(master_seed: int, class_label: str) -> int:
    return derive_seed(master_seed, "class", class_label)


def distill_class_detailed(
    class_data: ClassDataset,
    latents: LatentMatrix,
    config: DistillConfig,
) -> ClassDistillResult:
    """Filter -> cluster -> text prototypes for one class."""
    label = class_data.label
    indices = np.asarray(class_data.row_indices(), dtype=np.int64)
    captions = class_data.captions()
    points = latents.data[indices]

    report = filter_outliers(points, config.lof)
    kept_local = report.kept
    if len(kept_local) < config.ipc:
        raise ClassDistillError(
            label,
            f"only {len(kept_local)} samples remain after removing "
            f"{len(report.removed)} of {class_data.size} "
            f"(contamination={config.lof.contamination}), but ipc={config.ipc}",
        )
    kept_rows = [int(indices[i]) for i in kept_local]
    kept_points = points[kept_local]
    kept_captions = [captions[i] for i in kept_local]

    clusters = kmeans_fit(
        kept_points,
        KMeansParams(
            n_clusters=config.ipc,
            seed=class_seed(config.master_seed, label),
            max_iter=config.kmeans_max_iter,
            tol=config.kmeans_tol,
            n_restarts=config.kmeans_restarts,
        ),
    )

    vocab = class_vocabulary(kept_captions)
    nonrep = nonrepresentative_words(vocab, config.beta)

    pairs: list[PrototypePair] = []
    prototypes: list[TextPrototype] = []
    members_per_cluster: list[list[int]] = []
    for cid in range(config.ipc):
        member_local = np.nonzero(clusters.assignments == cid)[0]
        members_per_cluster.append([kept_rows[i] for i in member_local])
        cluster_captions = [kept_captions[i] for i in member_local]
        representative = cluster_representative_words(cluster_captions, nonrep, config.top_k)
        prototype = select_text_prototype(cluster_captions, representative, cid)
        prototypes.append(prototype)
        pairs.append(
            PrototypePair(
                class_label=label,
                cluster_id=cid,
                image_vector=clusters.centers[cid].copy(),
                tensor_shape=latents.tensor_shape,
                text_prototype=prototype.text,
                noise_strength=config.noise_strength,
                seed=pair_seed(config.master_seed, label, cid),
                text_score=prototype.score,
                member_count=int(member_local.size),
            )
        )
    return ClassDistillResult(
        label=label,
        pairs=pairs,
        lof=report,
        clusters=clusters,
        kept_rows=kept_rows,
        nonrepresentative=nonrep,
        text=prototypes,
        cluster_members=members_per_cluster,
    )


def distill_class(
    class_data: ClassDataset,
    latents: LatentMatrix,
    config: DistillConfig,
) -> list[PrototypePair]:
    return distill_class_detailed(class_data, latents, config).pairs


def distill_dataset(
    latents: LatentMatrix,
    captions: Sequence[CaptionRecord],
    config: DistillConfig,
    workers: int = 1,
    skip_failed: bool = False,
) -> tuple[SynthesisManifest, list[ClassDistillResult], list[ClassDistillError]]:
    """Distill every class and assemble the manifest.

    Classes are processed independently (optionally in a thread pool) and
    reassembled in label order, so the manifest does not depend on worker
    count or scheduling. Without ``skip_failed`` the first failing class
    aborts the run; with it, failures become a warnings block.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    classes = join_classes(latents, captions)

    def run(cd: ClassDataset) -> ClassDistillResult | ClassDistillError:
        try:
            return distill_class_detailed(cd, latents, config)
        except ClassDistillError as exc:
            return exc

    if workers == 1:
        outcomes = [run(cd) for cd in classes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, classes))

    results: list[ClassDistillResult] = []
    failures: list[ClassDistillError] = []
    for outcome in outcomes:
        if isinstance(outcome, ClassDistillError):
            if not skip_failed:
                raise outcome
            failures.append(outcome)
        else:
            results.append(outcome)
    manifest = build_manifest({r.label: r.pairs for r in results}, config)
    manifest.warnings = [str(f) for f in failures]
    return manifest, results, failures


def build_manifest(
    per_class_pairs: Mapping[str, Sequence[PrototypePair]] | Iterable[Sequence[PrototypePair]],
    config: DistillConfig,
) -> SynthesisManifest:
    """Order pairs (label asc, cluster id asc) and reject duplicates."""
    if isinstance(per_class_pairs, Mapping):
        groups = [per_class_pairs[label] for label in sorted(per_class_pairs)]
    else:
        groups = list(per_class_pairs)
    flat: list[PrototypePair] = [p for group in groups for p in group]
    seen: set[tuple[str, int]] = set()
    for pair in flat:
        key = (pair.class_label, pair.cluster_id)
        if key in seen:
            raise ValueError(f"duplicate (class, cluster) pair: {key}")
        seen.add(key)
    flat.sort(key=lambda p: (p.class_label, p.cluster_id))
    return SynthesisManifest(pairs=flat, config=config.to_echo_dict())


def _pair_json(pair: PrototypePair, external: tuple[str, int] | None) -> dict:
    if external is None:
        proto = {
            "shape": list(pair.tensor_shape),
            "data": [float(v) for v in pair.image_vector],
        }
    else:
        proto = {
            "shape": list(pair.tensor_shape),
            "external": {"path": external[0], "row": external[1]},
        }
    return {
        "class_label": pair.class_label,
        "cluster_id": pair.cluster_id,
        "image_prototype": proto,
        "text_prototype": pair.text_prototype,
        "noise_strength": pair.noise_strength,
        "seed": pair.seed,
    }


def manifest_to_bytes(manifest: SynthesisManifest, external_path: str | None = None) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, compact separators, one trailing LF."""
    doc: dict = {
        "format_version": manifest.format_version,
        "config": manifest.config,
        "pairs": [
            _pair_json(pair, (external_path, i) if external_path is not None else None)
            for i, pair in enumerate(manifest.pairs)
        ],
    }
    if manifest.warnings:
        doc["warnings"] = list(manifest.warnings)
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


def write_manifest(
    manifest: SynthesisManifest,
    path: str | Path,
    externalize_prototypes: bool = False,
) -> None:
    """Write the manifest; optionally externalize vectors to a sibling VLPD.

    Externalized vectors go to ``<path>.vlpd`` (one row per pair, in pair
    order) and each pair's ``image_prototype`` carries ``{shape, external:
    {path, row}}`` instead of inline data.
    """
    path = Path(path)
    external_name: str | None = None
    if externalize_prototypes:
        if not manifest.pairs:
            raise ValueError("cannot externalize an empty manifest")
        shapes = {pair.tensor_shape for pair in manifest.pairs}
        if len(shapes) != 1:
            raise ValueError(f"externalization needs a single tensor shape, got {sorted(shapes)}")
        external = path.with_name(path.name + ".vlpd")
        vectors = np.stack([pair.image_vector for pair in manifest.pairs]).astype(np.float32)
        write_latents(LatentMatrix(data=vectors, tensor_shape=next(iter(shapes))), external)
        external_name = external.name
    path.write_bytes(manifest_to_bytes(manifest, external_name))


def read_manifest(path: str | Path) -> SynthesisManifest:
    """Parse a manifest back, resolving externalized prototype vectors."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InterchangeError(f"{path}: malformed manifest JSON ({exc.msg})") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != MANIFEST_FORMAT_VERSION:
        raise InterchangeError(f"{path}: not a version-{MANIFEST_FORMAT_VERSION} manifest")
    config = doc["config"]
    external_cache: dict[str, LatentMatrix] = {}
    pairs: list[PrototypePair] = []
    for entry in doc["pairs"]:
        proto = entry["image_prototype"]
        shape = tuple(int(s) for s in proto["shape"])
        if "data" in proto:
            vector = np.asarray(proto["data"], dtype=np.float32)
        else:
            ref = proto["external"]
            ext_path = str(path.parent / ref["path"])
            if ext_path not in external_cache:
                external_cache[ext_path] = read_latents(ext_path)
            vector = external_cache[ext_path].data[int(ref["row"])].copy()
        if vector.shape[0] != math.prod(shape):
            raise InterchangeError(
                f"{path}: prototype vector length {vector.shape[0]} does not match shape {shape}"
            )
        pairs.append(
            PrototypePair(
                class_label=str(entry["class_label"]),
                cluster_id=int(entry["cluster_id"]),
                image_vector=vector,
                tensor_shape=shape,
                text_prototype=str(entry["text_prototype"]),
                noise_strength=float(entry["noise_strength"]),
                seed=int(entry["seed"]),
            )
        )
    return SynthesisManifest(
        pairs=pairs,
        config=config,
        format_version=int(doc["format_version"]),
        warnings=list(doc.get("warnings", [])),
    )


def stub_synthesize(
    manifest: SynthesisManifest,
    latents: LatentMatrix,
    captions: Sequence[CaptionRecord],
) -> list[tuple[PrototypePair, int]]:
    """Reference backend stand-in: nearest kept real sample per pair.

    For each pair, returns the global latent row (among the pair's class
    rows that survive the manifest's outlier filtering) closest to the
    image prototype in Euclidean distance, ties toward the lower row
    index. Useful for smoke-testing manifests without any generative
    model.
    """
    config = DistillConfig.from_echo_dict(manifest.config)
    by_label = {cd.label: cd for cd in join_classes(latents, captions)}
    kept_cache: dict[str, np.ndarray] = {}
    out: list[tuple[PrototypePair, int]] = []
    for pair in manifest.pairs:
        cd = by_label.get(pair.class_label)
        if cd is None:
            raise InterchangeError(f"manifest class {pair.class_label!r} not present in dataset")
        if pair.class_label not in kept_cache:
            indices = np.asarray(cd.row_indices(), dtype=np.int64)
            report = filter_outliers(latents.data[indices], config.lof)
            kept_cache[pair.class_label] = indices[report.kept]
        kept = kept_cache[pair.class_label]
        rows = latents.data[kept].astype(np.float64)
        diff = rows - pair.image_vector.astype(np.float64)
        d2 = np.einsum("ij,ij->i", diff, diff)
        out.append((pair, int(kept[int(np.argmin(d2))])))
    return out
