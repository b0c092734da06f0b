"""Vision-language category prototypes: distill (latent, caption) datasets
into per-class image prototypes, text prototypes, and a deterministic
synthesis manifest for conditional generative backends."""

__version__ = "0.1.0"

from .clustering import (
    ClusterResult,
    ImagePrototype,
    KMeansParams,
    image_prototypes,
    kmeans_fit,
    kmeans_pp_init,
)
from .interchange import (
    CaptionRecord,
    ClassDataset,
    InterchangeError,
    LatentMatrix,
    join_classes,
    read_captions,
    read_latents,
    write_captions,
    write_latents,
)
from .outliers import LofParams, LofReport, filter_outliers, lof_scores, pairwise_sq_distances
from .pipeline import (
    DEFAULT_PROMPT_TEMPLATE,
    ClassDistillError,
    DistillConfig,
    PrototypePair,
    SynthesisManifest,
    build_manifest,
    distill_class,
    distill_dataset,
    manifest_to_bytes,
    read_manifest,
    stub_synthesize,
    write_manifest,
)
from .rng import SplitMix64, derive_seed
from .stopwords import STOP_WORDS
from .textproto import (
    NonrepresentativeSet,
    RepresentativeWords,
    TextPrototype,
    Vocabulary,
    class_vocabulary,
    cluster_representative_words,
    nonrepresentative_words,
    remove_stop_words,
    score_caption,
    select_text_prototype,
    tokenize,
)

__all__ = [
    "CaptionRecord",
    "ClassDataset",
    "ClassDistillError",
    "ClusterResult",
    "DEFAULT_PROMPT_TEMPLATE",
    "DistillConfig",
    "ImagePrototype",
    "InterchangeError",
    "KMeansParams",
    "LatentMatrix",
    "LofParams",
    "LofReport",
    "NonrepresentativeSet",
    "PrototypePair",
    "RepresentativeWords",
    "STOP_WORDS",
    "SplitMix64",
    "SynthesisManifest",
    "TextPrototype",
    "Vocabulary",
    "build_manifest",
    "class_vocabulary",
    "cluster_representative_words",
    "derive_seed",
    "distill_class",
    "distill_dataset",
    "filter_outliers",
    "image_prototypes",
    "join_classes",
    "kmeans_fit",
    "kmeans_pp_init",
    "lof_scores",
    "manifest_to_bytes",
    "nonrepresentative_words",
    "pairwise_sq_distances",
    "read_captions",
    "read_latents",
    "read_manifest",
    "remove_stop_words",
    "score_caption",
    "select_text_prototype",
    "stub_synthesize",
    "tokenize",
    "write_captions",
    "write_latents",
    "write_manifest",
]
