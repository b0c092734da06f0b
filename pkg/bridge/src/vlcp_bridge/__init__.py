"""Model-boundary bridge around the vlcp interchange formats: export
(encode + caption), manifest-driven synthesis, and fine-tuning."""

__version__ = "0.1.0"

from .backends import ModelUnavailableError
from .export import ExportJob, ExportReport, export_latents_and_captions
from .finetune import FinetuneConfig, FinetuneResult, dry_run_summary, finetune_diffusion
from .formats import BridgeFormatError, read_latents, read_manifest, write_captions, write_latents
from .synthesize import SynthesisReport, load_checkpoint, synthesize_from_manifest

__all__ = [
    "BridgeFormatError",
    "ExportJob",
    "ExportReport",
    "FinetuneConfig",
    "FinetuneResult",
    "ModelUnavailableError",
    "SynthesisReport",
    "dry_run_summary",
    "export_latents_and_captions",
    "finetune_diffusion",
    "load_checkpoint",
    "read_latents",
    "read_manifest",
    "synthesize_from_manifest",
    "write_captions",
    "write_latents",
]
