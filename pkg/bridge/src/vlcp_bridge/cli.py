"""CLI for the model bridge: export, synth, finetune."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backends import (
    DEFAULT_CAPTIONER,
    DEFAULT_DIFFUSION,
    DEFAULT_ENCODER,
    DEFAULT_LATENT_SHAPE,
    ModelUnavailableError,
)
from .export import DEFAULT_PROMPT_TEMPLATE, ExportJob, export_latents_and_captions
from .finetune import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    FinetuneConfig,
    dry_run_summary,
    finetune_diffusion,
)
from .formats import BridgeFormatError, read_latents
from .synthesize import load_checkpoint, synthesize_from_manifest


def _parse_shape(raw: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(part) for part in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse latent shape {raw!r}")
    if not shape or any(s < 1 for s in shape):
        raise argparse.ArgumentTypeError(f"latent shape must be positive ints, got {raw!r}")
    return shape


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcp-bridge",
        description="Model-boundary bridge: export latents/captions, synthesize from manifests, fine-tune.",
    )
    sub = parser.add_subparsers(dest="command")

    p_export = sub.add_parser("export", help="Encode + caption an image folder into interchange files.")
    p_export.add_argument("--images", required=True, help="Image root with one subdirectory per class.")
    p_export.add_argument("--latents", required=True, help="Output VLPD path.")
    p_export.add_argument("--captions", required=True, help="Output captions JSONL path.")
    p_export.add_argument("--labels", help="Optional JSON file mapping subdirectory name -> class label.")
    p_export.add_argument("--encoder", default=DEFAULT_ENCODER, help="Encoder id (default toy-avgpool; sd-vae:<repo> for a real VAE).")
    p_export.add_argument("--captioner", default=DEFAULT_CAPTIONER, help="Captioner id (default toy-template; llava:<repo> for LLaVA).")
    p_export.add_argument("--latent-shape", type=_parse_shape, default=DEFAULT_LATENT_SHAPE, help="Latent tensor shape, e.g. 4,32,32.")
    p_export.add_argument("--prompt-template", default=DEFAULT_PROMPT_TEMPLATE, help="Caption prompt; {$CLASSNAME} is substituted per class.")

    p_synth = sub.add_parser("synth", help="Render one image per manifest pair.")
    p_synth.add_argument("--manifest", required=True, help="Synthesis manifest JSON path.")
    p_synth.add_argument("--output-dir", required=True, help="Directory for the PNG outputs.")
    p_synth.add_argument("--backend", default=DEFAULT_DIFFUSION, help="Diffusion backend id (default toy-decoder; sd:<repo> for Stable Diffusion).")
    p_synth.add_argument("--resolution", type=int, default=256, help="Output resolution (default 256).")
    p_synth.add_argument("--latent-shape", type=_parse_shape, default=DEFAULT_LATENT_SHAPE, help="Latent shape the backend expects.")
    p_synth.add_argument("--checkpoint", help="Optional fine-tuned checkpoint (.npz) to apply.")

    p_ft = sub.add_parser("finetune", help="Fine-tune the generative backend on exported latents.")
    p_ft.add_argument("--latents", required=True, help="Training latents (VLPD).")
    p_ft.add_argument("--output", required=True, help="Checkpoint output path (.npz).")
    p_ft.add_argument("--backend", default="toy", help="Fine-tune backend id (default toy; sd:<repo> for Stable Diffusion).")
    p_ft.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help="Training epochs (default 8).")
    p_ft.add_argument("--batch", type=int, default=DEFAULT_BATCH_SIZE, help="Batch size (default 8).")
    p_ft.add_argument("--seed", type=int, default=0, help="Sampling seed (default 0).")
    p_ft.add_argument("--resume", help="Resume from an existing checkpoint (.npz).")
    p_ft.add_argument("--dry-run", action="store_true", help="Echo the training plan without training.")
    return parser


def cmd_export(args: argparse.Namespace) -> int:
    labels = {}
    if args.labels:
        labels = json.loads(Path(args.labels).read_text(encoding="utf-8"))
    job = ExportJob(
        image_dir=Path(args.images),
        latents_path=Path(args.latents),
        captions_path=Path(args.captions),
        labels=labels,
        prompt_template=args.prompt_template,
        encoder=args.encoder,
        captioner=args.captioner,
        latent_shape=args.latent_shape,
    )
    report = export_latents_and_captions(job)
    print(f"exported {report.n_exported} samples ({report.n_skipped} skipped) "
          f"across {len(report.classes)} classes")
    print(f"  latents:  {args.latents}")
    print(f"  captions: {args.captions}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.checkpoint) if args.checkpoint else None
    report = synthesize_from_manifest(
        args.manifest,
        args.output_dir,
        backend=args.backend,
        resolution=args.resolution,
        model_latent_shape=args.latent_shape,
        checkpoint=checkpoint,
    )
    print(f"synthesized {len(report.outputs)} images -> {args.output_dir}")
    for path in report.outputs:
        print(f"  {path.name}")
    return 0


def cmd_finetune(args: argparse.Namespace) -> int:
    config = FinetuneConfig(
        latents_path=Path(args.latents),
        checkpoint_path=Path(args.output),
        backend=args.backend,
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
        resume_from=Path(args.resume) if args.resume else None,
    )
    if args.dry_run:
        data, _ = read_latents(config.latents_path)
        summary = dry_run_summary(config, data.shape[0])
        print("fine-tune dry run (no training performed)")
        for key in ("backend", "batch_size", "epochs", "n_samples", "steps", "noise_strength", "seed"):
            print(f"  {key}: {summary[key]}")
        return 0
    result = finetune_diffusion(config)
    print(f"fine-tuned {result.steps_run} steps (now at step {result.final_step})")
    print(f"  loss: {result.losses[0]:.6f} -> {result.losses[-1]:.6f}")
    print(f"  checkpoint: {result.checkpoint_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "export":
            return cmd_export(args)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_finetune(args)
    except (BridgeFormatError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
