"""Command-line front end: validate, distill, sweep.

Exit codes: 0 success, 1 runtime/class failure, 2 input or flag
validation failure. Outputs are a pure function of flags and input
files; there is no clock or environment dependence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .interchange import InterchangeError, read_captions, read_latents
from .outliers import LofParams
from .pipeline import (
    DEFAULT_NOISE_STRENGTH,
    DEFAULT_PROMPT_TEMPLATE,
    ClassDistillError,
    DistillConfig,
    distill_dataset,
    write_manifest,
)

_DEFAULTS = {
    "ipc": None,  # required
    "alpha": 0.05,
    "beta": 0.2,
    "top_k": 35,
    "neighbors": 10,
    "seed": 0,
    "noise_strength": DEFAULT_NOISE_STRENGTH,
    "workers": 1,
    "skip_failed": False,
    "max_iter": 300,
    "tol": 1e-6,
    "restarts": 1,
    "prompt_template": DEFAULT_PROMPT_TEMPLATE,
}

_CONFIG_TYPES = {
    "ipc": int, "top_k": int, "neighbors": int, "seed": int, "workers": int,
    "max_iter": int, "restarts": int,
    "alpha": float, "beta": float, "noise_strength": float, "tol": float,
    "skip_failed": bool, "prompt_template": str,
}


def _add_io_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--latents", required=True, help="Path to the VLPD latent file.")
    parser.add_argument("--captions", required=True, help="Path to the captions JSONL file.")


def _add_distill_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file supplying any flag; explicit flags override it.")
    parser.add_argument("--ipc", type=int, help="Prototype pairs per class (cluster count).")
    parser.add_argument("--alpha", type=float, help="LOF contamination in [0, 0.5] (default 0.05).")
    parser.add_argument("--beta", type=float, help="Nonrepresentative-word threshold in (0, 1] (default 0.2).")
    parser.add_argument("--top-k", type=int, dest="top_k", help="Representative words per cluster (default 35).")
    parser.add_argument("--neighbors", type=int, help="LOF n_neighbors (default 10).")
    parser.add_argument("--seed", type=int, help="Master seed for clustering and pair seeds (default 0).")
    parser.add_argument(
        "--noise-strength", type=float, dest="noise_strength",
        help="Diffusion noise strength recorded per pair, in [0, 1] (default 0.7).",
    )
    parser.add_argument("--workers", type=int, help="Thread-pool width over classes (default 1).")
    parser.add_argument(
        "--skip-failed", action="store_const", const=True, dest="skip_failed",
        help="Emit a partial manifest when classes fail.",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcp",
        description="Distill (latent, caption) datasets into category prototypes and a synthesis manifest.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    p_validate = sub.add_parser("validate", help="Validate latent/caption inputs and report class sizes.")
    _add_io_flags(p_validate)

    p_distill = sub.add_parser("distill", help="Run the full distillation and write a manifest.")
    _add_io_flags(p_distill)
    p_distill.add_argument("--output", required=True, help="Manifest output path (JSON).")
    _add_distill_flags(p_distill)
    p_distill.add_argument(
        "--externalize-prototypes", action="store_true",
        help="Store prototype vectors in a sibling <output>.vlpd file instead of inline JSON.",
    )
    p_distill.add_argument("--dump-clusters", help="Write per-class cluster debug JSON to this path.")
    p_distill.add_argument("--dump-text", help="Write per-cluster keyword/prototype debug JSON to this path.")
    p_distill.add_argument("--dump-outliers", help="Write per-class LOF debug JSON to this path.")

    p_sweep = sub.add_parser("sweep", help="Grid-sweep alpha/beta/k and write summary statistics CSV.")
    _add_io_flags(p_sweep)
    p_sweep.add_argument("--output", required=True, help="CSV output path.")
    _add_distill_flags(p_sweep)
    p_sweep.add_argument("--alpha-grid", help="Comma-separated contamination values (default: --alpha).")
    p_sweep.add_argument("--beta-grid", help="Comma-separated beta values (default: --beta).")
    p_sweep.add_argument("--k-grid", help="Comma-separated top-k values (default: --top-k).")
    return parser


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset flags from --config JSON, then from the hard defaults."""
    if getattr(args, "config", None):
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file {args.config}: {exc}")
        if not isinstance(overrides, dict):
            parser.error(f"config file {args.config} must hold a JSON object")
        for key, value in overrides.items():
            if key not in _DEFAULTS:
                parser.error(f"config file {args.config}: unknown key {key!r}")
            expected = _CONFIG_TYPES[key]
            if expected is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
                parser.error(
                    f"config file {args.config}: key {key!r} must be {expected.__name__}, "
                    f"got {type(value).__name__}"
                )
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    for key, value in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _validate_ranges(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if args.ipc is None:
        parser.error("--ipc is required (flag or config file)")
    if args.ipc < 1:
        parser.error(f"--ipc must be >= 1, got {args.ipc}")
    if not 0.0 <= args.alpha <= 0.5:
        parser.error(f"--alpha must be in [0, 0.5], got {args.alpha}")
    if not 0.0 < args.beta <= 1.0:
        parser.error(f"--beta must be in (0, 1], got {args.beta}")
    if args.top_k < 1:
        parser.error(f"--top-k must be >= 1, got {args.top_k}")
    if args.neighbors < 1:
        parser.error(f"--neighbors must be >= 1, got {args.neighbors}")
    if not 0.0 <= args.noise_strength <= 1.0:
        parser.error(f"--noise-strength must be in [0, 1], got {args.noise_strength}")
    if args.workers < 1:
        parser.error(f"--workers must be >= 1, got {args.workers}")


def _config_from_args(args: argparse.Namespace, **overrides) -> DistillConfig:
    values = {
        "ipc": args.ipc,
        "lof": LofParams(n_neighbors=args.neighbors, contamination=args.alpha),
        "beta": args.beta,
        "top_k": args.top_k,
        "master_seed": args.seed,
        "noise_strength": args.noise_strength,
        "prompt_template": args.prompt_template,
        "kmeans_max_iter": args.max_iter,
        "kmeans_tol": args.tol,
        "kmeans_restarts": args.restarts,
    }
    values.update(overrides)
    return DistillConfig(**values)


def _load_dataset(args: argparse.Namespace):
    latents = read_latents(args.latents)
    captions = read_captions(args.captions)
    for position, record in enumerate(captions, start=1):
        if record.index >= latents.n_samples:
            raise InterchangeError(
                f"{args.captions}: line {position}: caption index {record.index} "
                f"out of range [0, {latents.n_samples})"
            )
    return latents, captions


def cmd_validate(args: argparse.Namespace) -> int:
    from .interchange import join_classes

    latents, captions = _load_dataset(args)
    classes = join_classes(latents, captions)
    print(f"latents: n_samples={latents.n_samples} dim={latents.dim} tensor_shape={list(latents.tensor_shape)}")
    print(f"captions: {len(captions)} records, {len(classes)} classes")
    for cd in classes:
        print(f"  {cd.label}: {cd.size}")
    print("OK")
    return 0


def _write_dumps(args: argparse.Namespace, results) -> None:
    def dump(path: str, payload: dict) -> None:
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    if args.dump_clusters:
        dump(args.dump_clusters, {
            r.label: {
                "assignments": [int(a) for a in r.clusters.assignments],
                "inertia": r.clusters.inertia,
                "iterations_run": r.clusters.iterations_run,
            }
            for r in results
        })
    if args.dump_text:
        dump(args.dump_text, {
            r.label: [
                {
                    "cluster_id": tp.cluster_id,
                    "size": r.pairs[tp.cluster_id].member_count,
                    "nonrepresentative": sorted(r.nonrepresentative.words),
                    "feature_keywords": [[w, f] for w, f in tp.representative_words.entries],
                    "text_prototype": tp.text,
                }
                for tp in r.text
            ]
            for r in results
        })
    if args.dump_outliers:
        dump(args.dump_outliers, {r.label: r.lof.to_debug_dict() for r in results})


def cmd_distill(args: argparse.Namespace) -> int:
    latents, captions = _load_dataset(args)
    config = _config_from_args(args)
    manifest, results, failures = distill_dataset(
        latents, captions, config, workers=args.workers, skip_failed=args.skip_failed
    )
    write_manifest(manifest, args.output, externalize_prototypes=args.externalize_prototypes)
    _write_dumps(args, results)
    print(f"distilled {len(results)} classes into {len(manifest.pairs)} pairs -> {args.output}")
    for failure in failures:
        print(f"warning: skipped {failure}", file=sys.stderr)
    return 0


def _parse_grid(raw: str | None, fallback, cast, parser: argparse.ArgumentParser, flag: str) -> list:
    if raw is None:
        return [fallback]
    try:
        values = [cast(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        parser.error(f"{flag}: cannot parse {raw!r}")
    if not values:
        parser.error(f"{flag}: empty grid")
    return values


def cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    alphas = _parse_grid(args.alpha_grid, args.alpha, float, parser, "--alpha-grid")
    betas = _parse_grid(args.beta_grid, args.beta, float, parser, "--beta-grid")
    ks = _parse_grid(args.k_grid, args.top_k, int, parser, "--k-grid")
    for alpha in alphas:
        if not 0.0 <= alpha <= 0.5:
            parser.error(f"--alpha-grid value {alpha} outside [0, 0.5]")
    for beta in betas:
        if not 0.0 < beta <= 1.0:
            parser.error(f"--beta-grid value {beta} outside (0, 1]")
    for k in ks:
        if k < 1:
            parser.error(f"--k-grid value {k} must be >= 1")

    latents, captions = _load_dataset(args)
    rows = []
    for alpha in alphas:
        for beta in betas:
            for k in ks:
                config = _config_from_args(
                    args,
                    lof=LofParams(n_neighbors=args.neighbors, contamination=alpha),
                    beta=beta,
                    top_k=k,
                )
                manifest, results, _ = distill_dataset(
                    latents, captions, config, workers=args.workers, skip_failed=args.skip_failed
                )
                removed = {r.label: len(r.lof.removed) for r in results}
                rw_sizes = [len(tp.representative_words) for r in results for tp in r.text]
                scores = [p.text_score for p in manifest.pairs]
                nonrep_sizes = [len(r.nonrepresentative.words) for r in results]
                rows.append({
                    "alpha": alpha,
                    "beta": beta,
                    "top_k": k,
                    "removed_per_class": ";".join(f"{label}={removed[label]}" for label in sorted(removed)),
                    "total_removed": sum(removed.values()),
                    "mean_nonrepresentative_words": _mean(nonrep_sizes),
                    "mean_representative_words": _mean(rw_sizes),
                    "mean_prototype_score": _mean(scores),
                })

    fieldnames = [
        "alpha", "beta", "top_k", "removed_per_class", "total_removed",
        "mean_nonrepresentative_words", "mean_representative_words", "mean_prototype_score",
    ]
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"swept {len(rows)} grid points -> {args.output}")
    return 0


def _mean(values) -> float:
    return sum(values) / len(values) if values else 0.0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.command in ("distill", "sweep"):
        _merge_config(args, parser)
        _validate_ranges(args, parser)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "distill":
            return cmd_distill(args)
        return cmd_sweep(args, parser)
    except (InterchangeError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ClassDistillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
