"""Bridge smoke suite: export -> validate -> distill -> synthesize -> dry run.

Exercises the full boundary with the distillation tool through its CLI and
file formats only. Requires the primary package to be installed; the
primary's own suite runs without this bridge being present.
"""

from __future__ import annotations

import json

from PIL import Image

from vlcp_bridge import ExportJob, export_latents_and_captions, synthesize_from_manifest
from vlcp_bridge.cli import main as bridge_main

from conftest import needs_primary, run_primary_cli

LATENT_SHAPE = (4, 16, 16)


@needs_primary
def test_end_to_end_bridge_conformance(toy_image_tree, tmp_path, capsys):
    latents_path = tmp_path / "latents.vlpd"
    captions_path = tmp_path / "captions.jsonl"
    job = ExportJob(
        image_dir=toy_image_tree,
        latents_path=latents_path,
        captions_path=captions_path,
        latent_shape=LATENT_SHAPE,
    )
    report = export_latents_and_captions(job)
    assert report.n_exported == 10

    validate = run_primary_cli([
        "validate", "--latents", str(latents_path), "--captions", str(captions_path),
    ])
    assert validate.returncode == 0, validate.stderr

    manifest_path = tmp_path / "manifest.json"
    distill = run_primary_cli([
        "distill", "--latents", str(latents_path), "--captions", str(captions_path),
        "--output", str(manifest_path), "--ipc", "2", "--seed", "3",
    ])
    assert distill.returncode == 0, distill.stderr
    doc = json.loads(manifest_path.read_text())
    assert len(doc["pairs"]) == 4  # 2 classes x ipc 2

    out_dir = tmp_path / "synth"
    synth = synthesize_from_manifest(
        manifest_path, out_dir, model_latent_shape=LATENT_SHAPE, resolution=256
    )
    names = sorted(p.name for p in synth.outputs)
    assert names == ["salukis_0.png", "salukis_1.png", "tenches_0.png", "tenches_1.png"]
    for path in synth.outputs:
        with Image.open(path) as image:
            assert image.size == (256, 256)

    code = bridge_main([
        "finetune", "--latents", str(latents_path), "--output", str(tmp_path / "ck.npz"), "--dry-run",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "batch_size: 8" in out and "epochs: 8" in out
    print("PASS: bridge conformance (export/validate/distill/synthesize/dry-run)")
