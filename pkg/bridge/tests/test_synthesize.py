from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from vlcp_bridge import synthesize_from_manifest

SHAPE = (4, 8, 8)


def write_manifest(path: Path, pairs: list[tuple[str, int]], shape=SHAPE, dim=None) -> Path:
    dim = dim or math.prod(shape)
    rng = np.random.default_rng(5)
    doc = {
        "format_version": 1,
        "config": {"ipc": 2, "noise_strength": 0.7},
        "pairs": [
            {
                "class_label": label,
                "cluster_id": cid,
                "image_prototype": {
                    "shape": list(shape),
                    "data": [float(v) for v in rng.normal(size=dim).astype(np.float32)],
                },
                "text_prototype": f"a prototype caption for {label} {cid}",
                "noise_strength": 0.7,
                "seed": 1000 + 17 * cid,
            }
            for label, cid in pairs
        ],
    }
    path.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
    return path


class TestSynthesize:
    def test_four_pairs_emit_four_named_images(self, tmp_path):
        manifest = write_manifest(
            tmp_path / "m.json",
            [("salukis", 0), ("salukis", 1), ("tenches", 0), ("tenches", 1)],
        )
        report = synthesize_from_manifest(manifest, tmp_path / "out", model_latent_shape=SHAPE)
        names = sorted(p.name for p in report.outputs)
        assert names == ["salukis_0.png", "salukis_1.png", "tenches_0.png", "tenches_1.png"]
        for path in report.outputs:
            assert path.exists()
            with Image.open(path) as image:
                assert image.size == (256, 256)

    def test_repeat_runs_pixel_identical(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.json", [("x", 0), ("x", 1)])
        first = synthesize_from_manifest(manifest, tmp_path / "a", model_latent_shape=SHAPE)
        second = synthesize_from_manifest(manifest, tmp_path / "b", model_latent_shape=SHAPE)
        for a, b in zip(first.outputs, second.outputs):
            assert a.read_bytes() == b.read_bytes()

    def test_resolution_flag_honored(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.json", [("x", 0)])
        report = synthesize_from_manifest(
            manifest, tmp_path / "out", resolution=224, model_latent_shape=SHAPE
        )
        with Image.open(report.outputs[0]) as image:
            assert image.size == (224, 224)

    def test_shape_mismatch_names_both_shapes(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.json", [("x", 0)])
        with pytest.raises(ValueError) as exc:
            synthesize_from_manifest(manifest, tmp_path / "out", model_latent_shape=(4, 7, 7))
        message = str(exc.value)
        assert "(4, 8, 8)" in message and "(4, 7, 7)" in message

    def test_noise_strength_zero_is_pure_prototype_render(self, tmp_path):
        # With zero noise the render depends only on the prototype, not the seed.
        rng = np.random.default_rng(2)
        data = [float(v) for v in rng.normal(size=math.prod(SHAPE)).astype(np.float32)]
        doc = {
            "format_version": 1,
            "config": {},
            "pairs": [
                {
                    "class_label": "x", "cluster_id": cid,
                    "image_prototype": {"shape": list(SHAPE), "data": data},
                    "text_prototype": "t", "noise_strength": 0.0, "seed": seed,
                }
                for cid, seed in ((0, 1), (1, 999))
            ],
        }
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps(doc), encoding="utf-8")
        report = synthesize_from_manifest(manifest, tmp_path / "out", model_latent_shape=SHAPE)
        assert report.outputs[0].read_bytes() == report.outputs[1].read_bytes()

    def test_label_with_path_separator_rejected(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.json", [("evil/label", 0)])
        with pytest.raises(ValueError, match="filename"):
            synthesize_from_manifest(manifest, tmp_path / "out", model_latent_shape=SHAPE)
