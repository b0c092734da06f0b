from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from vlcp_bridge import (
    FinetuneConfig,
    ModelUnavailableError,
    dry_run_summary,
    finetune_diffusion,
    write_latents,
)
from vlcp_bridge.cli import main as bridge_main


@pytest.fixture()
def training_latents(tmp_path) -> Path:
    rng = np.random.default_rng(77)
    path = tmp_path / "train.vlpd"
    write_latents(rng.normal(size=(8, 64)).astype(np.float32), (4, 4, 4), path)
    return path


class TestDryRun:
    def test_summary_echoes_defaults(self, training_latents, tmp_path):
        config = FinetuneConfig(latents_path=training_latents, checkpoint_path=tmp_path / "ck.npz")
        summary = dry_run_summary(config, n_samples=8)
        assert summary["batch_size"] == 8
        assert summary["epochs"] == 8
        assert summary["n_samples"] == 8
        assert summary["steps"] == 8  # 8 epochs x ceil(8/8) batches

    def test_cli_dry_run_prints_plan_without_checkpoint(self, training_latents, tmp_path, capsys):
        checkpoint = tmp_path / "ck.npz"
        code = bridge_main([
            "finetune", "--latents", str(training_latents), "--output", str(checkpoint), "--dry-run",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "batch_size: 8" in out
        assert "epochs: 8" in out
        assert "steps: 8" in out
        assert not checkpoint.exists()


class TestToyTraining:
    def test_loss_decreases_over_fifty_steps(self, training_latents, tmp_path):
        # 50 epochs x 1 batch of 8 = 50 steps of overfit on the same 8 pairs.
        config = FinetuneConfig(
            latents_path=training_latents,
            checkpoint_path=tmp_path / "ck.npz",
            epochs=50,
            batch_size=8,
        )
        result = finetune_diffusion(config)
        assert result.steps_run == 50
        assert result.losses[-1] < result.losses[0]
        assert result.checkpoint_path.exists()
        with np.load(result.checkpoint_path) as blob:
            assert int(blob["step"]) == 50
            assert 0.0 < float(blob["gain"]) < 1.0  # denoiser learned to shrink the noise

    def test_resume_continues_step_counter(self, training_latents, tmp_path):
        first = finetune_diffusion(
            FinetuneConfig(
                latents_path=training_latents,
                checkpoint_path=tmp_path / "ck.npz",
                epochs=4,
            )
        )
        assert first.final_step == 4
        resumed = finetune_diffusion(
            FinetuneConfig(
                latents_path=training_latents,
                checkpoint_path=tmp_path / "ck2.npz",
                epochs=4,
                resume_from=tmp_path / "ck.npz",
            )
        )
        assert resumed.final_step == 8
        with np.load(tmp_path / "ck2.npz") as blob:
            assert int(blob["step"]) == 8

    def test_deterministic_for_fixed_seed(self, training_latents, tmp_path):
        results = [
            finetune_diffusion(
                FinetuneConfig(
                    latents_path=training_latents,
                    checkpoint_path=tmp_path / f"ck{i}.npz",
                    epochs=6,
                    seed=42,
                )
            )
            for i in range(2)
        ]
        assert results[0].losses == results[1].losses

    def test_real_backend_raises_model_unavailable(self, training_latents, tmp_path):
        config = FinetuneConfig(
            latents_path=training_latents,
            checkpoint_path=tmp_path / "ck.npz",
            backend="sd:stable-diffusion-v1-5",
        )
        with pytest.raises(ModelUnavailableError, match="sd:stable-diffusion-v1-5"):
            finetune_diffusion(config)
