from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest
from PIL import Image


def make_image(path: Path, base: tuple[int, int, int], size: int = 48) -> None:
    """Small deterministic gradient image."""
    image = Image.new("RGB", (size, size))
    pixels = image.load()
    for y in range(size):
        for x in range(size):
            pixels[x, y] = (
                (base[0] + 3 * x) % 256,
                (base[1] + 5 * y) % 256,
                (base[2] + 2 * (x + y)) % 256,
            )
    image.save(path, format="PNG")


@pytest.fixture()
def toy_image_tree(tmp_path) -> Path:
    """Two classes x five images = the ten-image toy folder."""
    root = tmp_path / "images"
    for c, class_dir in enumerate(("salukis", "tenches")):
        directory = root / class_dir
        directory.mkdir(parents=True)
        for i in range(5):
            make_image(directory / f"img_{i}.png", base=(40 + 160 * c, 30 * i, 200 - 150 * c))
    return root


def primary_cli_available() -> bool:
    probe = subprocess.run(
        [sys.executable, "-c", "import vlcp"], capture_output=True
    )
    return probe.returncode == 0


def run_primary_cli(args: list[str]) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "vlcp", *args], capture_output=True, text=True
    )


needs_primary = pytest.mark.skipif(
    not primary_cli_available(), reason="primary vlcp CLI not installed"
)
