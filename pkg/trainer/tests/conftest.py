import subprocess
import sys

import numpy as np
import pytest
from PIL import Image


def synth_content(rng, size=160):
    """Smooth gradient with one random disc: structured content."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    base = np.stack([(xx / w) * 255, (yy / h) * 255, ((xx + yy) / (h + w)) * 255], axis=2)
    cx, cy, r = rng.integers(30, size - 30), rng.integers(30, size - 30), rng.integers(10, 40)
    mask = (xx - cx) ** 2 + (yy - cy) ** 2 < r ** 2
    base[mask] = rng.integers(0, 256, 3)
    return base.astype(np.uint8)


def synth_style(rng, size=160):
    """Two-color checkered texture with noise: a distinct palette per call."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w]
    c1 = rng.integers(0, 256, 3)
    c2 = rng.integers(0, 256, 3)
    period = int(rng.integers(6, 24))
    stripes = ((xx // period + yy // period) % 2).astype(np.float32)[..., None]
    img = c1 * stripes + c2 * (1 - stripes)
    return np.clip(img + rng.normal(0, 12, (h, w, 3)), 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    """16 content and 8 style images on disk, the toy training corpus."""
    root = tmp_path_factory.mktemp("toyset")
    cdir = root / "content"
    sdir = root / "style"
    cdir.mkdir()
    sdir.mkdir()
    rng = np.random.default_rng(0)
    for i in range(16):
        Image.fromarray(synth_content(rng)).save(cdir / f"c{i:02d}.png")
    for i in range(8):
        Image.fromarray(synth_style(rng)).save(sdir / f"s{i:02d}.png")
    return cdir, sdir


def engine_cli(*args):
    """Run the engine CLI in a child process; the only engine touchpoint."""
    return subprocess.run(
        [sys.executable, "-m", "microast.cli", *args],
        capture_output=True,
        text=True,
    )


def png_to_torch(path):
    import torch

    a = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(a.transpose(2, 0, 1))[None]
