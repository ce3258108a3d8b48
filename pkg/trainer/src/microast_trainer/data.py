"""Image-directory loading: shorter-side resize then random square crop."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

_EXTS = {".png", ".jpg", ".jpeg"}


def list_images(directory: str | Path) -> list[Path]:
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in _EXTS)
    if not paths:
        raise FileNotFoundError(f"no images found in {directory}")
    return paths


def load_crop(path: Path, resize_to: int, crop: int, rng: np.random.Generator) -> torch.Tensor:
    """(3, crop, crop) float32 in [0, 1]; shorter side resized to resize_to."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        w, h = img.size
        short = min(w, h)
        target = max(resize_to, crop)
        if short != target:
            scale = target / short
            img = img.resize((max(crop, round(w * scale)), max(crop, round(h * scale))),
                             Image.BILINEAR)
        w, h = img.size
        x0 = int(rng.integers(0, w - crop + 1))
        y0 = int(rng.integers(0, h - crop + 1))
        tile = np.asarray(img.crop((x0, y0, x0 + crop, y0 + crop)), dtype=np.float32)
    return torch.from_numpy(tile.transpose(2, 0, 1) / 255.0)


def sample_batch(paths: list[Path], n: int, resize_to: int, crop: int,
                 rng: np.random.Generator) -> torch.Tensor:
    picks = rng.choice(len(paths), size=n, replace=len(paths) < n)
    return torch.stack([load_crop(paths[i], resize_to, crop, rng) for i in picks])
