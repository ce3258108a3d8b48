"""Image codec boundary: 8-bit RGB files to and from [0, 1] tensors."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageError

_ACCEPTED_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True)
class ImageRGB:
    """Interleaved 8-bit RGB pixels, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ImageError(f"expected (h, w, 3) uint8 pixels, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def load_image(path: str | Path) -> ImageRGB:
    """Decode a PNG or JPEG file; alpha dropped, grayscale replicated."""
    try:
        with Image.open(path) as img:
            if img.format not in _ACCEPTED_FORMATS:
                raise ImageError(f"{path}: unsupported format {img.format!r}")
            rgb = img.convert("RGB")
            return ImageRGB(np.asarray(rgb, dtype=np.uint8))
    except UnidentifiedImageError as e:
        raise ImageError(f"{path}: cannot decode image: {e}") from None


def save_image(img: ImageRGB, path: str | Path) -> None:
    """Encode as PNG (always, regardless of extension): lossless output."""
    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def to_tensor(img: ImageRGB) -> np.ndarray:
    """(h, w, 3) uint8 -> (1, 3, h, w) float32 in [0, 1] via v / 255."""
    planar = np.transpose(img.pixels, (2, 0, 1)).astype(np.float32) / np.float32(255.0)
    return np.ascontiguousarray(planar[None])


def from_tensor(t: np.ndarray) -> ImageRGB:
    """(1, 3, h, w) float -> uint8 image: clamp, then round half away from zero."""
    if t.ndim != 4 or t.shape[0] != 1 or t.shape[1] != 3:
        raise ImageError(f"expected a (1, 3, h, w) tensor, got shape {t.shape}")
    v = np.clip(t[0], 0.0, 1.0).astype(np.float32)
    q = np.floor(v * np.float32(255.0) + np.float32(0.5)).astype(np.uint8)
    return ImageRGB(np.transpose(q, (1, 2, 0)))
