"""Loss networks: feature pyramids at strides 1, 2, 4, 8.

Training quality comes from a pretrained 19-layer conv stack whose
weights must be supplied as a file (they are never shipped, and the
engine never needs them). For CI and smoke tests a tiny seeded stand-in
with the same four-tap interface is provided.
"""
from __future__ import annotations

from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

# conv layer plan of the 19-layer stack up to its fourth tap:
# (out_channels, taps are taken after the first relu of each block)
_VGG_CFG = [64, 64, "P", 128, 128, "P", 256, 256, 256, 256, "P", 512]
_TAP_AFTER_CONV = {0, 2, 4, 8}  # first conv of each of the four blocks


class PerceptualFeatures(nn.Module):
    """Wraps a conv stack; forward returns the four tap feature maps."""

    def __init__(self, layers: nn.ModuleList, tap_idx: set[int]):
        super().__init__()
        self.layers = layers
        self.tap_idx = tap_idx
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        taps = []
        conv_i = 0
        for layer in self.layers:
            x = layer(x)
            if isinstance(layer, nn.Conv2d):
                x = F.relu(x)
                if conv_i in self.tap_idx:
                    taps.append(x)
                conv_i += 1
            if len(taps) == 4:
                break
        return taps


def _build_stack(cfg, in_ch=3) -> nn.ModuleList:
    layers = nn.ModuleList()
    c = in_ch
    for item in cfg:
        if item == "P":
            layers.append(nn.MaxPool2d(2, 2))
        else:
            layers.append(nn.Conv2d(c, item, 3, padding=1))
            c = item
    return layers


def load_pretrained(weights_path: str | Path) -> PerceptualFeatures:
    """Load the 19-layer perceptual stack from a state-dict file.

    Accepts a torchvision-style checkpoint (keys features.N.weight) or a
    bare {index: tensor} dict for the conv prefix. Raises
    FileNotFoundError when the file is absent.
    """
    path = Path(weights_path)
    if not path.exists():
        raise FileNotFoundError(f"perceptual network weights not found: {path}")
    raw = torch.load(path, map_location="cpu", weights_only=True)
    if isinstance(raw, dict) and any(k.startswith("features.") for k in raw):
        raw = {k[len("features."):]: v for k, v in raw.items() if k.startswith("features.")}
    stack = _build_stack(_VGG_CFG)
    # torchvision indexing: conv, relu pairs with pools interleaved
    src_idx = 0
    for layer in stack:
        if isinstance(layer, nn.MaxPool2d):
            src_idx += 1
            continue
        layer.weight.data.copy_(raw[f"{src_idx}.weight"])
        layer.bias.data.copy_(raw[f"{src_idx}.bias"])
        src_idx += 2  # skip the relu entry
    return PerceptualFeatures(stack, _TAP_AFTER_CONV)


_TINY_CFG = [8, "P", 16, "P", 32, "P", 64]
_TINY_TAPS = {0, 1, 2, 3}


def tiny_standin(seed: int = 0) -> PerceptualFeatures:
    """Seeded miniature loss network with taps at strides 1, 2, 4, 8."""
    gen = torch.Generator().manual_seed(seed)
    stack = _build_stack(_TINY_CFG)
    with torch.no_grad():
        for layer in stack:
            if isinstance(layer, nn.Conv2d):
                fan = layer.weight.shape[1:].numel()
                layer.weight.uniform_(-(3.0 / fan) ** 0.5, (3.0 / fan) ** 0.5, generator=gen)
                layer.bias.uniform_(-0.1, 0.1, generator=gen)
    return PerceptualFeatures(stack, _TINY_TAPS)
