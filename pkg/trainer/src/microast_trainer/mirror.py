"""Differentiable mirror of the engine architecture.

Module attribute names are chosen so state_dict keys coincide exactly
with the engine's tensor slots; export is therefore name-for-name. The
forward path reproduces the engine's numerics (reflection padding,
biased+eps instance statistics, fused renormalization, nearest
upsampling, final clamp) so both sides agree to float tolerance on
identical weights.
"""
from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from .mast_io import read_mast, write_mast
from .slots import ChannelPlan, DEFAULT_PLAN

EPS = 1e-5


def instance_stats(x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-sample/channel spatial mean and sqrt(biased var + eps)."""
    mean = x.mean(dim=(2, 3))
    var = x.var(dim=(2, 3), unbiased=False)
    return mean, torch.sqrt(var + EPS)


def feat_mod(x: torch.Tensor, mu_s: torch.Tensor, sigma_s: torch.Tensor) -> torch.Tensor:
    """Renormalize x to target stats; fused scale/shift as in the engine."""
    mean, std = instance_stats(x)
    scale = (sigma_s / std)[:, :, None, None]
    shift = mu_s[:, :, None, None] - mean[:, :, None, None] * scale
    return x * scale + shift


def _conv(c_in, c_out, k, stride=1):
    return nn.Conv2d(c_in, c_out, k, stride=stride, padding=k // 2,
                     padding_mode="reflect")


class DepthwiseSeparable(nn.Module):
    def __init__(self, c_in, c_out, k, stride):
        super().__init__()
        self.depthwise = nn.Conv2d(c_in, c_in, k, stride=stride, padding=k // 2,
                                   padding_mode="reflect", groups=c_in)
        self.pointwise = nn.Conv2d(c_in, c_out, 1)

    def forward(self, x):
        return self.pointwise(self.depthwise(x))


class ResBlock(nn.Module):
    def __init__(self, c, k):
        super().__init__()
        self.conv1 = _conv(c, c, k)
        self.conv2 = _conv(c, c, k)

    def forward(self, x):
        return x + self.conv2(F.relu(self.conv1(x)))


class ModulatedResBlock(nn.Module):
    """Residual block whose convs get per-channel (w, b) filter modulation."""

    def __init__(self, c, k):
        super().__init__()
        self.conv1 = _conv(c, c, k)
        self.conv2 = _conv(c, c, k)

    @staticmethod
    def _pseudo(x, conv, w_s, b_s):
        y = conv(x) * w_s[:, :, None, None]
        return y + b_s[:, :, None, None] * x

    def forward(self, x, sig1, sig2):
        y = F.relu(self._pseudo(x, self.conv1, *sig1))
        y = self._pseudo(y, self.conv2, *sig2)
        return y + x


class Encoder(nn.Module):
    def __init__(self, plan: ChannelPlan):
        super().__init__()
        k = plan.kernel
        self.stem = _conv(3, plan.stem, k)
        self.ds1 = DepthwiseSeparable(plan.stem, plan.mid, k, stride=2)
        self.ds2 = DepthwiseSeparable(plan.mid, plan.bottleneck, k, stride=2)
        self.res1 = ResBlock(plan.bottleneck, k)
        self.res2 = ResBlock(plan.bottleneck, k)

    def forward(self, x):
        x = F.relu(self.stem(x))
        x = F.relu(self.ds1(x))
        x = F.relu(self.ds2(x))
        return self.res2(self.res1(x))


class ModulatorNet(nn.Module):
    """Pooled style feature -> one per-channel vector per modulated conv."""

    def __init__(self, plan: ChannelPlan):
        super().__init__()
        cb = plan.bottleneck
        self.trunk = nn.Linear(cb, cb)
        for i in range(1, plan.modulated_convs + 1):
            setattr(self, f"head{i}", nn.Linear(cb, cb))
        self.n_heads = plan.modulated_convs

    def forward(self, pooled):
        hidden = F.relu(self.trunk(pooled))
        return [getattr(self, f"head{i}")(hidden) for i in range(1, self.n_heads + 1)]


class Modulator(nn.Module):
    def __init__(self, plan: ChannelPlan):
        super().__init__()
        self.weight_net = ModulatorNet(plan)
        self.bias_net = ModulatorNet(plan)

    def forward(self, f_s):
        mu, sigma = instance_stats(f_s)
        pooled = f_s.mean(dim=(2, 3))
        ws = self.weight_net(pooled)
        bs = self.bias_net(pooled)
        return mu, sigma, list(zip(ws, bs))


class Decoder(nn.Module):
    def __init__(self, plan: ChannelPlan):
        super().__init__()
        k = plan.kernel
        cb = plan.bottleneck
        self.res1 = ModulatedResBlock(cb, k)
        self.res2 = ModulatedResBlock(cb, k)
        self.up1 = DepthwiseSeparable(cb, plan.mid, k, stride=1)
        self.up2 = DepthwiseSeparable(plan.mid, plan.stem, k, stride=1)
        self.head = _conv(plan.stem, 3, k)

    def forward(self, f_c, signals, clamp=True):
        mu, sigma, mods = signals
        x = feat_mod(f_c, mu, sigma)
        x = self.res1(x, mods[0], mods[1])
        x = feat_mod(x, mu, sigma)
        x = self.res2(x, mods[2], mods[3])
        for up in (self.up1, self.up2):
            x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = F.relu(up(x))
        x = self.head(x)
        return torch.clamp(x, 0.0, 1.0) if clamp else x


class StyleTransferMirror(nn.Module):
    """Full pipeline with the engine's slot names as state_dict keys."""

    def __init__(self, plan: ChannelPlan = DEFAULT_PLAN, seed: int | None = None):
        super().__init__()
        self.plan = plan
        self.content_encoder = Encoder(plan)
        self.style_encoder = Encoder(plan)
        self.modulator = Modulator(plan)
        self.decoder = Decoder(plan)
        if seed is not None:
            self.reset_parameters(seed)

    def reset_parameters(self, seed: int) -> None:
        """Seeded init tuned for trainability from scratch.

        Default torch resets everywhere, then: decoder head biased to
        mid-gray so the clamp starts unsaturated, and modulator heads
        biased to the neutral (w, b) = (1, 0) point.
        """
        gen = torch.Generator().manual_seed(seed)
        for module in self.modules():
            if isinstance(module, (nn.Conv2d, nn.Linear)):
                fan_in = module.weight.shape[1:].numel()
                bound = 1.0 / math.sqrt(fan_in)
                with torch.no_grad():
                    module.weight.uniform_(-bound * math.sqrt(3), bound * math.sqrt(3),
                                           generator=gen)
                    module.bias.uniform_(-bound, bound, generator=gen)
        with torch.no_grad():
            self.decoder.head.bias.fill_(0.5)
            for i in range(1, self.plan.modulated_convs + 1):
                getattr(self.modulator.weight_net, f"head{i}").bias.fill_(1.0)
                getattr(self.modulator.bias_net, f"head{i}").bias.fill_(0.0)

    def signals(self, image: torch.Tensor):
        """Style-encode an image and derive its modulation signals."""
        return self.modulator(self.style_encoder(image))

    def flat_signals(self, image: torch.Tensor) -> torch.Tensor:
        """Flattened signal vector per sample: mu, sigma, then w before b per conv."""
        mu, sigma, mods = self.signals(image)
        parts = [mu, sigma]
        for w_s, b_s in mods:
            parts.extend([w_s, b_s])
        return torch.cat(parts, dim=1)

    def forward(self, content: torch.Tensor, style: torch.Tensor, clamp: bool = True):
        f_c = self.content_encoder(content)
        return self.decoder(f_c, self.signals(style), clamp=clamp)

    # ------------------------------------------------------------- weights

    def export_weights(self, path) -> None:
        """Write current parameters as a .mast container, name-for-name."""
        tensors = {k: v.detach().cpu().numpy() for k, v in self.state_dict().items()}
        write_mast(tensors, path, self.plan)

    def load_mast(self, path) -> None:
        tensors = read_mast(path)
        state = {k: torch.from_numpy(v) for k, v in tensors.items()}
        self.load_state_dict(state, strict=True)
