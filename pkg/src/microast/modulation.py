"""Style modulation operators.

Two modulation families drive the decoder. Feature modulation renormalizes
a feature map to target per-channel statistics. Filter modulation scales
each convolution's output channels and adds a per-channel pointwise term;
it exists in two algebraically equal forms: a "direct" form that builds
the modulated filter and convolves once, and a fast "pseudo" form that
modulates the unmodified convolution's output. The pseudo form is the
production path; the direct form is kept as its cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ShapeError
from .tensor_ops import ConvParams, conv2d, instance_stats, relu, _require_nchw


@dataclass(frozen=True)
class ModSignals:
    """Style modulation signals for the decoder.

    mu/sigma: per-channel feature-modulation targets, length = bottleneck
    channels. filter_mods: one (w, b) vector pair per modulated conv
    layer, in layer order.
    """

    mu: np.ndarray
    sigma: np.ndarray
    filter_mods: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        mu = np.ascontiguousarray(self.mu, dtype=np.float32).reshape(-1)
        sigma = np.ascontiguousarray(self.sigma, dtype=np.float32).reshape(-1)
        if mu.shape != sigma.shape:
            raise ShapeError("mu and sigma must have equal length")
        if not np.all(sigma > 0):
            raise ShapeError("sigma must be strictly positive")
        mods = []
        for w, b in self.filter_mods:
            w = np.ascontiguousarray(w, dtype=np.float32).reshape(-1)
            b = np.ascontiguousarray(b, dtype=np.float32).reshape(-1)
            if w.shape != mu.shape or b.shape != mu.shape:
                raise ShapeError("filter_mod vectors must match channel count")
            mods.append((w, b))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "filter_mods", tuple(mods))

    @property
    def channels(self) -> int:
        return self.mu.shape[0]


def flatten_signals(m: ModSignals) -> np.ndarray:
    """Concatenate mu, sigma, then each layer's w before b, in layer order."""
    parts = [m.mu, m.sigma]
    for w, b in m.filter_mods:
        parts.append(w)
        parts.append(b)
    return np.concatenate(parts)


def _as_per_channel(v, c: int, n: int, name: str) -> np.ndarray:
    """Coerce a (c,) or (n, c) vector to a broadcastable (n_or_1, c, 1, 1)."""
    v = np.asarray(v, dtype=np.float32)
    if v.ndim == 1:
        v = v[None, :]
    if v.ndim != 2 or v.shape[1] != c or v.shape[0] not in (1, n):
        raise ShapeError(f"{name}: expected length-{c} per-channel values, got shape {v.shape}")
    return v[:, :, None, None]


def feat_mod(f_c: np.ndarray, mu_s, sigma_s) -> np.ndarray:
    """Renormalize f_c so its per-channel stats become (mu_s, sigma_s).

    Computed as f_c * scale + shift with scale = sigma_s / std(f_c) and
    shift = mu_s - mean(f_c) * scale, so passing a tensor's own stats is
    an exact no-op (scale 1.0, shift 0.0).
    """
    f_c = _require_nchw(f_c, "feat_mod")
    n, c = f_c.shape[:2]
    mu_s = _as_per_channel(mu_s, c, n, "mu_s")
    sigma_s = _as_per_channel(sigma_s, c, n, "sigma_s")
    if not np.all(sigma_s > 0):
        raise ShapeError("sigma_s must be strictly positive")
    mean, std = instance_stats(f_c)
    scale = sigma_s / std[:, :, None, None]
    shift = mu_s - mean[:, :, None, None] * scale
    return f_c * scale + shift


def adain(f_c: np.ndarray, f_s: np.ndarray) -> np.ndarray:
    """Renormalize f_c to the per-channel stats of f_s.

    Same code path as feat_mod, fed with instance_stats(f_s); spatial
    extents of the two inputs may differ.
    """
    f_c = _require_nchw(f_c, "adain")
    f_s = _require_nchw(f_s, "adain")
    if f_s.shape[1] != f_c.shape[1]:
        raise ShapeError(
            f"adain: channel mismatch {f_c.shape[1]} vs {f_s.shape[1]}"
        )
    if f_s.shape[0] not in (1, f_c.shape[0]):
        raise ShapeError("adain: style batch must be 1 or match content batch")
    mean, std = instance_stats(f_s)
    return feat_mod(f_c, mean, std)


def _check_mod_conv(f_c: np.ndarray, p: ConvParams, w_s: np.ndarray, b_s: np.ndarray):
    c = f_c.shape[1]
    if p.in_channels != c or p.out_channels != c:
        raise ShapeError(
            f"modulated conv must preserve {c} channels, got "
            f"{p.in_channels} -> {p.out_channels}"
        )
    if w_s.shape != (c,) or b_s.shape != (c,):
        raise ShapeError(f"modulation vectors must have length {c}")
    if p.stride != 1 or 2 * p.pad != p.weight.shape[2] - 1 or 2 * p.pad != p.weight.shape[3] - 1:
        raise ShapeError("modulated conv must be stride 1 and spatially preserving")


def filter_mod_pseudo(f_c: np.ndarray, p: ConvParams, w_s, b_s) -> np.ndarray:
    """Fast filter modulation: w_s * conv2d(f_c, p) + b_s * f_c.

    w_s scales per output channel (broadcast over space), b_s adds a
    per-channel pointwise copy of the input.
    """
    f_c = _require_nchw(f_c, "filter_mod_pseudo")
    w_s = np.ascontiguousarray(w_s, dtype=np.float32).reshape(-1)
    b_s = np.ascontiguousarray(b_s, dtype=np.float32).reshape(-1)
    _check_mod_conv(f_c, p, w_s, b_s)
    out = conv2d(f_c, p)
    out *= w_s[None, :, None, None]
    if np.any(b_s != 0):
        out += b_s[None, :, None, None] * f_c
    return out


def filter_mod_direct(f_c: np.ndarray, p: ConvParams, w_s, b_s) -> np.ndarray:
    """Filter modulation by building the modulated filter explicitly.

    The filter's output channels are scaled by w_s and b_s lands on the
    center tap of each channel's diagonal, so one conv2d realizes
    w_s * conv + b_s * identity. The bias is scaled by w_s to keep both
    forms equal.
    """
    f_c = _require_nchw(f_c, "filter_mod_direct")
    w_s = np.ascontiguousarray(w_s, dtype=np.float32).reshape(-1)
    b_s = np.ascontiguousarray(b_s, dtype=np.float32).reshape(-1)
    _check_mod_conv(f_c, p, w_s, b_s)
    c = f_c.shape[1]
    kh, kw = p.weight.shape[2:]
    weight = w_s[:, None, None, None] * p.weight
    idx = np.arange(c)
    weight[idx, idx, kh // 2, kw // 2] += b_s
    bias = w_s * p.bias
    return conv2d(f_c, replace(p, weight=weight, bias=bias))


def modulated_resblock(
    f: np.ndarray,
    conv1: ConvParams,
    conv2: ConvParams,
    sig1: tuple[np.ndarray, np.ndarray],
    sig2: tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """Residual block with both convs filter-modulated:
    pseudo(relu(pseudo(f, conv1, sig1)), conv2, sig2) + f.
    """
    y = filter_mod_pseudo(f, conv1, sig1[0], sig1[1])
    y = relu(y)
    y = filter_mod_pseudo(y, conv2, sig2[0], sig2[1])
    return y + f
