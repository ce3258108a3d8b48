"""The four-stage stylization pipeline and its weight bookkeeping.

Stages: a content encoder extracts structure, a style encoder extracts a
style feature, a modulator turns that feature into modulation signals,
and a decoder renders the stylized image under those signals.

Both encoders share one architecture (independent weights): a stride-1
conv stem, two stride-2 depthwise separable convs, and two residual
blocks, relu between stages. The decoder mirrors it: feature
renormalization and a filter-modulated residual block (twice), then two
upsample + depthwise-separable stages and a 3-channel head, clamped to
[0, 1]. Spatial extents divide by 4 at the bottleneck and multiply back
by 4 on the way out; callers with sizes not divisible by 4 go through
stylize(), which mirror-pads up and crops back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, ShapeError
from .modulation import ModSignals, feat_mod, modulated_resblock
from .tensor_ops import (
    ConvParams,
    conv2d,
    depthwise_separable_conv2d,
    instance_stats,
    upsample_nearest,
    _require_nchw,
)

MIN_INPUT_EXTENT = 16


@dataclass(frozen=True)
class ChannelPlan:
    """Channel widths of the pipeline; bottleneck is the modulated width."""

    stem: int = 16
    mid: int = 32
    bottleneck: int = 64
    kernel: int = 3
    modulated_convs: int = 4

    def __post_init__(self):
        if min(self.stem, self.mid, self.bottleneck) < 1:
            raise ShapeError("channel widths must be positive")
        if self.kernel % 2 == 0 or self.kernel < 1:
            raise ShapeError("kernel size must be odd and positive")
        if self.modulated_convs != 4:
            raise ShapeError("this pipeline modulates exactly 4 decoder convs")


DEFAULT_PLAN = ChannelPlan()


def weight_slots(plan: ChannelPlan = DEFAULT_PLAN) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) list: every architecture slot, in order."""
    k = plan.kernel
    st, mid, cb = plan.stem, plan.mid, plan.bottleneck
    slots: list[tuple[str, tuple[int, ...]]] = []

    def conv(name: str, o: int, i: int, kk: int) -> None:
        slots.append((f"{name}.weight", (o, i, kk, kk)))
        slots.append((f"{name}.bias", (o,)))

    def linear(name: str, o: int, i: int) -> None:
        slots.append((f"{name}.weight", (o, i)))
        slots.append((f"{name}.bias", (o,)))

    for enc in ("content_encoder", "style_encoder"):
        conv(f"{enc}.stem", st, 3, k)
        conv(f"{enc}.ds1.depthwise", st, 1, k)
        conv(f"{enc}.ds1.pointwise", mid, st, 1)
        conv(f"{enc}.ds2.depthwise", mid, 1, k)
        conv(f"{enc}.ds2.pointwise", cb, mid, 1)
        for res in ("res1", "res2"):
            conv(f"{enc}.{res}.conv1", cb, cb, k)
            conv(f"{enc}.{res}.conv2", cb, cb, k)

    for net in ("weight_net", "bias_net"):
        linear(f"modulator.{net}.trunk", cb, cb)
        for i in range(1, plan.modulated_convs + 1):
            linear(f"modulator.{net}.head{i}", cb, cb)

    for res in ("res1", "res2"):
        conv(f"decoder.{res}.conv1", cb, cb, k)
        conv(f"decoder.{res}.conv2", cb, cb, k)
    conv("decoder.up1.depthwise", cb, 1, k)
    conv("decoder.up1.pointwise", mid, cb, 1)
    conv("decoder.up2.depthwise", mid, 1, k)
    conv("decoder.up2.pointwise", st, mid, 1)
    conv("decoder.head", 3, st, k)
    return slots


@dataclass
class NetworkWeights:
    """Named tensor map for the whole pipeline, in canonical slot order.

    Construction validates that every slot is present with the exact
    expected shape and nothing extra; tensors are frozen read-only.
    """

    plan: ChannelPlan
    tensors: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        expected = weight_slots(self.plan)
        missing = [n for n, _ in expected if n not in self.tensors]
        if missing:
            raise SchemaError(f"missing weight tensors: {missing[:4]}")
        extra = set(self.tensors) - {n for n, _ in expected}
        if extra:
            raise SchemaError(f"unexpected weight tensors: {sorted(extra)[:4]}")
        ordered: dict[str, np.ndarray] = {}
        for name, shape in expected:
            t = np.ascontiguousarray(self.tensors[name], dtype=np.float32)
            if t.shape != shape:
                raise SchemaError(
                    f"tensor {name} has shape {t.shape}, expected {shape}"
                )
            t.setflags(write=False)
            ordered[name] = t
        self.tensors = ordered

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]


def infer_plan(shapes: dict[str, tuple[int, ...]]) -> ChannelPlan:
    """Recover the channel plan from slot shapes (used by the loader)."""
    try:
        stem_w = shapes["content_encoder.stem.weight"]
        mid = shapes["content_encoder.ds1.pointwise.weight"][0]
        cb = shapes["content_encoder.ds2.pointwise.weight"][0]
    except KeyError as e:
        raise SchemaError(f"cannot infer channel plan: missing {e}") from None
    return ChannelPlan(stem=stem_w[0], mid=mid, bottleneck=cb, kernel=stem_w[2])


def init_weights(
    seed: int, plan: ChannelPlan = DEFAULT_PLAN, neutral: bool = False
) -> NetworkWeights:
    """Seeded uniform fan-in-scaled init.

    Weights draw from U(-sqrt(6/fan_in), +sqrt(6/fan_in)) so activation
    magnitudes survive the relu chain; biases from the conventional
    U(-1/sqrt(fan_in), +1/sqrt(fan_in)).

    With neutral=True the modulator is zeroed except the weight-net head
    biases, which are set to 1, so derived filter modulations are (1, 0)
    for any style input and the decoder behaves unmodulated.
    """
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    bound = 1.0
    for name, shape in weight_slots(plan):
        if len(shape) > 1:
            fan_in = math.prod(shape[1:])
            bound = 1.0 / math.sqrt(fan_in)
            draw_bound = math.sqrt(6.0 / fan_in)
        else:
            draw_bound = bound
        tensors[name] = rng.uniform(-draw_bound, draw_bound, shape).astype(np.float32)
    if neutral:
        for name, shape in weight_slots(plan):
            if not name.startswith("modulator."):
                continue
            if ".weight_net.head" in name and name.endswith(".bias"):
                tensors[name] = np.ones(shape, dtype=np.float32)
            else:
                tensors[name] = np.zeros(shape, dtype=np.float32)
    return NetworkWeights(plan, tensors)


def _conv_p(w: NetworkWeights, name: str, stride: int = 1, pad: int | None = None) -> ConvParams:
    weight = w[f"{name}.weight"]
    if pad is None:
        pad = weight.shape[2] // 2
    return ConvParams(weight, w[f"{name}.bias"], stride=stride, padding="reflect", pad=pad)


def _relu_(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, np.float32(0.0), out=x)


def _plain_resblock(x: np.ndarray, w: NetworkWeights, name: str) -> np.ndarray:
    y = conv2d(x, _conv_p(w, f"{name}.conv1"))
    y = conv2d(_relu_(y), _conv_p(w, f"{name}.conv2"))
    return x + y


def _encode(x: np.ndarray, w: NetworkWeights, enc: str) -> np.ndarray:
    x = _relu_(conv2d(x, _conv_p(w, f"{enc}.stem")))
    for ds in ("ds1", "ds2"):
        x = depthwise_separable_conv2d(
            x,
            _conv_p(w, f"{enc}.{ds}.depthwise", stride=2),
            _conv_p(w, f"{enc}.{ds}.pointwise", pad=0),
        )
        x = _relu_(x)
    x = _plain_resblock(x, w, f"{enc}.res1")
    x = _plain_resblock(x, w, f"{enc}.res2")
    return x


def _check_image_tensor(x: np.ndarray, what: str) -> np.ndarray:
    x = _require_nchw(x, what)
    if x.shape[1] != 3:
        raise ShapeError(f"{what}: expected 3 channels, got {x.shape[1]}")
    if x.shape[2] < MIN_INPUT_EXTENT or x.shape[3] < MIN_INPUT_EXTENT:
        raise ShapeError(
            f"{what}: input {x.shape[2]}x{x.shape[3]} is smaller than "
            f"{MIN_INPUT_EXTENT}x{MIN_INPUT_EXTENT}"
        )
    return x


def encode_content(content: np.ndarray, w: NetworkWeights) -> np.ndarray:
    """Structure feature: (n, bottleneck, ceil(h/4), ceil(w/4))."""
    return _encode(_check_image_tensor(content, "encode_content"), w, "content_encoder")


def encode_style(style: np.ndarray, w: NetworkWeights) -> np.ndarray:
    """Style feature; same architecture as encode_content, own weights."""
    return _encode(_check_image_tensor(style, "encode_style"), w, "style_encoder")


def derive_signals(f_s: np.ndarray, w: NetworkWeights) -> ModSignals:
    """Turn a style feature into modulation signals.

    mu/sigma are the feature's own per-channel stats. Each filter
    modulation head maps the globally average-pooled feature through a
    shared trunk linear layer, relu, and a per-conv head linear layer.
    """
    f_s = _require_nchw(f_s, "derive_signals")
    cb = w.plan.bottleneck
    if f_s.shape[0] != 1 or f_s.shape[1] != cb:
        raise ShapeError(
            f"derive_signals: expected style feature (1, {cb}, h, w), got {f_s.shape}"
        )
    mean, std = instance_stats(f_s)
    pooled = f_s.mean(axis=(2, 3), dtype=np.float64).astype(np.float32)[0]

    heads: dict[str, list[np.ndarray]] = {}
    for net in ("weight_net", "bias_net"):
        trunk_w = w[f"modulator.{net}.trunk.weight"]
        trunk_b = w[f"modulator.{net}.trunk.bias"]
        hidden = np.maximum(trunk_w @ pooled + trunk_b, np.float32(0.0))
        heads[net] = [
            w[f"modulator.{net}.head{i}.weight"] @ hidden
            + w[f"modulator.{net}.head{i}.bias"]
            for i in range(1, w.plan.modulated_convs + 1)
        ]
    mods = tuple(zip(heads["weight_net"], heads["bias_net"]))
    return ModSignals(mean[0], std[0], mods)


def decode(f_c: np.ndarray, m_s: ModSignals, w: NetworkWeights) -> np.ndarray:
    """Render (n, 3, 4h, 4w) in [0, 1] from a bottleneck feature."""
    f_c = _require_nchw(f_c, "decode")
    cb = w.plan.bottleneck
    if f_c.shape[1] != cb:
        raise ShapeError(f"decode: expected {cb} channels, got {f_c.shape[1]}")
    if len(m_s.filter_mods) != w.plan.modulated_convs or m_s.channels != cb:
        raise ShapeError(
            f"decode: expected {w.plan.modulated_convs} filter modulations of "
            f"width {cb}, got {len(m_s.filter_mods)} of width {m_s.channels}"
        )
    mods = m_s.filter_mods
    x = feat_mod(f_c, m_s.mu, m_s.sigma)
    x = modulated_resblock(
        x, _conv_p(w, "decoder.res1.conv1"), _conv_p(w, "decoder.res1.conv2"), mods[0], mods[1]
    )
    x = feat_mod(x, m_s.mu, m_s.sigma)
    x = modulated_resblock(
        x, _conv_p(w, "decoder.res2.conv1"), _conv_p(w, "decoder.res2.conv2"), mods[2], mods[3]
    )
    for up in ("up1", "up2"):
        x = upsample_nearest(x, 2)
        x = depthwise_separable_conv2d(
            x,
            _conv_p(w, f"decoder.{up}.depthwise"),
            _conv_p(w, f"decoder.{up}.pointwise", pad=0),
        )
        x = _relu_(x)
    x = conv2d(x, _conv_p(w, "decoder.head"))
    return np.clip(x, 0.0, 1.0, out=x)


def _pad_to_multiple_of_4(x: np.ndarray) -> tuple[np.ndarray, int, int]:
    h, w = x.shape[2:]
    ph = (-h) % 4
    pw = (-w) % 4
    if ph == 0 and pw == 0:
        return x, h, w
    return np.pad(x, ((0, 0), (0, 0), (0, ph), (0, pw)), mode="reflect"), h, w


def stylize(content: np.ndarray, style: np.ndarray, w: NetworkWeights) -> np.ndarray:
    """Full pipeline; output shape equals the content shape exactly.

    Inputs whose extents are not multiples of 4 are mirror-padded up for
    the forward pass and the output is cropped back.
    """
    content = _check_image_tensor(content, "stylize content")
    style = _check_image_tensor(style, "stylize style")
    cp, h, w_ = _pad_to_multiple_of_4(content)
    sp, _, _ = _pad_to_multiple_of_4(style)
    f_c = _encode(cp, w, "content_encoder")
    f_s = _encode(sp, w, "style_encoder")
    m_s = derive_signals(f_s, w)
    del sp, f_s
    out = decode(f_c, m_s, w)
    if out.shape[2] != h or out.shape[3] != w_:
        out = np.ascontiguousarray(out[:, :, :h, :w_])
    return out


def count_params(w: NetworkWeights) -> int:
    """Total scalar parameter count over every slot."""
    return int(sum(t.size for t in w.tensors.values()))


def estimate_flops(h: int, w: int, plan: ChannelPlan = DEFAULT_PLAN) -> float:
    """Analytic FLOPs (multiply-adds x 2) of one stylize pass at h x w.

    Counts convolution and dense-layer multiply-adds with both the
    content and style inputs at the given size, the protocol used for
    headline throughput figures; cheap elementwise work is excluded.
    """
    hh = 4 * ((h + 3) // 4)
    ww = 4 * ((w + 3) // 4)
    p0 = hh * ww
    p1 = (hh // 2) * (ww // 2)
    p2 = (hh // 4) * (ww // 4)
    k2 = plan.kernel * plan.kernel
    st, mid, cb = plan.stem, plan.mid, plan.bottleneck

    encoder = (
        3 * st * k2 * p0
        + st * k2 * p1 + st * mid * p1
        + mid * k2 * p2 + mid * cb * p2
        + 4 * cb * cb * k2 * p2
    )
    modulator = 2 * (1 + plan.modulated_convs) * cb * cb
    decoder = (
        4 * cb * cb * k2 * p2
        + cb * k2 * p1 + cb * mid * p1
        + mid * k2 * p0 + mid * st * p0
        + st * 3 * k2 * p0
    )
    return 2.0 * (2 * encoder + modulator + decoder)
