"""Dense 4-D float32 tensors and the low-level neural operators.

A feature map is a C-contiguous numpy float32 array of shape
(batch, channels, height, width), width fastest. All operators are pure
functions: they never mutate their inputs and are safe to call from many
threads at once.

Convolution is im2col plus one sgemm per output-row tile. Tile boundaries
depend only on tensor shapes and BLAS runs single-threaded inside each
tile (see runtime), so for a given output element the accumulation is
performed by one fixed-shape kernel call: results are bit-identical
across worker counts and repeated runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import as_strided

from . import runtime
from .errors import ShapeError

# Variance stabilizer: std = sqrt(biased_var + EPSILON), so std >= sqrt(EPSILON) > 0.
EPSILON = 1e-5

# Upper bound on one tile's im2col buffer; derived from shapes only,
# never from the worker count (determinism contract).
_TILE_BYTES = 1 << 24


class ChannelStats(NamedTuple):
    """Per-sample, per-channel spatial statistics; arrays of shape (n, c)."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class ConvParams:
    """Weights and geometry for one convolution layer.

    weight: (out_channels, in_channels, kh, kw), kh/kw odd.
    bias: (out_channels,).
    padding: "reflect" (mirror, edge pixel not repeated) or "zero",
    applied symmetrically by `pad` pixels on each spatial side.
    """

    weight: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: str = "reflect"
    pad: int = 0

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if w.ndim != 4:
            raise ShapeError(f"conv weight must be 4-D, got shape {w.shape}")
        if w.shape[2] % 2 == 0 or w.shape[3] % 2 == 0:
            raise ShapeError(f"kernel extents must be odd, got {w.shape[2:]}")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"bias shape {b.shape} != ({w.shape[0]},)")
        if self.stride < 1:
            raise ShapeError(f"stride must be positive, got {self.stride}")
        if self.padding not in ("reflect", "zero"):
            raise ShapeError(f"unknown padding mode {self.padding!r}")
        if self.pad < 0:
            raise ShapeError(f"pad must be non-negative, got {self.pad}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]


def _require_nchw(x: np.ndarray, op: str) -> np.ndarray:
    if not isinstance(x, np.ndarray) or x.ndim != 4:
        raise ShapeError(f"{op}: expected a 4-D (n, c, h, w) array")
    if x.dtype != np.float32:
        x = x.astype(np.float32)
    return np.ascontiguousarray(x)


def _conv_out_extent(extent: int, k: int, pad: int, stride: int) -> int:
    return (extent + 2 * pad - k) // stride + 1


def _pad_input(x: np.ndarray, mode: str, amount: int) -> np.ndarray:
    if amount == 0:
        return x
    widths = ((0, 0), (0, 0), (amount, amount), (amount, amount))
    if mode == "reflect":
        if amount >= x.shape[2] or amount >= x.shape[3]:
            raise ShapeError(
                f"reflect pad {amount} >= spatial extent {x.shape[2:]}"
            )
        return np.pad(x, widths, mode="reflect")
    return np.pad(x, widths, mode="constant")


def reflect_pad(x: np.ndarray, amount: int) -> np.ndarray:
    """Mirror-pad both spatial axes; the edge pixel is not repeated."""
    x = _require_nchw(x, "reflect_pad")
    if amount < 0:
        raise ShapeError(f"pad must be non-negative, got {amount}")
    return _pad_input(x, "reflect", amount)


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    x = _require_nchw(x, "relu")
    return np.maximum(x, np.float32(0.0))


def upsample_nearest(x: np.ndarray, factor: int) -> np.ndarray:
    """Replicate each pixel into a factor x factor block."""
    x = _require_nchw(x, "upsample_nearest")
    if factor < 1:
        raise ShapeError(f"upsample factor must be >= 1, got {factor}")
    if factor == 1:
        return x.copy()
    return np.repeat(np.repeat(x, factor, axis=2), factor, axis=3)


def instance_stats(x: np.ndarray) -> ChannelStats:
    """Spatial mean and epsilon-stabilized std per sample and channel.

    std = sqrt(biased_variance + EPSILON), so constant channels give
    std = sqrt(EPSILON) rather than zero. Accumulation in float64.
    """
    x = _require_nchw(x, "instance_stats")
    n, c, h, w = x.shape
    if h * w < 1:
        raise ShapeError("instance_stats: empty spatial extent")
    area = h * w
    mean = x.mean(axis=(2, 3), dtype=np.float64)
    sq = np.einsum("nchw,nchw->nc", x, x, dtype=np.float64) / area
    var = np.maximum(sq - mean * mean, 0.0)
    std = np.sqrt(var + EPSILON)
    return ChannelStats(mean.astype(np.float32), std.astype(np.float32))


def _rows_per_tile(k_rows: int, out_w: int, out_h: int) -> int:
    per_row = k_rows * out_w * 4
    return max(1, min(out_h, _TILE_BYTES // max(per_row, 1)))


def conv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Dense 2-D convolution (cross-correlation) with bias.

    Output extents follow floor((dim + 2*pad - k) / stride) + 1. The
    reduction for each output element runs over (in_channel, kh, kw) in
    row-major order inside a single GEMM call.
    """
    x = _require_nchw(x, "conv2d")
    n, c, h, w = x.shape
    o, ci, kh, kw = p.weight.shape
    if ci != c:
        raise ShapeError(f"conv2d: input has {c} channels, weight expects {ci}")
    oh = _conv_out_extent(h, kh, p.pad, p.stride)
    ow = _conv_out_extent(w, kw, p.pad, p.stride)
    if oh < 1 or ow < 1:
        raise ShapeError(f"conv2d: empty output for input {h}x{w}, kernel {kh}x{kw}")

    runtime.pin_blas_single_thread()
    xp = _pad_input(x, p.padding, p.pad)
    out = np.empty((n, o, oh, ow), dtype=np.float32)
    w2d = p.weight.reshape(o, c * kh * kw)
    bias_col = p.bias[:, None]
    stride = p.stride

    pointwise = kh == 1 and kw == 1 and stride == 1
    rows = _rows_per_tile(c * kh * kw, ow, oh)
    n_tiles = (oh + rows - 1) // rows

    def run_tile(idx: int) -> None:
        bi, ti = divmod(idx, n_tiles)
        r0 = ti * rows
        r1 = min(r0 + rows, oh)
        sample = xp[bi]
        if pointwise:
            cols = sample[:, r0:r1, :].reshape(c, (r1 - r0) * ow)
        else:
            sc, sh, sw = sample.strides
            window = as_strided(
                sample[:, r0 * stride :, :],
                shape=(c, kh, kw, r1 - r0, ow),
                strides=(sc, sh, sw, stride * sh, stride * sw),
                writeable=False,
            )
            cols = window.reshape(c * kh * kw, (r1 - r0) * ow)
        tile = np.matmul(w2d, cols)
        tile += bias_col
        out[bi, :, r0:r1, :] = tile.reshape(o, r1 - r0, ow)

    runtime.parallel_tiles(run_tile, n * n_tiles)
    return out


def _depthwise_conv(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Per-channel spatial convolution; weight shape (c, 1, kh, kw).

    Each channel accumulates its kernel taps in row-major (kh, kw) order.
    Padding is materialized one channel plane at a time to keep the peak
    footprint low on ultra-resolution inputs.
    """
    n, c, h, w = x.shape
    o, ci, kh, kw = p.weight.shape
    if o != c or ci != 1:
        raise ShapeError(
            f"depthwise weight must be ({c}, 1, kh, kw), got {p.weight.shape}"
        )
    if p.padding == "reflect" and p.pad > 0 and (p.pad >= h or p.pad >= w):
        raise ShapeError(f"reflect pad {p.pad} >= spatial extent {(h, w)}")
    oh = _conv_out_extent(h, kh, p.pad, p.stride)
    ow = _conv_out_extent(w, kw, p.pad, p.stride)
    if oh < 1 or ow < 1:
        raise ShapeError(f"depthwise: empty output for input {h}x{w}")

    out = np.empty((n, c, oh, ow), dtype=np.float32)
    s = p.stride
    mode = "reflect" if p.padding == "reflect" else "constant"

    def run_channel(idx: int) -> None:
        bi, ci_ = divmod(idx, c)
        plane = x[bi, ci_]
        if p.pad:
            plane = np.pad(plane, p.pad, mode=mode)
        acc = np.zeros((oh, ow), dtype=np.float32)
        tmp = np.empty((oh, ow), dtype=np.float32)
        for ki in range(kh):
            for kj in range(kw):
                view = plane[ki : ki + (oh - 1) * s + 1 : s, kj : kj + (ow - 1) * s + 1 : s]
                np.multiply(view, p.weight[ci_, 0, ki, kj], out=tmp)
                acc += tmp
        acc += p.bias[ci_]
        out[bi, ci_] = acc

    runtime.parallel_tiles(run_channel, n * c)
    return out


def depthwise_separable_conv2d(
    x: np.ndarray, depthwise: ConvParams, pointwise: ConvParams
) -> np.ndarray:
    """Per-channel spatial conv followed by a 1x1 cross-channel mix."""
    x = _require_nchw(x, "depthwise_separable_conv2d")
    if pointwise.weight.shape[2:] != (1, 1):
        raise ShapeError(
            f"pointwise kernel must be 1x1, got {pointwise.weight.shape[2:]}"
        )
    y = _depthwise_conv(x, depthwise)
    return conv2d(y, pointwise)
