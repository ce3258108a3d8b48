"""Brute-force convolution oracle for tests.

Same contract as tensor_ops.conv2d, written as the most naive scalar
loop nest so the fast path has something independent to agree with.
Only meant for tiny tensors.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .tensor_ops import ConvParams, _conv_out_extent, _pad_input, _require_nchw


def conv2d_oracle(x: np.ndarray, p: ConvParams, groups: int = 1) -> np.ndarray:
    """Seven nested scalar loops; float64 accumulation, float32 result."""
    x = _require_nchw(x, "conv2d_oracle")
    n, c, h, w = x.shape
    o, ci, kh, kw = p.weight.shape
    if c != ci * groups or o % groups != 0:
        raise ShapeError(
            f"conv2d_oracle: {c} input channels incompatible with weight "
            f"{p.weight.shape} and groups={groups}"
        )
    oh = _conv_out_extent(h, kh, p.pad, p.stride)
    ow = _conv_out_extent(w, kw, p.pad, p.stride)
    if oh < 1 or ow < 1:
        raise ShapeError(f"conv2d_oracle: empty output for input {h}x{w}")

    xp = _pad_input(x, p.padding, p.pad)
    out = np.empty((n, o, oh, ow), dtype=np.float32)
    o_per_g = o // groups
    for bi in range(n):
        for oc in range(o):
            g = oc // o_per_g
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for ic in range(ci):
                        for ki in range(kh):
                            for kj in range(kw):
                                acc += float(p.weight[oc, ic, ki, kj]) * float(
                                    xp[bi, g * ci + ic, i * p.stride + ki, j * p.stride + kj]
                                )
                    out[bi, oc, i, j] = np.float32(acc + float(p.bias[oc]))
    return out
