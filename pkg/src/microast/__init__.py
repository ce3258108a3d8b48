"""microast: CPU arbitrary style transfer at ultra resolution.

A from-scratch inference engine built on plain float32 numpy arrays of
shape (batch, channels, height, width): micro content/style encoders, a
modulator that turns the style feature into feature- and filter-level
modulation signals, and a decoder driven by both.
"""
from .errors import (
    ImageError,
    IntegrityError,
    MicroastError,
    SchemaError,
    ShapeError,
)
from .imaging import ImageRGB, from_tensor, load_image, save_image, to_tensor
from .modulation import (
    ModSignals,
    adain,
    feat_mod,
    filter_mod_direct,
    filter_mod_pseudo,
    flatten_signals,
    modulated_resblock,
)
from .network import (
    DEFAULT_PLAN,
    ChannelPlan,
    NetworkWeights,
    count_params,
    decode,
    derive_signals,
    encode_content,
    encode_style,
    estimate_flops,
    init_weights,
    stylize,
    weight_slots,
)
from .reference import conv2d_oracle
from .tensor_ops import (
    EPSILON,
    ChannelStats,
    ConvParams,
    conv2d,
    depthwise_separable_conv2d,
    instance_stats,
    reflect_pad,
    relu,
    upsample_nearest,
)
from .weights_io import load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "ChannelPlan",
    "ChannelStats",
    "ConvParams",
    "DEFAULT_PLAN",
    "EPSILON",
    "ImageError",
    "ImageRGB",
    "IntegrityError",
    "MicroastError",
    "ModSignals",
    "NetworkWeights",
    "SchemaError",
    "ShapeError",
    "adain",
    "conv2d",
    "conv2d_oracle",
    "count_params",
    "decode",
    "depthwise_separable_conv2d",
    "derive_signals",
    "encode_content",
    "encode_style",
    "estimate_flops",
    "feat_mod",
    "filter_mod_direct",
    "filter_mod_pseudo",
    "flatten_signals",
    "from_tensor",
    "init_weights",
    "instance_stats",
    "load_image",
    "load_weights",
    "modulated_resblock",
    "reflect_pad",
    "relu",
    "save_image",
    "save_weights",
    "stylize",
    "to_tensor",
    "upsample_nearest",
    "weight_slots",
]
