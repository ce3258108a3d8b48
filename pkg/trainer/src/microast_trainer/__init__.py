"""Training harness for the microast engine.

Optimizes the full objective (content + style + signal-contrastive) on a
differentiable mirror of the engine architecture and exports weights as
.mast containers, the engine's native format. The engine itself is only
ever touched through that file format and its command line.
"""
from .losses import content_loss, full_loss, ssc_loss, style_loss
from .mast_io import ContainerError, SchemaError, read_mast, write_mast
from .mirror import StyleTransferMirror, feat_mod, instance_stats
from .perceptual import PerceptualFeatures, load_pretrained, tiny_standin
from .slots import DEFAULT_PLAN, ChannelPlan, weight_slots
from .train import Batch, TrainingAborted, TrainingConfig, train, train_step

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "ChannelPlan",
    "ContainerError",
    "DEFAULT_PLAN",
    "PerceptualFeatures",
    "SchemaError",
    "StyleTransferMirror",
    "TrainingAborted",
    "TrainingConfig",
    "content_loss",
    "feat_mod",
    "full_loss",
    "instance_stats",
    "load_pretrained",
    "read_mast",
    "ssc_loss",
    "style_loss",
    "tiny_standin",
    "train",
    "train_step",
    "weight_slots",
    "write_mast",
]
