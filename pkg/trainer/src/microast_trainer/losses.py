"""Training objective: content, style, and signal-contrastive terms."""
from __future__ import annotations

import torch

from .mirror import instance_stats
from .perceptual import PerceptualFeatures


def content_loss(out: torch.Tensor, content: torch.Tensor,
                 net: PerceptualFeatures) -> torch.Tensor:
    """Mean-squared distance between deepest-tap features of out and content."""
    return torch.mean((net(out)[-1] - net(content)[-1]) ** 2)


def style_loss(out: torch.Tensor, style: torch.Tensor,
               net: PerceptualFeatures) -> torch.Tensor:
    """Per-tap instance-statistics matching.

    For every tap: L2 norm of the mean difference plus L2 norm of the
    std difference, per sample, summed over taps, averaged over the batch.
    """
    total = torch.zeros((), dtype=out.dtype)
    for f_o, f_s in zip(net(out), net(style)):
        mu_o, sd_o = instance_stats(f_o)
        mu_s, sd_s = instance_stats(f_s)
        total = total + torch.mean(
            torch.linalg.vector_norm(mu_o - mu_s, dim=1)
            + torch.linalg.vector_norm(sd_o - sd_s, dim=1)
        )
    return total


def ssc_loss(signals_out: torch.Tensor, signals_style: torch.Tensor) -> torch.Tensor:
    """Signal-contrastive loss over a batch of flattened signal vectors.

    For each query i: distance to its own style's signals divided by the
    summed distances to every other style's signals. Degenerate zero
    denominators are clamped to 1e-8; exact-match denominators stay exact.
    """
    if signals_out.shape != signals_style.shape:
        raise ValueError("signal batches must have identical shapes")
    n = signals_out.shape[0]
    if n < 2:
        raise ValueError("signal-contrastive loss needs a batch of at least 2")
    # pairwise distances: dist[i, j] = || m_o_i - m_s_j ||
    diff = signals_out[:, None, :] - signals_style[None, :, :]
    dist = torch.linalg.vector_norm(diff, dim=2)
    pos = dist.diagonal()
    neg = dist.sum(dim=1) - pos
    return (pos / neg.clamp_min(1e-8)).sum()


def full_loss(lc: torch.Tensor, ls: torch.Tensor, lssc: torch.Tensor,
              lambda_c: float, lambda_s: float, lambda_ssc: float) -> torch.Tensor:
    return lambda_c * lc + lambda_s * ls + lambda_ssc * lssc
