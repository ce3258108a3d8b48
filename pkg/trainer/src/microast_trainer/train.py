"""Training loop: full objective, JSON-lines logging, .mast checkpoints."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import list_images, sample_batch
from .losses import content_loss, full_loss, ssc_loss, style_loss
from .mirror import StyleTransferMirror
from .perceptual import PerceptualFeatures


@dataclass
class TrainingConfig:
    lambda_c: float = 1.0
    lambda_s: float = 3.0
    lambda_ssc: float = 3.0
    batch_size: int = 8
    lr: float = 1e-4
    resize: int = 512
    crop: int = 256
    iterations: int = 1000
    seed: int = 0
    checkpoint_every: int = 0  # 0: only a final checkpoint

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch size must be >= 2 (the contrastive term "
                             "needs at least one negative)")
        if min(self.lambda_c, self.lambda_s, self.lambda_ssc) < 0:
            raise ValueError("loss weights must be non-negative")
        if self.crop % 4 != 0:
            raise ValueError("crop size must be a multiple of 4")


@dataclass
class Batch:
    """Index-paired content/style tensors, both (n, 3, crop, crop)."""

    content: torch.Tensor
    style: torch.Tensor


class TrainingAborted(RuntimeError):
    def __init__(self, report: dict):
        super().__init__(f"non-finite loss: {report}")
        self.report = report


def train_step(model: StyleTransferMirror, optimizer: torch.optim.Optimizer,
               batch: Batch, cfg: TrainingConfig,
               loss_net: PerceptualFeatures) -> dict:
    """One optimizer step on the full objective; returns the loss report."""
    out = model(batch.content, batch.style)
    lc = content_loss(out, batch.content, loss_net)
    ls = style_loss(out, batch.style, loss_net)
    lssc = ssc_loss(model.flat_signals(out), model.flat_signals(batch.style))
    loss = full_loss(lc, ls, lssc, cfg.lambda_c, cfg.lambda_s, cfg.lambda_ssc)

    report = {
        "loss": float(loss.detach()),
        "content": float(lc.detach()),
        "style": float(ls.detach()),
        "ssc": float(lssc.detach()),
    }
    if not math.isfinite(report["loss"]):
        raise TrainingAborted(report)
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return report


def train(content_dir: str | Path, style_dir: str | Path, out_dir: str | Path,
          cfg: TrainingConfig, loss_net: PerceptualFeatures,
          model: StyleTransferMirror | None = None) -> list[dict]:
    """Run cfg.iterations steps; writes loss.jsonl and .mast checkpoints.

    Returns the per-iteration loss reports.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)

    if model is None:
        model = StyleTransferMirror(seed=cfg.seed)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    content_paths = list_images(content_dir)
    style_paths = list_images(style_dir)

    history: list[dict] = []
    log_path = out_dir / "loss.jsonl"
    with open(log_path, "w") as log:
        for it in range(1, cfg.iterations + 1):
            batch = Batch(
                content=sample_batch(content_paths, cfg.batch_size, cfg.resize, cfg.crop, rng),
                style=sample_batch(style_paths, cfg.batch_size, cfg.resize, cfg.crop, rng),
            )
            report = train_step(model, optimizer, batch, cfg, loss_net)
            report["iter"] = it
            history.append(report)
            log.write(json.dumps(report, sort_keys=True) + "\n")
            if cfg.checkpoint_every and it % cfg.checkpoint_every == 0:
                model.export_weights(out_dir / f"checkpoint_{it:06d}.mast")
    model.export_weights(out_dir / "final.mast")
    return history
