"""Trainer acceptance: per-criterion PASS/FAIL lines (run with -s).

The toy convergence criterion trains for 200 iterations on the 16/8
synthetic corpus and then drives the engine CLI with the exported
weights, so this module takes a few minutes.
"""
import statistics
from contextlib import contextmanager

import numpy as np
import pytest
import torch
from PIL import Image

from conftest import engine_cli, png_to_torch, synth_content, synth_style
from microast_trainer import (
    StyleTransferMirror,
    TrainingConfig,
    ssc_loss,
    style_loss,
    tiny_standin,
    train,
)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def test_ssc_loss_criterion():
    with criterion("SSC loss: hand case, zero at positives, scale invariance"):
        m_o = torch.tensor([[1.0, 0.0], [3.0, 0.0]])
        m_s = torch.tensor([[0.0, 0.0], [3.0, 0.0]])
        assert abs(float(ssc_loss(m_o, m_s)) - 0.5) <= 1e-9
        torch.manual_seed(0)
        m = torch.randn(4, 16)
        assert float(ssc_loss(m, m.clone())) == 0.0
        a = torch.randn(3, 8, dtype=torch.float64)
        b = torch.randn(3, 8, dtype=torch.float64)
        base = float(ssc_loss(a, b))
        for c in (0.37, 5.0):
            assert float(ssc_loss(c * a, c * b)) == pytest.approx(base, rel=1e-12)


def test_ssc_gradient_criterion():
    with criterion("SSC gradient vs central finite differences (1e-3 rel)"):
        torch.manual_seed(1)
        m_o = torch.randn(2, 10, dtype=torch.float64, requires_grad=True)
        m_s = torch.randn(2, 10, dtype=torch.float64)
        ssc_loss(m_o, m_s).backward()
        analytic = m_o.grad.clone()
        h = 1e-6
        numeric = torch.zeros_like(analytic)
        for i in range(2):
            for j in range(10):
                plus = m_o.detach().clone()
                plus[i, j] += h
                minus = m_o.detach().clone()
                minus[i, j] -= h
                numeric[i, j] = (
                    float(ssc_loss(plus, m_s)) - float(ssc_loss(minus, m_s))
                ) / (2 * h)
        rel = float((analytic - numeric).abs().max() / numeric.abs().max())
        assert rel <= 1e-3, f"relative gradient error {rel}"


def test_toy_convergence_criterion(toy_dataset, tmp_path):
    cdir, sdir = toy_dataset
    out = tmp_path / "toyrun"
    cfg = TrainingConfig(batch_size=4, lr=3e-4, resize=128, crop=128,
                         iterations=200, seed=0)
    loss_net = tiny_standin()
    model = StyleTransferMirror(seed=cfg.seed)
    baseline = tmp_path / "baseline.mast"
    model.export_weights(baseline)

    with criterion("Toy convergence: 200 iters cut mean full loss by >= 30%"):
        history = train(cdir, sdir, out, cfg, loss_net, model=model)
        losses = [h["loss"] for h in history]
        head = statistics.mean(losses[:10])
        tail = statistics.mean(losses[189:200])
        print(f"  mean loss iters 1-10: {head:.3f}, iters 190-200: {tail:.3f} "
              f"({tail / head:.2f}x)")
        assert tail <= 0.7 * head, f"{tail:.3f} > 0.7 * {head:.3f}"

    trained = out / "final.mast"
    with criterion("Exported weights load in the engine"):
        res = engine_cli("inspect", "--weights", str(trained))
        assert res.returncode == 0, res.stderr

    with criterion("Trained weights beat the seed baseline on held-out styles"):
        rng = np.random.default_rng(999)  # unseen by the training corpus
        wins = []
        for pair in range(5):
            content = tmp_path / f"ho_c{pair}.png"
            style = tmp_path / f"ho_s{pair}.png"
            Image.fromarray(synth_content(rng, size=128)).save(content)
            Image.fromarray(synth_style(rng, size=128)).save(style)
            scores = {}
            for tag, weights in (("trained", trained), ("baseline", baseline)):
                out_png = tmp_path / f"ho_{pair}_{tag}.png"
                res = engine_cli(
                    "stylize", "--content", str(content), "--style", str(style),
                    "--weights", str(weights), "--output", str(out_png),
                )
                assert res.returncode == 0, res.stderr
                with torch.no_grad():
                    scores[tag] = float(
                        style_loss(png_to_torch(out_png), png_to_torch(style), loss_net)
                    )
            wins.append(scores["trained"] < scores["baseline"])
            print(f"  pair {pair}: trained {scores['trained']:.3f} "
                  f"vs baseline {scores['baseline']:.3f}")
        assert all(wins), f"trained lost on pairs {[i for i, w in enumerate(wins) if not w]}"
