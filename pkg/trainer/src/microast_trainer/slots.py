"""Canonical weight-slot map of the engine architecture.

Mirrors the engine's documented tensor naming and shapes (see the
engine README's architecture table); the exporter validates every
state-dict entry against this before writing a container.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelPlan:
    stem: int = 16
    mid: int = 32
    bottleneck: int = 64
    kernel: int = 3
    modulated_convs: int = 4


DEFAULT_PLAN = ChannelPlan()


def weight_slots(plan: ChannelPlan = DEFAULT_PLAN) -> list[tuple[str, tuple[int, ...]]]:
    k = plan.kernel
    st, mid, cb = plan.stem, plan.mid, plan.bottleneck
    slots: list[tuple[str, tuple[int, ...]]] = []

    def conv(name, o, i, kk):
        slots.append((f"{name}.weight", (o, i, kk, kk)))
        slots.append((f"{name}.bias", (o,)))

    def linear(name, o, i):
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
