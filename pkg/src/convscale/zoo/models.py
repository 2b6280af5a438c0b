"""Baseline architectures expressed as stage lists (all at 224x224x3, 1000 classes)."""

from __future__ import annotations

from convscale.ir import (
    Bottleneck,
    FullyConnected,
    Head,
    MaxPool,
    MBConv,
    NetworkSpec,
    Pooling,
    SeparableConv,
    StageSpec,
    Stem,
)


def _tail(channels: int, num_classes: int = 1000) -> tuple[StageSpec, StageSpec]:
    return StageSpec(Pooling(), 1, channels, 1), StageSpec(FullyConnected(), 1, num_classes, 1)


def efficientnet_b0() -> NetworkSpec:
    # (expansion, kernel, channels, repeats, stride); strides read off the
    # resolution column 224 -> 112 -> 112 -> 56 -> 28 -> 14 -> 14 -> 7 -> 7
    blocks = [
        (1, 3, 16, 1, 1),
        (6, 3, 24, 2, 2),
        (6, 5, 40, 2, 2),
        (6, 3, 80, 3, 2),
        (6, 5, 112, 3, 1),
        (6, 5, 192, 4, 2),
        (6, 3, 320, 1, 1),
    ]
    stages = [StageSpec(Stem(3), 1, 32, 2)]
    stages += [StageSpec(MBConv(e, k, 0.25), n, c, s) for e, k, c, n, s in blocks]
    stages += [StageSpec(Head(), 1, 1280, 1), *_tail(1280)]
    return NetworkSpec("efficientnet-b0", 224, 3, tuple(stages), 1000)


def mobilenet_v1() -> NetworkSpec:
    """MobileNetV1 at width 1.0; each separable block is dw3x3 + pw1x1."""
    blocks = [(64, 1, 1), (128, 2, 2), (256, 2, 2), (512, 6, 2), (1024, 2, 2)]
    stages = [StageSpec(Stem(3), 1, 32, 2)]
    stages += [StageSpec(SeparableConv(3), n, c, s) for c, n, s in blocks]
    stages += list(_tail(1024))
    return NetworkSpec("mobilenet-v1", 224, 3, tuple(stages), 1000)


def mobilenet_v2() -> NetworkSpec:
    blocks = [
        (1, 16, 1, 1),
        (6, 24, 2, 2),
        (6, 32, 3, 2),
        (6, 64, 4, 2),
        (6, 96, 3, 1),
        (6, 160, 3, 2),
        (6, 320, 1, 1),
    ]
    stages = [StageSpec(Stem(3), 1, 32, 2)]
    stages += [StageSpec(MBConv(e, 3, 0.0), n, c, s) for e, c, n, s in blocks]
    stages += [StageSpec(Head(), 1, 1280, 1), *_tail(1280)]
    return NetworkSpec("mobilenet-v2", 224, 3, tuple(stages), 1000)


def resnet50() -> NetworkSpec:
    """ResNet-50 with the stride on the 3x3 conv of each down-sampling block."""
    stages = [StageSpec(Stem(7), 1, 64, 2), StageSpec(MaxPool(3), 1, 64, 2)]
    stages += [
        StageSpec(Bottleneck(3, 4), n, c, s)
        for c, n, s in [(256, 3, 1), (512, 4, 2), (1024, 6, 2), (2048, 3, 2)]
    ]
    stages += list(_tail(2048))
    return NetworkSpec("resnet-50", 224, 3, tuple(stages), 1000)


BASELINES = {
    "efficientnet-b0": efficientnet_b0,
    "mobilenet-v1": mobilenet_v1,
    "mobilenet-v2": mobilenet_v2,
    "resnet-50": resnet50,
}
