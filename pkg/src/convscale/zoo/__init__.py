"""Architecture generators: baselines and the EfficientNet B0-B7 family."""

from __future__ import annotations

from pathlib import Path

from convscale.ir import NetworkSpec
from convscale.zoo.family import FamilySpec, FamilyVariant, dropout_rate, efficientnet_family
from convscale.zoo.models import BASELINES, efficientnet_b0, mobilenet_v1, mobilenet_v2, resnet50

GOLDEN_DIR = Path(__file__).with_name("golden")

__all__ = [
    "GOLDEN_DIR",
    "FamilySpec",
    "FamilyVariant",
    "dropout_rate",
    "efficientnet_b0",
    "efficientnet_family",
    "get",
    "mobilenet_v1",
    "mobilenet_v2",
    "names",
    "resnet50",
]


def names() -> list[str]:
    family = [n for n in efficientnet_family().names if n not in BASELINES]
    return sorted(BASELINES) + family


def get(name: str) -> NetworkSpec:
    if name in BASELINES:
        return BASELINES[name]()
    family = efficientnet_family()
    if name in family.names:
        return family.build(name)
    raise KeyError(f"unknown model {name!r}; known: {', '.join(names())}")
