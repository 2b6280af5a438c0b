from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from convscale.ir import NetworkSpec
from convscale.scaling import ScaleTriple, apply_scale
from convscale.zoo.models import efficientnet_b0

CONSTANTS_PATH = Path(__file__).with_name("efficientnet_family.json")

FIRST_DROPOUT = 0.2
LAST_DROPOUT = 0.5
LAST_INDEX = 7


def dropout_rate(model_index: int) -> float:
    """Dropout for B``model_index``: linear from 0.2 (B0) to 0.5 (B7)."""
    if isinstance(model_index, bool) or not isinstance(model_index, int) or not 0 <= model_index <= LAST_INDEX:
        raise ValueError(f"model_index must be an int in [0, {LAST_INDEX}], got {model_index!r}")
    return FIRST_DROPOUT + (LAST_DROPOUT - FIRST_DROPOUT) * model_index / LAST_INDEX


@dataclass(frozen=True)
class FamilyVariant:
    name: str
    triple: ScaleTriple
    input_resolution: int
    dropout: float
    phi: float = 0.0


@dataclass(frozen=True)
class FamilySpec:
    base: NetworkSpec
    variants: tuple[FamilyVariant, ...]

    def __post_init__(self) -> None:
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ValueError(f"variant names must be unique: {names}")
        for v in self.variants:
            if not 0 <= v.dropout <= 1:
                raise ValueError(f"{v.name}: dropout {v.dropout} outside [0, 1]")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variants]

    def variant(self, name: str) -> FamilyVariant:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(name)

    def build(self, name: str) -> NetworkSpec:
        v = self.variant(name)
        spec = apply_scale(self.base, v.triple)
        assert spec.input_resolution == v.input_resolution, (spec.input_resolution, v.input_resolution)
        return spec.replace(name=v.name)


@lru_cache(maxsize=1)
def _load_constants() -> dict:
    return json.loads(CONSTANTS_PATH.read_text(encoding="utf-8"))


def efficientnet_family() -> FamilySpec:
    """B0 plus the calibrated B1-B7 variants from ``efficientnet_family.json``."""
    base = efficientnet_b0()
    consts = _load_constants()
    alpha, beta = consts["coefficients"]["alpha"], consts["coefficients"]["beta"]
    variants = [FamilyVariant(base.name, ScaleTriple(1.0, 1.0, 1.0), base.input_resolution, dropout_rate(0), 0.0)]
    for i, entry in enumerate(consts["variants"], start=1):
        phi, res = entry["phi"], entry["input_resolution"]
        triple = ScaleTriple(alpha**phi, beta**phi, res / base.input_resolution)
        variants.append(FamilyVariant(entry["name"], triple, res, dropout_rate(i), phi))
    return FamilySpec(base, tuple(variants))
