"""Staged ConvNet IR, compound scaling and exact static cost analysis."""

from convscale.analyzer import CostReport, LayerCost, profile
from convscale.document import ParseError, deserialize, serialize
from convscale.interpreter import ExecutionTrace, TensorShape, execute, reconcile
from convscale.ir import (
    InvalidSpecError,
    LayerInstance,
    NetworkSpec,
    StageSpec,
    ValidationResult,
    flatten,
    validate,
)
from convscale.rounding import RoundingPolicy, round_channels
from convscale.scaling import CompoundConfig, ScaleTriple, apply_scale, predicted_flops_ratio, triple_from_compound

__version__ = "0.1.0"

__all__ = [
    "CompoundConfig",
    "CostReport",
    "ExecutionTrace",
    "InvalidSpecError",
    "LayerCost",
    "LayerInstance",
    "NetworkSpec",
    "ParseError",
    "RoundingPolicy",
    "ScaleTriple",
    "StageSpec",
    "TensorShape",
    "ValidationResult",
    "apply_scale",
    "deserialize",
    "execute",
    "flatten",
    "predicted_flops_ratio",
    "profile",
    "reconcile",
    "round_channels",
    "serialize",
    "triple_from_compound",
    "validate",
]
