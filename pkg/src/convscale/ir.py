"""Staged ConvNet description: operator kinds, stages, networks and layers.

A network is an ordered list of stages. Each stage repeats one operator
``repeats`` times; only the first layer of a stage may change resolution
(stride 2) or channel count. Resolutions follow "same" padding, so a
stride-``s`` layer maps ``h`` to ``ceil(h / s)``.

Values here describe shapes only. There are no weights or tensors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Union

from convscale.rounding import DEFAULT_POLICY, round_channels


# ---------------------------------------------------------------------------
# Operator kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Conv:
    """Regular k x k convolution followed by batch norm."""

    kernel: int = 3
    op_name: ClassVar[str] = "conv"


@dataclass(frozen=True)
class Stem:
    """Input convolution. Scales with width but is never repeated."""

    kernel: int = 3
    op_name: ClassVar[str] = "stem"


@dataclass(frozen=True)
class Head:
    """1x1 feature convolution right before global pooling."""

    op_name: ClassVar[str] = "head"

    @property
    def kernel(self) -> int:
        return 1


@dataclass(frozen=True)
class DepthwiseConv:
    """k x k depthwise convolution + batch norm; preserves channels."""

    kernel: int = 3
    op_name: ClassVar[str] = "depthwise"


@dataclass(frozen=True)
class SeparableConv:
    """Depthwise k x k then pointwise 1x1, each with batch norm, no skip."""

    kernel: int = 3
    op_name: ClassVar[str] = "separable"


@dataclass(frozen=True)
class MBConv:
    """Mobile inverted bottleneck.

    1x1 expansion (skipped when ``expansion_ratio == 1``), k x k depthwise,
    optional squeeze-excitation sized from the block input, 1x1 projection.
    An identity skip exists iff stride is 1 and input and output channels
    match; it is free in every cost model here.
    """

    expansion_ratio: float = 6
    kernel: int = 3
    se_ratio: float = 0.25
    op_name: ClassVar[str] = "mbconv"

    def expanded_channels(self, in_channels: int) -> int:
        if self.expansion_ratio == 1:
            return in_channels
        return round_channels(self.expansion_ratio * in_channels, DEFAULT_POLICY)

    def se_channels(self, in_channels: int) -> int:
        """Squeeze width; 0 when squeeze-excitation is disabled."""
        if self.se_ratio <= 0:
            return 0
        return max(1, math.floor(self.se_ratio * in_channels + 0.5))


@dataclass(frozen=True)
class Bottleneck:
    """ResNet bottleneck: 1x1 reduce, k x k (carries the stride), 1x1 expand.

    A 1x1 projection shortcut is added when the stride is 2 or the channel
    count changes.
    """

    kernel: int = 3
    reduction: int = 4
    op_name: ClassVar[str] = "bottleneck"

    def mid_channels(self, out_channels: int) -> int:
        return max(1, out_channels // self.reduction)

    @staticmethod
    def has_projection(in_channels: int, out_channels: int, stride: int) -> bool:
        return stride != 1 or in_channels != out_channels


@dataclass(frozen=True)
class MaxPool:
    """Local k x k max pooling (ResNet stem); preserves channels."""

    kernel: int = 3
    op_name: ClassVar[str] = "maxpool"


@dataclass(frozen=True)
class Pooling:
    """Global average pooling down to 1x1."""

    op_name: ClassVar[str] = "pooling"


@dataclass(frozen=True)
class FullyConnected:
    """Classifier; its stage's ``out_channels`` is the class count."""

    op_name: ClassVar[str] = "fc"


Operator = Union[
    Conv, Stem, Head, DepthwiseConv, SeparableConv, MBConv, Bottleneck, MaxPool, Pooling, FullyConnected
]

OPERATOR_TYPES: dict[str, type] = {
    cls.op_name: cls
    for cls in (Conv, Stem, Head, DepthwiseConv, SeparableConv, MBConv, Bottleneck, MaxPool, Pooling, FullyConnected)
}

# Kinds whose output channel count is the input channel count.
CHANNEL_PRESERVING = (DepthwiseConv, MaxPool, Pooling)
# Kinds that are structurally one layer and are exempt from depth scaling.
SINGLE_LAYER = (Stem, Head, MaxPool, Pooling, FullyConnected)
KERNEL_KINDS = (Conv, Stem, DepthwiseConv, SeparableConv, MBConv, Bottleneck, MaxPool)


# ---------------------------------------------------------------------------
# Stages, networks, layers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageSpec:
    operator: Operator
    repeats: int = 1
    out_channels: int = 1
    stride: int = 1


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_resolution: int
    input_channels: int
    stages: tuple[StageSpec, ...]
    num_classes: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def feature_stages(self) -> tuple[StageSpec, ...]:
        """Stages before global pooling (the rows of a stage table)."""
        return tuple(s for s in self.stages if not isinstance(s.operator, (MaxPool, Pooling, FullyConnected)))

    def replace(self, **changes) -> "NetworkSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class LayerInstance:
    stage_index: int
    layer_index_in_stage: int
    in_channels: int
    out_channels: int
    in_resolution: int
    out_resolution: int
    operator: Operator
    stride: int

    @property
    def op_name(self) -> str:
        return self.operator.op_name


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    stage_index: Optional[int]
    rule: str
    message: str

    def __str__(self) -> str:
        where = "network" if self.stage_index is None else f"stage {self.stage_index}"
        return f"{where}: {self.rule}: {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}


class InvalidSpecError(ValueError):
    """Raised when an operation needs a valid spec and gets one that is not."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        lines = "\n  ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network spec:\n  {lines}")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_operator(i: int, op, out: list[Violation]) -> None:
    if not isinstance(op, tuple(OPERATOR_TYPES.values())):
        out.append(Violation(i, "unknown operator", f"{op!r} is not an operator kind"))
        return
    if isinstance(op, KERNEL_KINDS):
        k = op.kernel
        if not _is_int(k) or k < 1 or k % 2 == 0:
            out.append(Violation(i, "kernel must be odd and >= 1", f"kernel={k!r}"))
    if isinstance(op, MBConv):
        if not op.expansion_ratio >= 1:
            out.append(Violation(i, "expansion_ratio must be >= 1", f"expansion_ratio={op.expansion_ratio!r}"))
        if not 0 <= op.se_ratio <= 1:
            out.append(Violation(i, "se_ratio must be in [0, 1]", f"se_ratio={op.se_ratio!r}"))
    if isinstance(op, Bottleneck) and (not _is_int(op.reduction) or op.reduction < 1):
        out.append(Violation(i, "reduction must be a positive int", f"reduction={op.reduction!r}"))


def validate(spec: NetworkSpec) -> ValidationResult:
    """Check every structural rule; returns all violations rather than raising."""
    out: list[Violation] = []
    for fname in ("input_resolution", "input_channels", "num_classes"):
        v = getattr(spec, fname)
        if not _is_int(v) or v < 1:
            out.append(Violation(None, f"{fname} must be a positive int", f"{fname}={v!r}"))

    stages = spec.stages
    channels = spec.input_channels
    for i, st in enumerate(stages):
        op = st.operator
        _check_operator(i, op, out)
        if not _is_int(st.repeats) or st.repeats < 1:
            out.append(Violation(i, "repeats must be >= 1", f"repeats={st.repeats!r}"))
        if not _is_int(st.out_channels) or st.out_channels < 1:
            out.append(Violation(i, "out_channels must be >= 1", f"out_channels={st.out_channels!r}"))
        if st.stride not in (1, 2) or isinstance(st.stride, bool):
            out.append(Violation(i, "stride must be 1 or 2", f"stride={st.stride!r}"))
        if isinstance(op, SINGLE_LAYER) and st.repeats != 1:
            out.append(Violation(i, "single-layer stage", f"{op.op_name} stages must have repeats=1"))
        if isinstance(op, (Pooling, FullyConnected)) and st.stride != 1:
            out.append(Violation(i, "tail stride", f"{op.op_name} stages must have stride=1"))
        if isinstance(op, CHANNEL_PRESERVING) and st.out_channels != channels:
            out.append(
                Violation(i, "channel-preserving", f"{op.op_name} must keep {channels} channels, declares {st.out_channels}")
            )
        if isinstance(op, Stem) and i != 0:
            out.append(Violation(i, "stem placement", "stem must be the first stage"))
        if isinstance(op, MaxPool) and i == len(stages) - 1:
            out.append(Violation(i, "tail ordering", "maxpool cannot end the network"))
        channels = st.out_channels

    kinds = [type(s.operator) for s in stages]
    n_pool, n_fc = kinds.count(Pooling), kinds.count(FullyConnected)
    if n_pool != 1 or n_fc != 1:
        out.append(
            Violation(None, "tail ordering", f"need exactly one pooling and one fc stage, found {n_pool} and {n_fc}")
        )
    elif kinds[-2:] != [Pooling, FullyConnected]:
        idx = kinds.index(FullyConnected)
        out.append(Violation(idx, "tail ordering", "network must end with pooling followed by fc"))
    else:
        fc = stages[-1]
        if fc.out_channels != spec.num_classes:
            out.append(
                Violation(len(stages) - 1, "fc width", f"fc declares {fc.out_channels} outputs, num_classes={spec.num_classes}")
            )
    for i, k in enumerate(kinds):
        if k is Head and (i + 1 >= len(kinds) or kinds[i + 1] is not Pooling):
            out.append(Violation(i, "head placement", "head must directly precede pooling"))
    return ValidationResult(tuple(out))


def ensure_valid(spec: NetworkSpec) -> NetworkSpec:
    result = validate(spec)
    if not result.ok:
        raise InvalidSpecError(result.violations)
    return spec


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


def flatten(spec: NetworkSpec) -> list[LayerInstance]:
    """Expand every stage into one :class:`LayerInstance` per repeated layer."""
    ensure_valid(spec)
    layers: list[LayerInstance] = []
    res = spec.input_resolution
    channels = spec.input_channels
    for si, st in enumerate(spec.stages):
        for li in range(st.repeats):
            stride = st.stride if li == 0 else 1
            if isinstance(st.operator, Pooling):
                out_res = 1
            else:
                out_res = -(-res // stride)
            layers.append(
                LayerInstance(
                    stage_index=si,
                    layer_index_in_stage=li,
                    in_channels=channels,
                    out_channels=st.out_channels,
                    in_resolution=res,
                    out_resolution=out_res,
                    operator=st.operator,
                    stride=stride,
                )
            )
            res, channels = out_res, st.out_channels
    return layers
