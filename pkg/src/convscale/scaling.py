"""Depth / width / resolution multipliers and compound scaling."""

from __future__ import annotations

from dataclasses import dataclass

from convscale.ir import (
    CHANNEL_PRESERVING,
    SINGLE_LAYER,
    FullyConnected,
    InvalidSpecError,
    NetworkSpec,
    StageSpec,
    ensure_valid,
    validate,
)
from convscale.rounding import (
    DEFAULT_POLICY,
    RoundingPolicy,
    round_channels,
    round_repeats,
    round_resolution,
)

__all__ = [
    "CompoundConfig",
    "DEFAULT_POLICY",
    "RoundingPolicy",
    "ScaleTriple",
    "apply_scale",
    "predicted_flops_ratio",
    "round_channels",
    "scale_compound",
    "triple_from_compound",
]


@dataclass(frozen=True)
class ScaleTriple:
    d: float = 1.0
    w: float = 1.0
    r: float = 1.0

    def __post_init__(self) -> None:
        for name in ("d", "w", "r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.d, self.w, self.r)


@dataclass(frozen=True)
class CompoundConfig:
    """Per-unit growth rates ``alpha`` (depth), ``beta`` (width), ``gamma``
    (resolution) and the compound exponent ``phi``.

    With ``constrained=True`` the constructor also enforces
    ``|alpha * beta**2 * gamma**2 - 2| <= constraint_tolerance``.
    """

    alpha: float
    beta: float
    gamma: float
    phi: float = 1.0
    constraint_tolerance: float = 0.1
    constrained: bool = False

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if not self.phi >= 0:
            raise ValueError(f"phi must be >= 0, got {self.phi!r}")
        if not self.constraint_tolerance > 0:
            raise ValueError("constraint_tolerance must be positive")
        if self.constrained and not self.satisfies_constraint():
            raise ValueError(
                f"alpha*beta^2*gamma^2 = {self.unit_flops_ratio:.5f} is not within "
                f"{self.constraint_tolerance} of 2"
            )

    @property
    def unit_flops_ratio(self) -> float:
        return self.alpha * self.beta**2 * self.gamma**2

    def satisfies_constraint(self, tolerance: float | None = None) -> bool:
        tol = self.constraint_tolerance if tolerance is None else tolerance
        return abs(self.unit_flops_ratio - 2.0) <= tol + 1e-12

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    def with_phi(self, phi: float) -> "CompoundConfig":
        return CompoundConfig(self.alpha, self.beta, self.gamma, phi, self.constraint_tolerance, self.constrained)


def triple_from_compound(cfg: CompoundConfig) -> ScaleTriple:
    return ScaleTriple(cfg.alpha**cfg.phi, cfg.beta**cfg.phi, cfg.gamma**cfg.phi)


def predicted_flops_ratio(cfg: CompoundConfig) -> float:
    """FLOPS growth the compound rule predicts: ``(alpha * beta^2 * gamma^2) ** phi``."""
    return cfg.unit_flops_ratio**cfg.phi


def apply_scale(spec: NetworkSpec, t: ScaleTriple, p: RoundingPolicy = DEFAULT_POLICY) -> NetworkSpec:
    """Scale every stage of ``spec`` uniformly by ``t``.

    Repeatable stages get ``ceil(d * repeats)`` layers; stem, head, pooling,
    max-pool and classifier stay single layers. Channels of every feature
    stage (stem and head included) become ``round_channels(w * c)``;
    channel-preserving stages follow their input and the classifier keeps the
    class count. Only the input resolution is scaled; downstream resolutions
    follow from the unchanged strides.
    """
    ensure_valid(spec)
    stages: list[StageSpec] = []
    channels = spec.input_channels
    for st in spec.stages:
        op = st.operator
        repeats = st.repeats if isinstance(op, SINGLE_LAYER) else round_repeats(t.d * st.repeats)
        if isinstance(op, CHANNEL_PRESERVING):
            out = channels
        elif isinstance(op, FullyConnected):
            out = st.out_channels
        else:
            out = round_channels(t.w * st.out_channels, p)
        stages.append(StageSpec(op, repeats, out, st.stride))
        channels = out
    scaled = spec.replace(input_resolution=round_resolution(t.r * spec.input_resolution), stages=tuple(stages))
    result = validate(scaled)
    if not result.ok:
        raise InvalidSpecError(result.violations)
    return scaled


def scale_compound(spec: NetworkSpec, cfg: CompoundConfig, p: RoundingPolicy = DEFAULT_POLICY) -> NetworkSpec:
    return apply_scale(spec, triple_from_compound(cfg), p)
