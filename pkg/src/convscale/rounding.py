"""Integer rounding rules used when multipliers are applied to a network.

Kept separate from :mod:`convscale.scaling` because the IR itself needs
:func:`round_channels` to size MBConv expansion layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_EPS = 1e-9


@dataclass(frozen=True)
class RoundingPolicy:
    """How scaled channel counts, repeats and resolutions become integers.

    ``depth_rounding`` and ``resolution_rounding`` only admit one value each;
    they are kept as fields so reports can state which rule was applied.
    """

    channel_multiple: int = 8
    channel_floor_guard: float = 0.9
    depth_rounding: str = "ceiling"
    resolution_rounding: str = "nearest-int"

    def __post_init__(self) -> None:
        if self.channel_multiple < 1:
            raise ValueError("channel_multiple must be >= 1")
        if not 0 < self.channel_floor_guard <= 1:
            raise ValueError("channel_floor_guard must be in (0, 1]")
        if self.depth_rounding != "ceiling":
            raise ValueError(f"unsupported depth_rounding {self.depth_rounding!r}")
        if self.resolution_rounding != "nearest-int":
            raise ValueError(f"unsupported resolution_rounding {self.resolution_rounding!r}")


DEFAULT_POLICY = RoundingPolicy()


def round_channels(raw: float, policy: RoundingPolicy = DEFAULT_POLICY) -> int:
    """Snap ``raw`` to the nearest admissible multiple of ``policy.channel_multiple``.

    Admissible means positive and at least ``channel_floor_guard * raw``.
    Ties between two equally close multiples go to the larger one.

    >>> round_channels(35.2)
    32
    >>> round_channels(44.0)
    48
    """
    if raw <= 0:
        raise ValueError(f"raw channel count must be positive, got {raw}")
    m = policy.channel_multiple
    k_min = max(1, math.ceil(policy.channel_floor_guard * raw / m - _EPS))
    k_lo = max(k_min, math.floor(raw / m + _EPS))
    lo, hi = k_lo * m, (k_lo + 1) * m
    if lo >= raw - _EPS:
        return lo
    return lo if raw - lo < hi - raw - _EPS else hi


def round_repeats(raw: float) -> int:
    """Ceiling with a float-noise guard, so ``ceil(1.1 * 10)`` stays 11."""
    return max(1, math.ceil(raw - _EPS))


def round_resolution(raw: float) -> int:
    """Nearest integer, halves rounding up."""
    return max(1, math.floor(raw + 0.5 + _EPS))
