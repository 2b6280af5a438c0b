"""Calibrate per-variant compound exponents against published model sizes.

The published EfficientNet table gives parameter and FLOPS counts for
B1-B7 but not the exponent or input resolution behind each model. This
module recovers both: for every exponent on a grid it scales the baseline
with the fixed coefficients, measures parameters (resolution-independent),
then bisects for the resolution whose FLOPS land closest to the target.
The pair with the smallest tolerance-normalised error wins; ties go to
the smaller exponent.

Run ``python -m convscale.zoo.calibration`` to regenerate
``efficientnet_family.json``.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from convscale.analyzer import profile
from convscale.ir import NetworkSpec
from convscale.scaling import CompoundConfig, ScaleTriple, apply_scale, scale_compound
from convscale.zoo.family import CONSTANTS_PATH


# Published #Params / #FLOPs for the scaled family (B0 is the unscaled base).
PUBLISHED_FAMILY = {
    "efficientnet-b0": (5.3e6, 0.39e9),
    "efficientnet-b1": (7.8e6, 0.70e9),
    "efficientnet-b2": (9.2e6, 1.0e9),
    "efficientnet-b3": (12e6, 1.8e9),
    "efficientnet-b4": (19e6, 4.2e9),
    "efficientnet-b5": (30e6, 9.9e9),
    "efficientnet-b6": (43e6, 19e9),
    "efficientnet-b7": (66e6, 37e9),
}

COEFFICIENTS = (1.2, 1.1, 1.15)
PARAM_TOLERANCE = 0.03
FLOPS_TOLERANCE = 0.07


def default_phi_grid() -> list[float]:
    return [round(k * 0.01, 2) for k in range(0, 801)]


@dataclass(frozen=True)
class Calibration:
    name: str
    phi: float
    depth: float
    width: float
    input_resolution: int
    params: int
    flops: int
    target_params: float
    target_flops: float

    @property
    def param_error(self) -> float:
        return self.params / self.target_params - 1

    @property
    def flops_error(self) -> float:
        return self.flops / self.target_flops - 1


def _flops_at(spec: NetworkSpec, res: int) -> int:
    return profile(spec.replace(input_resolution=res)).total_flops


def _closest_resolution(spec: NetworkSpec, target_flops: float, lo: int = 16, hi: int = 4096) -> tuple[int, int]:
    # FLOPS are non-decreasing in resolution: find the first res reaching the target.
    while lo < hi:
        mid = (lo + hi) // 2
        if _flops_at(spec, mid) < target_flops:
            lo = mid + 1
        else:
            hi = mid
    candidates = [r for r in (lo - 1, lo) if r >= 1]
    scored = [(abs(_flops_at(spec, r) / target_flops - 1), r) for r in candidates]
    _, best = min(scored)
    return best, _flops_at(spec, best)


def calibrate_variant(
    base: NetworkSpec,
    name: str,
    target_params: float,
    target_flops: float,
    coefficients: Sequence[float] = COEFFICIENTS,
    phi_grid: Optional[Iterable[float]] = None,
) -> Calibration:
    alpha, beta, gamma = coefficients
    phi_grid = default_phi_grid() if phi_grid is None else list(phi_grid)
    seen: dict[tuple, tuple[int, int, int]] = {}
    best = None
    for phi in phi_grid:
        d, w = alpha**phi, beta**phi
        shaped = apply_scale(base, ScaleTriple(d, w, 1.0))
        key = shaped.stages
        if key not in seen:
            params = profile(shaped).total_params
            res, flops = _closest_resolution(shaped, target_flops)
            seen[key] = (params, res, flops)
        params, res, flops = seen[key]
        score = max(abs(params / target_params - 1) / PARAM_TOLERANCE, abs(flops / target_flops - 1) / FLOPS_TOLERANCE)
        if best is None or score < best[0] - 1e-12:
            best = (score, Calibration(name, phi, d, w, res, params, flops, target_params, target_flops))
    return best[1]


def calibrate_family(base: NetworkSpec, coefficients: Sequence[float] = COEFFICIENTS) -> list[Calibration]:
    out = []
    for name, (p, f) in PUBLISHED_FAMILY.items():
        if name == base.name:
            continue
        out.append(calibrate_variant(base, name, p, f, coefficients))
    return out


def calibrate_phi(
    base: NetworkSpec,
    target_flops: float,
    coefficients: Sequence[float] = COEFFICIENTS,
    phi_grid: Optional[Iterable[float]] = None,
) -> tuple[float, int]:
    """Smallest-error exponent for plain compound scaling to ``target_flops``.

    Unlike :func:`calibrate_variant` the resolution follows ``gamma ** phi``.
    """
    alpha, beta, gamma = coefficients
    phi_grid = default_phi_grid() if phi_grid is None else list(phi_grid)
    best = None
    for phi in phi_grid:
        flops = profile(scale_compound(base, CompoundConfig(alpha, beta, gamma, phi))).total_flops
        err = abs(flops / target_flops - 1)
        if best is None or err < best[0] - 1e-12:
            best = (err, phi, flops)
    return best[1], best[2]


def write_constants(calibrations: Sequence[Calibration], path: Path = CONSTANTS_PATH) -> None:
    doc = {
        "version": 1,
        "provenance": (
            "Derived by convscale.zoo.calibration: exponent and input resolution per variant were fitted "
            "to published #Params/#FLOPs; they are not published values."
        ),
        "coefficients": dict(zip(("alpha", "beta", "gamma"), COEFFICIENTS)),
        "variants": [
            {
                "name": c.name,
                "phi": c.phi,
                "input_resolution": c.input_resolution,
                "target_params": c.target_params,
                "target_flops": c.target_flops,
                "calibrated_params": c.params,
                "calibrated_flops": c.flops,
            }
            for c in calibrations
        ],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def main(argv: Optional[Sequence[str]] = None) -> int:
    from convscale.zoo.models import efficientnet_b0

    parser = argparse.ArgumentParser(description="Fit B1-B7 exponents and resolutions to the published table.")
    parser.add_argument("--write", action="store_true", help=f"rewrite {CONSTANTS_PATH.name}")
    args = parser.parse_args(argv)
    cals = calibrate_family(efficientnet_b0())
    for c in cals:
        print(
            f"{c.name}: phi={c.phi:.2f} d={c.depth:.3f} w={c.width:.3f} res={c.input_resolution} "
            f"params={c.params / 1e6:.2f}M ({c.param_error:+.1%}) flops={c.flops / 1e9:.3f}B ({c.flops_error:+.1%})"
        )
    if args.write:
        write_constants(cals)
        print(f"wrote {CONSTANTS_PATH}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
