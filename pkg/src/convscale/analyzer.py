"""Closed-form parameter, FLOPS and activation counts.

Conventions:

* one fused multiply-add is one FLOP; only conv, FC and squeeze-excitation
  multiplies are counted (batch norm, activations, pooling and skip-adds
  are free);
* conv layers carry no bias but a batch-norm affine pair (2 params per
  output channel); running statistics are not parameters; FC and SE
  transforms carry biases;
* ``activation_elems`` of a layer is the largest tensor it produces, which
  for MBConv and bottleneck blocks can be an internal intermediate.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

from convscale.ir import (
    Bottleneck,
    Conv,
    DepthwiseConv,
    FullyConnected,
    Head,
    LayerInstance,
    MaxPool,
    MBConv,
    NetworkSpec,
    Pooling,
    SeparableConv,
    Stem,
    flatten,
)

BYTES_PER_ELEMENT = 4

CSV_COLUMNS = ("stage", "layer", "op", "in_res", "out_res", "c_in", "c_out", "params", "flops", "activation_elems")


def _conv_flops(h_out: int, c_in: int, c_out: int, k: int) -> int:
    return h_out * h_out * c_out * k * k * c_in


def _dw_flops(h_out: int, c: int, k: int) -> int:
    return h_out * h_out * c * k * k


def _conv_params(c_in: int, c_out: int, k: int) -> int:
    return k * k * c_in * c_out + 2 * c_out


def _dw_params(c: int, k: int) -> int:
    return k * k * c + 2 * c


def flops_of_layer(layer: LayerInstance) -> int:
    op = layer.operator
    ci, co = layer.in_channels, layer.out_channels
    hi, ho = layer.in_resolution, layer.out_resolution
    if isinstance(op, (Conv, Stem)):
        return _conv_flops(ho, ci, co, op.kernel)
    if isinstance(op, Head):
        return _conv_flops(ho, ci, co, 1)
    if isinstance(op, DepthwiseConv):
        return _dw_flops(ho, ci, op.kernel)
    if isinstance(op, SeparableConv):
        return _dw_flops(ho, ci, op.kernel) + _conv_flops(ho, ci, co, 1)
    if isinstance(op, MBConv):
        mid = op.expanded_channels(ci)
        se = op.se_channels(ci)
        total = 0
        if op.expansion_ratio != 1:
            total += _conv_flops(hi, ci, mid, 1)
        total += _dw_flops(ho, mid, op.kernel)
        total += 2 * mid * se
        total += _conv_flops(ho, mid, co, 1)
        return total
    if isinstance(op, Bottleneck):
        mid = op.mid_channels(co)
        total = _conv_flops(hi, ci, mid, 1) + _conv_flops(ho, mid, mid, op.kernel) + _conv_flops(ho, mid, co, 1)
        if op.has_projection(ci, co, layer.stride):
            total += _conv_flops(ho, ci, co, 1)
        return total
    if isinstance(op, FullyConnected):
        return ci * co
    if isinstance(op, (Pooling, MaxPool)):
        return 0
    raise TypeError(f"no cost rule for {op!r}")


def params_of_layer(layer: LayerInstance) -> int:
    op = layer.operator
    ci, co = layer.in_channels, layer.out_channels
    if isinstance(op, (Conv, Stem)):
        return _conv_params(ci, co, op.kernel)
    if isinstance(op, Head):
        return _conv_params(ci, co, 1)
    if isinstance(op, DepthwiseConv):
        return _dw_params(ci, op.kernel)
    if isinstance(op, SeparableConv):
        return _dw_params(ci, op.kernel) + _conv_params(ci, co, 1)
    if isinstance(op, MBConv):
        mid = op.expanded_channels(ci)
        se = op.se_channels(ci)
        total = 0
        if op.expansion_ratio != 1:
            total += _conv_params(ci, mid, 1)
        total += _dw_params(mid, op.kernel)
        if se:
            total += 2 * mid * se + se + mid
        total += _conv_params(mid, co, 1)
        return total
    if isinstance(op, Bottleneck):
        mid = op.mid_channels(co)
        total = _conv_params(ci, mid, 1) + _conv_params(mid, mid, op.kernel) + _conv_params(mid, co, 1)
        if op.has_projection(ci, co, layer.stride):
            total += _conv_params(ci, co, 1)
        return total
    if isinstance(op, FullyConnected):
        return ci * co + co
    if isinstance(op, (Pooling, MaxPool)):
        return 0
    raise TypeError(f"no cost rule for {op!r}")


def activation_of_layer(layer: LayerInstance) -> int:
    op = layer.operator
    ci, co = layer.in_channels, layer.out_channels
    hi, ho = layer.in_resolution, layer.out_resolution
    out = ho * ho * co
    if isinstance(op, SeparableConv):
        return max(ho * ho * ci, out)
    if isinstance(op, MBConv):
        mid = op.expanded_channels(ci)
        sizes = [ho * ho * mid, out]
        if op.expansion_ratio != 1:
            sizes.append(hi * hi * mid)
        return max(sizes)
    if isinstance(op, Bottleneck):
        mid = op.mid_channels(co)
        return max(hi * hi * mid, ho * ho * mid, out)
    return out


@dataclass(frozen=True)
class LayerCost:
    layer: LayerInstance
    params: int
    flops: int
    activation_elems: int


@dataclass(frozen=True)
class CostReport:
    network: str
    input_elems: int
    per_layer: tuple[LayerCost, ...]
    total_params: int
    total_flops: int
    peak_activation_elems: int
    memory_estimate_bytes: int

    def to_rows(self) -> list[dict]:
        rows = []
        for c in self.per_layer:
            l = c.layer
            rows.append(
                {
                    "stage": l.stage_index,
                    "layer": l.layer_index_in_stage,
                    "op": l.op_name,
                    "in_res": l.in_resolution,
                    "out_res": l.out_resolution,
                    "c_in": l.in_channels,
                    "c_out": l.out_channels,
                    "params": c.params,
                    "flops": c.flops,
                    "activation_elems": c.activation_elems,
                }
            )
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.to_rows())
        return buf.getvalue()

    def to_document(self) -> str:
        doc = {
            "network": self.network,
            "total_params": self.total_params,
            "total_flops": self.total_flops,
            "peak_activation_elems": self.peak_activation_elems,
            "memory_estimate_bytes": self.memory_estimate_bytes,
            "layers": self.to_rows(),
        }
        return json.dumps(doc, indent=2) + "\n"

    def summary(self) -> str:
        return (
            f"{self.network}: {self.total_params / 1e6:.2f}M params, "
            f"{self.total_flops / 1e9:.3f}B FLOPS, peak activation {self.peak_activation_elems} elems, "
            f"memory ~{self.memory_estimate_bytes / 2**20:.1f} MiB"
        )


def memory_estimate(per_layer: Sequence[LayerCost], input_elems: int) -> int:
    """Memory proxy in bytes: every parameter plus the single largest tensor."""
    params = sum(c.params for c in per_layer)
    peak = max([input_elems] + [c.activation_elems for c in per_layer])
    return BYTES_PER_ELEMENT * (params + peak)


def profile(spec: NetworkSpec) -> CostReport:
    layers = flatten(spec)
    costs = tuple(
        LayerCost(layer=l, params=params_of_layer(l), flops=flops_of_layer(l), activation_elems=activation_of_layer(l))
        for l in layers
    )
    input_elems = spec.input_resolution**2 * spec.input_channels
    return CostReport(
        network=spec.name,
        input_elems=input_elems,
        per_layer=costs,
        total_params=sum(c.params for c in costs),
        total_flops=sum(c.flops for c in costs),
        peak_activation_elems=max([input_elems] + [c.activation_elems for c in costs]),
        memory_estimate_bytes=memory_estimate(costs, input_elems),
    )
