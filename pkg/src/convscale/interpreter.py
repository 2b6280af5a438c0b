"""Shape-propagating reference executor with instrumented op counting.

This is the independent check on :mod:`convscale.analyzer`. It never calls
the analyzer or :func:`convscale.ir.flatten`; every layer is lowered to a
small set of primitive kernels (grouped 2-D convolution, pooling, bias and
norm affine terms) and multiply-adds are the product of each kernel's loop
bounds. Output sizes come from explicit "same" padding arithmetic.

No tensor data is ever allocated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from convscale.analyzer import CostReport
from convscale.ir import (
    Bottleneck,
    Conv,
    DepthwiseConv,
    FullyConnected,
    Head,
    MaxPool,
    MBConv,
    NetworkSpec,
    Pooling,
    SeparableConv,
    Stem,
)


class ShapeError(ValueError):
    """Tensor shape does not fit the layer consuming it."""


class StructuralMismatchError(ValueError):
    """Trace and report do not describe the same list of layers."""


@dataclass(frozen=True)
class TensorShape:
    height: int
    width: int
    channels: int

    def __post_init__(self) -> None:
        for name in ("height", "width", "channels"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive int, got {v!r}")

    @property
    def elems(self) -> int:
        return self.height * self.width * self.channels

    def __str__(self) -> str:
        return f"{self.height}x{self.width}x{self.channels}"


@dataclass
class _Counter:
    macs: int = 0
    params: int = 0
    peak: int = 0

    def produced(self, t: TensorShape) -> TensorShape:
        self.peak = max(self.peak, t.elems)
        return t


def _same_out(size: int, kernel: int, stride: int) -> int:
    # TF-style "same": total padding chosen so every input position is covered.
    n_windows = (size + stride - 1) // stride
    pad_total = max((n_windows - 1) * stride + kernel - size, 0)
    return (size + pad_total - kernel) // stride + 1


def _conv2d(
    c: _Counter,
    x: TensorShape,
    out_channels: int,
    kernel: int,
    stride: int = 1,
    groups: int = 1,
    bias: bool = False,
    norm: bool = True,
) -> TensorShape:
    if x.channels % groups or out_channels % groups:
        raise ShapeError(f"groups={groups} does not divide channels {x.channels}->{out_channels}")
    oh = _same_out(x.height, kernel, stride)
    ow = _same_out(x.width, kernel, stride)
    loop_bounds = (oh, ow, out_channels, x.channels // groups, kernel, kernel)
    c.macs += math.prod(loop_bounds)
    weight_shape = (out_channels, x.channels // groups, kernel, kernel)
    c.params += math.prod(weight_shape)
    if bias:
        c.params += out_channels
    if norm:
        c.params += 2 * out_channels  # gamma, beta
    return c.produced(TensorShape(oh, ow, out_channels))


def _depthwise(c: _Counter, x: TensorShape, kernel: int, stride: int) -> TensorShape:
    return _conv2d(c, x, x.channels, kernel, stride, groups=x.channels)


def _global_pool(c: _Counter, x: TensorShape) -> TensorShape:
    return c.produced(TensorShape(1, 1, x.channels))


def _local_pool(c: _Counter, x: TensorShape, kernel: int, stride: int) -> TensorShape:
    return c.produced(TensorShape(_same_out(x.height, kernel, stride), _same_out(x.width, kernel, stride), x.channels))


def _run_layer(c: _Counter, op, x: TensorShape, out_channels: int, stride: int) -> TensorShape:
    if isinstance(op, (Conv, Stem)):
        return _conv2d(c, x, out_channels, op.kernel, stride)
    if isinstance(op, Head):
        return _conv2d(c, x, out_channels, 1, stride)
    if isinstance(op, DepthwiseConv):
        return _depthwise(c, x, op.kernel, stride)
    if isinstance(op, SeparableConv):
        y = _depthwise(c, x, op.kernel, stride)
        return _conv2d(c, y, out_channels, 1)
    if isinstance(op, MBConv):
        mid = op.expanded_channels(x.channels)
        y = x
        if op.expansion_ratio != 1:
            y = _conv2d(c, y, mid, 1)
        y = _depthwise(c, y, op.kernel, stride)
        squeeze = op.se_channels(x.channels)
        if squeeze:
            s = _global_pool(c, y)
            s = _conv2d(c, s, squeeze, 1, bias=True, norm=False)
            _conv2d(c, s, mid, 1, bias=True, norm=False)
            # channel-wise rescale of y is an elementwise multiply: free
        return _conv2d(c, y, out_channels, 1)
    if isinstance(op, Bottleneck):
        mid = op.mid_channels(out_channels)
        y = _conv2d(c, x, mid, 1)
        y = _conv2d(c, y, mid, op.kernel, stride)
        y = _conv2d(c, y, out_channels, 1)
        if stride != 1 or x.channels != out_channels:
            _conv2d(c, x, out_channels, 1, stride)
        return y
    if isinstance(op, MaxPool):
        return _local_pool(c, x, op.kernel, stride)
    if isinstance(op, Pooling):
        return _global_pool(c, x)
    if isinstance(op, FullyConnected):
        if (x.height, x.width) != (1, 1):
            raise ShapeError(f"fc needs a pooled 1x1 input, got {x}")
        return _conv2d(c, x, out_channels, 1, bias=True, norm=False)
    raise ShapeError(f"cannot execute operator {op!r}")


@dataclass(frozen=True)
class LayerRecord:
    stage_index: int
    layer_index: int
    op: str
    input: TensorShape
    output: TensorShape
    macs_counted: int
    params_touched: int
    peak_elems: int


@dataclass(frozen=True)
class ExecutionTrace:
    network: str
    input: TensorShape
    records: tuple[LayerRecord, ...] = field(default_factory=tuple)

    @property
    def total_macs(self) -> int:
        return sum(r.macs_counted for r in self.records)

    @property
    def total_params(self) -> int:
        return sum(r.params_touched for r in self.records)

    @property
    def output(self) -> TensorShape:
        return self.records[-1].output if self.records else self.input

    def shape_before(self, op: str) -> Optional[TensorShape]:
        """Input shape of the first layer with the given op name."""
        for r in self.records:
            if r.op == op:
                return r.input
        return None

    def shape_after(self, op: str) -> Optional[TensorShape]:
        for r in self.records:
            if r.op == op:
                return r.output
        return None

    def to_document(self) -> str:
        doc = {
            "network": self.network,
            "input": str(self.input),
            "total_macs": self.total_macs,
            "total_params": self.total_params,
            "layers": [
                {
                    "stage": r.stage_index,
                    "layer": r.layer_index,
                    "op": r.op,
                    "input": str(r.input),
                    "output": str(r.output),
                    "macs": r.macs_counted,
                    "params": r.params_touched,
                    "peak_elems": r.peak_elems,
                }
                for r in self.records
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def execute(spec: NetworkSpec, input: Optional[TensorShape] = None) -> ExecutionTrace:
    """Push a dummy tensor through ``spec`` and count what every layer touches.

    ``input`` defaults to the spec's own square input. A layer receiving a
    channel count other than what the previous stage declares raises
    :class:`ShapeError` naming that layer.
    """
    if input is None:
        input = TensorShape(spec.input_resolution, spec.input_resolution, spec.input_channels)
    x = input
    declared = spec.input_channels
    records = []
    for si, st in enumerate(spec.stages):
        op = st.operator
        for li in range(st.repeats):
            where = f"stage {si} ({op.op_name}) layer {li}"
            if x.channels != declared:
                raise ShapeError(f"{where}: expects {declared} input channels, got {x.channels}")
            stride = st.stride if li == 0 else 1
            counter = _Counter()
            try:
                y = _run_layer(counter, op, x, st.out_channels, stride)
            except ShapeError as exc:
                raise ShapeError(f"{where}: {exc}") from None
            records.append(LayerRecord(si, li, op.op_name, x, y, counter.macs, counter.params, counter.peak))
            x = y
            # channel-preserving layers pass through what they received
            declared = y.channels if li < st.repeats - 1 else st.out_channels
    return ExecutionTrace(spec.name, input, tuple(records))


@dataclass(frozen=True)
class Divergence:
    position: int
    stage_index: int
    layer_index: int
    quantity: str
    report_value: object
    trace_value: object

    def __str__(self) -> str:
        return (
            f"layer #{self.position} (stage {self.stage_index}, layer {self.layer_index}): "
            f"{self.quantity} report={self.report_value} trace={self.trace_value}"
        )


@dataclass(frozen=True)
class ReconcileResult:
    divergence: Optional[Divergence] = None

    @property
    def equal(self) -> bool:
        return self.divergence is None

    def __str__(self) -> str:
        return "equal" if self.equal else f"divergence at {self.divergence}"


def reconcile(trace: ExecutionTrace, report: CostReport) -> ReconcileResult:
    """Compare trace and report layer by layer; report the first difference."""
    if len(trace.records) != len(report.per_layer):
        raise StructuralMismatchError(
            f"trace has {len(trace.records)} layers, report has {len(report.per_layer)}"
        )
    for pos, (rec, cost) in enumerate(zip(trace.records, report.per_layer)):
        layer = cost.layer
        if (rec.stage_index, rec.layer_index) != (layer.stage_index, layer.layer_index_in_stage):
            raise StructuralMismatchError(
                f"layer #{pos}: trace is stage {rec.stage_index}/{rec.layer_index}, "
                f"report is stage {layer.stage_index}/{layer.layer_index_in_stage}"
            )
        checks = (
            ("output_shape", (layer.out_resolution, layer.out_resolution, layer.out_channels),
             (rec.output.height, rec.output.width, rec.output.channels)),
            ("flops", cost.flops, rec.macs_counted),
            ("params", cost.params, rec.params_touched),
            ("activation_elems", cost.activation_elems, rec.peak_elems),
        )
        for quantity, expected, actual in checks:
            if expected != actual:
                return ReconcileResult(Divergence(pos, rec.stage_index, rec.layer_index, quantity, expected, actual))
    return ReconcileResult()
