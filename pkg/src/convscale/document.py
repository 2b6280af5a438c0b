"""JSON document format for :class:`~convscale.ir.NetworkSpec`.

Canonical layout::

    {
      "format": "convscale.network/1",
      "name": "efficientnet-b0",
      "input_resolution": 224,
      "input_channels": 3,
      "num_classes": 1000,
      "stages": [
        {"op": "stem", "kernel": 3, "repeats": 1, "channels": 32, "stride": 2},
        {"op": "mbconv", "kernel": 3, "expansion": 1, "se_ratio": 0.25,
         "repeats": 1, "channels": 16, "stride": 1},
        ...
      ]
    }

Operator parameters per ``op``:

==============  ===========================================
op              extra keys
==============  ===========================================
conv            kernel
stem            kernel
head            (none; always 1x1)
depthwise       kernel
separable       kernel
mbconv          kernel, expansion, se_ratio
bottleneck      kernel, reduction
maxpool         kernel
pooling         (none)
fc              (none)
==============  ===========================================

``format`` is optional on input. Unknown keys are rejected. Parsing only
checks types and structure; value rules (odd kernels, positive channels...)
are left to :func:`convscale.ir.validate`.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from convscale.ir import (
    Bottleneck,
    Conv,
    DepthwiseConv,
    FullyConnected,
    Head,
    MaxPool,
    MBConv,
    NetworkSpec,
    OPERATOR_TYPES,
    Pooling,
    SeparableConv,
    StageSpec,
    Stem,
)

FORMAT_TAG = "convscale.network/1"

_TOP_KEYS = ("name", "input_resolution", "input_channels", "num_classes", "stages")
_STAGE_COMMON = ("op", "repeats", "channels", "stride")
_OP_KEYS: dict[str, tuple[str, ...]] = {
    "conv": ("kernel",),
    "stem": ("kernel",),
    "head": (),
    "depthwise": ("kernel",),
    "separable": ("kernel",),
    "mbconv": ("kernel", "expansion", "se_ratio"),
    "bottleneck": ("kernel", "reduction"),
    "maxpool": ("kernel",),
    "pooling": (),
    "fc": (),
}


class ParseError(ValueError):
    """Malformed document. ``path`` is a field path like ``stages[3].kernel``."""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(path)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _operator_fields(op) -> dict[str, Any]:
    if isinstance(op, MBConv):
        return {"kernel": op.kernel, "expansion": op.expansion_ratio, "se_ratio": op.se_ratio}
    if isinstance(op, Bottleneck):
        return {"kernel": op.kernel, "reduction": op.reduction}
    if isinstance(op, (Conv, Stem, DepthwiseConv, SeparableConv, MaxPool)):
        return {"kernel": op.kernel}
    return {}


def spec_to_dict(spec: NetworkSpec) -> dict[str, Any]:
    stages = []
    for st in spec.stages:
        d: dict[str, Any] = {"op": st.operator.op_name}
        d.update(_operator_fields(st.operator))
        d.update(repeats=st.repeats, channels=st.out_channels, stride=st.stride)
        stages.append(d)
    return {
        "format": FORMAT_TAG,
        "name": spec.name,
        "input_resolution": spec.input_resolution,
        "input_channels": spec.input_channels,
        "num_classes": spec.num_classes,
        "stages": stages,
    }


def serialize(spec: NetworkSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def _require(obj: dict, key: str, kind, path: str):
    if key not in obj:
        raise ParseError(f"missing required field {key!r}", path=f"{path}{key}")
    value = obj[key]
    p = f"{path}{key}"
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"expected an integer, got {value!r}", path=p)
    elif kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"expected a number, got {value!r}", path=p)
    elif kind is str:
        if not isinstance(value, str):
            raise ParseError(f"expected a string, got {value!r}", path=p)
    elif kind is list:
        if not isinstance(value, list):
            raise ParseError(f"expected a list, got {type(value).__name__}", path=p)
    return value


def _build_operator(op: str, d: dict, path: str):
    get = lambda key, kind: _require(d, key, kind, path)  # noqa: E731
    if op == "mbconv":
        return MBConv(expansion_ratio=get("expansion", float), kernel=get("kernel", int), se_ratio=get("se_ratio", float))
    if op == "bottleneck":
        return Bottleneck(kernel=get("kernel", int), reduction=get("reduction", int))
    cls = OPERATOR_TYPES[op]
    if cls in (Head, Pooling, FullyConnected):
        return cls()
    return cls(kernel=get("kernel", int))


def spec_from_dict(doc: Any) -> NetworkSpec:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    fmt = doc.get("format", FORMAT_TAG)
    if fmt != FORMAT_TAG:
        raise ParseError(f"unsupported format {fmt!r}, expected {FORMAT_TAG!r}", path="format")
    extra = set(doc) - set(_TOP_KEYS) - {"format"}
    if extra:
        raise ParseError(f"unknown field {sorted(extra)[0]!r}", path=sorted(extra)[0])
    name = _require(doc, "name", str, "")
    res = _require(doc, "input_resolution", int, "")
    cin = _require(doc, "input_channels", int, "")
    ncls = _require(doc, "num_classes", int, "")
    raw_stages = _require(doc, "stages", list, "")

    stages = []
    for i, d in enumerate(raw_stages):
        path = f"stages[{i}]."
        if not isinstance(d, dict):
            raise ParseError("stage must be an object", path=f"stages[{i}]")
        op = _require(d, "op", str, path)
        if op not in _OP_KEYS:
            raise ParseError(f"unknown op {op!r}; expected one of {sorted(_OP_KEYS)}", path=f"{path}op")
        allowed = set(_STAGE_COMMON) | set(_OP_KEYS[op])
        extra = set(d) - allowed
        if extra:
            key = sorted(extra)[0]
            raise ParseError(f"field {key!r} not allowed for op {op!r}", path=f"{path}{key}")
        stages.append(
            StageSpec(
                operator=_build_operator(op, d, path),
                repeats=_require(d, "repeats", int, path),
                out_channels=_require(d, "channels", int, path),
                stride=_require(d, "stride", int, path),
            )
        )
    return NetworkSpec(name=name, input_resolution=res, input_channels=cin, stages=tuple(stages), num_classes=ncls)


def deserialize(text: str) -> NetworkSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return spec_from_dict(doc)


def load(path) -> NetworkSpec:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


def dump(spec: NetworkSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(spec))
