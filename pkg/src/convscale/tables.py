"""Recreate the published cost figures: family sizes, single-dimension and
compound scaling of the baselines, and B0 scaling."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

from convscale import zoo
from convscale.analyzer import profile
from convscale.scaling import ScaleTriple, apply_scale
from convscale.zoo.calibration import PUBLISHED_FAMILY, calibrate_phi


@dataclass(frozen=True)
class TableRow:
    table: str
    model: str
    quantity: str
    published: float
    measured: int
    note: str = ""

    @property
    def rel_error(self) -> float:
        return self.measured / self.published - 1


def _flops(spec) -> int:
    return profile(spec).total_flops


def _scaled(spec, d=1.0, w=1.0, r=1.0):
    return apply_scale(spec, ScaleTriple(d, w, r))


def family_rows() -> list[TableRow]:
    rows = []
    family = zoo.efficientnet_family()
    for name in family.names:
        rep = profile(family.build(name))
        p, f = PUBLISHED_FAMILY[name]
        note = "" if name == family.base.name else "calibrated"
        rows.append(TableRow("family", name, "params", p, rep.total_params, note))
        rows.append(TableRow("family", name, "flops", f, rep.total_flops, note))
    rep = profile(zoo.resnet50())
    rows.append(TableRow("family", "resnet-50", "params", 26e6, rep.total_params))
    rows.append(TableRow("family", "resnet-50", "flops", 4.1e9, rep.total_flops))
    return rows


def scaling_rows(include_calibrated: bool = True) -> list[TableRow]:
    v1, v2, r50 = zoo.mobilenet_v1(), zoo.mobilenet_v2(), zoo.resnet50()
    rows = [
        TableRow("scaling", "mobilenet-v1", "flops", 0.6e9, _flops(v1)),
        TableRow("scaling", "mobilenet-v1 w=2", "flops", 2.2e9, _flops(_scaled(v1, w=2))),
        TableRow("scaling", "mobilenet-v1 r=2", "flops", 2.2e9, _flops(_scaled(v1, r=2))),
        TableRow("scaling", "mobilenet-v1 d=1.4 w=1.2 r=1.3", "flops", 2.3e9, _flops(_scaled(v1, 1.4, 1.2, 1.3))),
        TableRow("scaling", "mobilenet-v2", "flops", 0.3e9, _flops(v2)),
        TableRow("scaling", "mobilenet-v2 d=4", "flops", 1.2e9, _flops(_scaled(v2, d=4))),
        TableRow("scaling", "mobilenet-v2 w=2", "flops", 1.1e9, _flops(_scaled(v2, w=2))),
        TableRow("scaling", "mobilenet-v2 r=2", "flops", 1.2e9, _flops(_scaled(v2, r=2))),
        TableRow("scaling", "resnet-50", "flops", 4.1e9, _flops(r50)),
        TableRow("scaling", "resnet-50 d=4", "flops", 16.2e9, _flops(_scaled(r50, d=4))),
        TableRow("scaling", "resnet-50 w=2", "flops", 14.7e9, _flops(_scaled(r50, w=2))),
        TableRow("scaling", "resnet-50 r=2", "flops", 16.4e9, _flops(_scaled(r50, r=2))),
    ]
    if include_calibrated:
        # coefficients for these two rows are unpublished; phi is fitted here
        for base, target in ((v2, 1.3e9), (r50, 16.7e9)):
            phi, flops = calibrate_phi(base, target)
            rows.append(TableRow("scaling", f"{base.name} compound phi={phi:.2f}", "flops", target, flops, "calibrated"))
    return rows


def b0_scaling_rows() -> list[TableRow]:
    b0 = zoo.efficientnet_b0()
    return [
        TableRow("b0-scaling", "efficientnet-b0", "flops", 0.4e9, _flops(b0)),
        TableRow("b0-scaling", "efficientnet-b0 d=4", "flops", 1.8e9, _flops(_scaled(b0, d=4))),
        TableRow("b0-scaling", "efficientnet-b0 w=2", "flops", 1.8e9, _flops(_scaled(b0, w=2))),
        TableRow("b0-scaling", "efficientnet-b0 r=2", "flops", 1.9e9, _flops(_scaled(b0, r=2))),
        TableRow("b0-scaling", "efficientnet-b0 d=1.4 w=1.2 r=1.3", "flops", 1.8e9, _flops(_scaled(b0, 1.4, 1.2, 1.3))),
    ]


def all_rows() -> list[TableRow]:
    return family_rows() + scaling_rows() + b0_scaling_rows()


def _fmt(quantity: str, value: float) -> str:
    return f"{value / 1e6:.2f}M" if quantity == "params" else f"{value / 1e9:.3f}B"


def render_text(rows: list[TableRow], title: Optional[str] = None) -> str:
    lines = [title] if title else []
    width = max(len(r.model) for r in rows)
    current = None
    for r in rows:
        if r.table != current:
            current = r.table
            lines.append(f"[{current}]")
        lines.append(
            f"  {r.model:<{width}}  {r.quantity:<6}  published {_fmt(r.quantity, r.published):>9}  "
            f"measured {_fmt(r.quantity, r.measured):>9}  {r.rel_error:+7.1%}  {r.note}".rstrip()
        )
    return "\n".join(lines) + "\n"


def render_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "model", "quantity", "published", "measured", "rel_error", "note"])
    for r in rows:
        w.writerow([r.table, r.model, r.quantity, repr(r.published), r.measured, f"{r.rel_error:.6f}", r.note])
    return buf.getvalue()
