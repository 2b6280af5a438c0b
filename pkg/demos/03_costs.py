"""Per-layer cost report for MobileNetV2, plus the zoo totals."""

from convscale import zoo
from convscale.analyzer import profile

rep = profile(zoo.mobilenet_v2())
print(rep.summary())
print(rep.to_csv().splitlines()[0])
heavy = sorted(rep.per_layer, key=lambda c: c.flops, reverse=True)[:5]
for c in heavy:
    l = c.layer
    print(f"  stage {l.stage_index} layer {l.layer_index_in_stage} {l.op_name}: {c.flops:,} MACs, {c.params:,} params")

for name in zoo.names():
    print(profile(zoo.get(name)).summary())
