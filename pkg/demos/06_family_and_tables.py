"""The calibrated B0-B7 family and the reproduced cost tables."""

from convscale import tables, zoo
from convscale.analyzer import profile

fam = zoo.efficientnet_family()
for v in fam.variants:
    rep = profile(fam.build(v.name))
    print(f"{v.name}: phi={v.phi:.2f} res={v.input_resolution} dropout={v.dropout:.3f} "
          f"{rep.total_params / 1e6:.2f}M params {rep.total_flops / 1e9:.2f}B FLOPS")

print(tables.render_text(tables.all_rows()))
