"""Single-dimension versus compound scaling of B0, and the rounding rules behind them."""

from convscale import zoo
from convscale.analyzer import profile
from convscale.rounding import round_channels
from convscale.scaling import CompoundConfig, ScaleTriple, apply_scale, predicted_flops_ratio, scale_compound

b0 = zoo.efficientnet_b0()
base = profile(b0).total_flops

print("round_channels(35.2) =", round_channels(35.2), " round_channels(44) =", round_channels(44))

for label, t in [("d=4", ScaleTriple(d=4)), ("w=2", ScaleTriple(w=2)), ("r=2", ScaleTriple(r=2)),
                 ("d=1.4 w=1.2 r=1.3", ScaleTriple(1.4, 1.2, 1.3))]:
    s = apply_scale(b0, t)
    print(f"{label:<18} res={s.input_resolution:<4} FLOPS {profile(s).total_flops / 1e9:.3f}B")

cfg = CompoundConfig(1.2, 1.1, 1.15, constrained=True)
for phi in (1, 2, 3):
    c = cfg.with_phi(phi)
    measured = profile(scale_compound(b0, c)).total_flops / base
    print(f"phi={phi}: predicted x{predicted_flops_ratio(c):.3f}, measured x{measured:.3f}")

# ceil(1.2 * n) is why small phi overshoots: every short stage gains a layer.
print([s.repeats for s in scale_compound(b0, cfg).stages])
