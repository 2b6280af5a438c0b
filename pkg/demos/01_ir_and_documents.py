"""Build a network spec by hand, validate it, flatten it, save and reload it."""

from convscale import document, zoo
from convscale.ir import Conv, DepthwiseConv, FullyConnected, NetworkSpec, Pooling, StageSpec, Stem, flatten, validate

net = NetworkSpec(
    name="toy",
    input_resolution=64,
    input_channels=3,
    stages=(
        StageSpec(Stem(3), 1, 16, 2),
        StageSpec(Conv(3), 2, 32, 2),
        StageSpec(DepthwiseConv(5), 1, 32, 1),
        StageSpec(Pooling(), 1, 32, 1),
        StageSpec(FullyConnected(), 1, 10, 1),
    ),
    num_classes=10,
)
print("valid:", validate(net).ok)

for layer in flatten(net):
    print(
        f"stage {layer.stage_index}.{layer.layer_index_in_stage} {layer.op_name:<9} "
        f"{layer.in_resolution:>3}->{layer.out_resolution:<3} {layer.in_channels:>3}->{layer.out_channels}"
    )

# Violations are returned, not raised.
broken = net.replace(stages=net.stages[:1] + (StageSpec(Conv(4), 1, 32, 3),) + net.stages[2:])
for v in validate(broken).violations:
    print("violation:", v)

text = document.serialize(net)
assert document.deserialize(text) == net
print(text[:200], "...")

# The zoo ships the same document format.
print(sorted(zoo.BASELINES), "->", zoo.GOLDEN_DIR)
