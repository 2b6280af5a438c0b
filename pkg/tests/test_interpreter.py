import dataclasses

import pytest
from hypothesis import given, settings

from convscale import zoo
from convscale.analyzer import profile
from convscale.interpreter import (
    ShapeError,
    StructuralMismatchError,
    TensorShape,
    execute,
    reconcile,
)
from convscale.ir import Conv, FullyConnected, Head, NetworkSpec, Pooling, StageSpec
from convscale.scaling import ScaleTriple, apply_scale
from strategies import valid_specs


def test_b0_shapes():
    t = execute(zoo.efficientnet_b0())
    assert str(t.shape_before("head")) == "7x7x320"
    assert t.shape_after("head") == TensorShape(7, 7, 1280)
    assert t.output == TensorShape(1, 1, 1000)


def test_b0_at_448():
    t = execute(zoo.efficientnet_b0(), TensorShape(448, 448, 3))
    assert t.shape_before("head") == TensorShape(14, 14, 320)


def test_odd_resolution_uses_ceiling():
    t = execute(zoo.efficientnet_b0().replace(input_resolution=225))
    assert t.shape_before("head") == TensorShape(8, 8, 320)


def test_channel_mismatch_raises_at_fc():
    # Pooling is told 1280 but receives the Head's 1536 channels
    spec = NetworkSpec(
        "mismatch",
        32,
        3,
        (
            StageSpec(Conv(3), 1, 16, 1),
            StageSpec(Head(), 1, 1536, 1),
            StageSpec(Pooling(), 1, 1280, 1),
            StageSpec(FullyConnected(), 1, 10, 1),
        ),
        10,
    )
    with pytest.raises(ShapeError, match=r"stage 3 \(fc\) layer 0: expects 1280 input channels, got 1536"):
        execute(spec)


def test_wrong_input_channels():
    with pytest.raises(ShapeError, match="stage 0"):
        execute(zoo.efficientnet_b0(), TensorShape(224, 224, 4))


@pytest.mark.parametrize("name", sorted(zoo.BASELINES) + [f"efficientnet-b{i}" for i in range(1, 8)])
def test_zoo_reconciles(name):
    spec = zoo.get(name)
    result = reconcile(execute(spec), profile(spec))
    assert result.equal, str(result)
    assert str(result) == "equal"


@pytest.mark.parametrize("triple", [(4, 1, 1), (1, 2, 1), (1, 1, 2), (1.4, 1.2, 1.3)])
def test_scaled_reconciles(triple):
    for base in (zoo.efficientnet_b0(), zoo.mobilenet_v1(), zoo.mobilenet_v2(), zoo.resnet50()):
        spec = apply_scale(base, ScaleTriple(*triple))
        assert reconcile(execute(spec), profile(spec)).equal


@given(valid_specs())
@settings(max_examples=60)
def test_random_reconciles(spec):
    result = reconcile(execute(spec), profile(spec))
    assert result.equal, str(result)


def test_perturbed_flops_diverge():
    spec = zoo.efficientnet_b0()
    rep = profile(spec)
    costs = list(rep.per_layer)
    costs[5] = dataclasses.replace(costs[5], flops=costs[5].flops + 1)
    result = reconcile(execute(spec), dataclasses.replace(rep, per_layer=tuple(costs)))
    assert not result.equal
    d = result.divergence
    assert (d.position, d.quantity) == (5, "flops")
    assert d.trace_value == d.report_value - 1
    assert str(result).startswith("divergence at layer #5")


def test_structural_mismatch():
    spec = zoo.efficientnet_b0()
    rep = profile(spec)
    with pytest.raises(StructuralMismatchError):
        reconcile(execute(spec), dataclasses.replace(rep, per_layer=rep.per_layer[:-1]))


def test_trace_document_stable():
    a = execute(zoo.mobilenet_v1()).to_document()
    assert a == execute(zoo.mobilenet_v1()).to_document()
    assert '"layers"' in a and '"macs"' in a
