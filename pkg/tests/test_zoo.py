import json

import pytest

from convscale import zoo
from convscale.analyzer import profile
from convscale.ir import MBConv, validate
from convscale.zoo.calibration import PUBLISHED_FAMILY, calibrate_variant
from convscale.zoo.family import CONSTANTS_PATH, FamilySpec, FamilyVariant, dropout_rate


def test_b0_table():
    b0 = zoo.efficientnet_b0()
    feats = b0.feature_stages
    assert [s.out_channels for s in feats] == [32, 16, 24, 40, 80, 112, 192, 320, 1280]
    assert [s.repeats for s in feats] == [1, 1, 2, 2, 3, 3, 4, 1, 1]
    assert [s.stride for s in feats] == [2, 1, 2, 2, 2, 1, 2, 1, 1]
    mb = [s.operator for s in feats if isinstance(s.operator, MBConv)]
    assert [m.kernel for m in mb] == [3, 3, 5, 3, 5, 5, 3]
    assert [m.expansion_ratio for m in mb] == [1, 6, 6, 6, 6, 6, 6]
    assert b0.input_resolution == 224


def test_names_and_get():
    names = zoo.names()
    assert names[:4] == ["efficientnet-b0", "mobilenet-v1", "mobilenet-v2", "resnet-50"]
    assert names[4:] == [f"efficientnet-b{i}" for i in range(1, 8)]
    for n in names:
        assert validate(zoo.get(n)).ok
        assert zoo.get(n).name == n
    with pytest.raises(KeyError, match="known"):
        zoo.get("vgg-16")


def test_dropout_rule():
    assert dropout_rate(0) == pytest.approx(0.2)
    assert dropout_rate(7) == pytest.approx(0.5)
    assert dropout_rate(1) == pytest.approx(0.2 + 0.3 / 7)
    assert dropout_rate(3) == pytest.approx(0.328571, abs=1e-6)
    for bad in (-1, 8, 1.5, True):
        with pytest.raises(ValueError):
            dropout_rate(bad)


def test_family_dropout_monotone():
    fam = zoo.efficientnet_family()
    drops = [v.dropout for v in fam.variants]
    assert drops == sorted(drops)
    assert fam.variant("efficientnet-b7").dropout == pytest.approx(0.5)


def test_b0_variant_is_base():
    fam = zoo.efficientnet_family()
    assert fam.build("efficientnet-b0") == zoo.efficientnet_b0()


def test_family_monotone_costs():
    fam = zoo.efficientnet_family()
    reps = [profile(fam.build(n)) for n in fam.names]
    for a, b in zip(reps, reps[1:]):
        assert a.total_params < b.total_params
        assert a.total_flops < b.total_flops
    res = [v.input_resolution for v in fam.variants]
    assert res == sorted(res)


def test_shipped_constants_reproduce():
    consts = json.loads(CONSTANTS_PATH.read_text())
    fam = zoo.efficientnet_family()
    assert "not published" in consts["provenance"]
    for entry in consts["variants"]:
        rep = profile(fam.build(entry["name"]))
        assert rep.total_params == entry["calibrated_params"]
        assert rep.total_flops == entry["calibrated_flops"]


def test_calibration_recovers_b4_on_coarse_grid():
    # rerun the fit near the shipped exponent and check it lands in tolerance
    b0 = zoo.efficientnet_b0()
    p, f = PUBLISHED_FAMILY["efficientnet-b4"]
    cal = calibrate_variant(b0, "efficientnet-b4", p, f, phi_grid=[3.3 + 0.02 * k for k in range(20)])
    assert abs(cal.param_error) <= 0.03
    assert abs(cal.flops_error) <= 0.07


def test_family_rejects_duplicates():
    v = FamilyVariant("x", zoo.efficientnet_family().variants[0].triple, 224, 0.2)
    with pytest.raises(ValueError):
        FamilySpec(zoo.efficientnet_b0(), (v, v))


def test_resnet_and_mobilenet_shapes():
    r50 = zoo.resnet50()
    assert [s.repeats for s in r50.stages if s.operator.op_name == "bottleneck"] == [3, 4, 6, 3]
    v1 = zoo.mobilenet_v1()
    assert sum(s.repeats for s in v1.stages if s.operator.op_name == "separable") == 13
    v2 = zoo.mobilenet_v2()
    assert sum(s.repeats for s in v2.stages if s.operator.op_name == "mbconv") == 17
