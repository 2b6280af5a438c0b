import json

import pytest
from hypothesis import given, settings

from convscale import document, zoo
from convscale.document import ParseError, deserialize, serialize
from convscale.ir import validate
from strategies import valid_specs


@pytest.mark.parametrize("name", sorted(zoo.BASELINES))
def test_generator_matches_shipped_golden(name):
    golden = (zoo.GOLDEN_DIR / f"{name}.json").read_text()
    assert serialize(zoo.get(name)) == golden
    assert deserialize(golden) == zoo.get(name)


def test_roundtrip_b0():
    spec = zoo.efficientnet_b0()
    assert deserialize(serialize(spec)) == spec


@given(valid_specs())
@settings(max_examples=1000)
def test_roundtrip_random(spec):
    text = serialize(spec)
    assert deserialize(text) == spec
    assert serialize(deserialize(text)) == text


def _b0_doc():
    return json.loads(serialize(zoo.efficientnet_b0()))


def test_missing_stages():
    doc = _b0_doc()
    del doc["stages"]
    with pytest.raises(ParseError) as exc:
        document.spec_from_dict(doc)
    assert exc.value.path == "stages"


def test_missing_stage_kernel_names_path():
    doc = _b0_doc()
    del doc["stages"][3]["kernel"]
    with pytest.raises(ParseError) as exc:
        document.spec_from_dict(doc)
    assert exc.value.path == "stages[3].kernel"


def test_negative_channels_parse_but_fail_validation():
    doc = _b0_doc()
    doc["stages"][2]["channels"] = -5
    spec = document.spec_from_dict(doc)
    r = validate(spec)
    assert "out_channels must be >= 1" in r.rules()
    assert any(v.stage_index == 2 for v in r.violations)


def test_unknown_key_rejected():
    doc = _b0_doc()
    doc["stages"][0]["dilation"] = 2
    with pytest.raises(ParseError, match="dilation"):
        document.spec_from_dict(doc)


def test_unknown_op():
    doc = _b0_doc()
    doc["stages"][1]["op"] = "transformer"
    with pytest.raises(ParseError) as exc:
        document.spec_from_dict(doc)
    assert exc.value.path == "stages[1].op"


def test_type_error_names_field():
    doc = _b0_doc()
    doc["input_resolution"] = "224"
    with pytest.raises(ParseError) as exc:
        document.spec_from_dict(doc)
    assert exc.value.path == "input_resolution"


def test_bad_json_reports_line():
    with pytest.raises(ParseError) as exc:
        deserialize('{\n  "name": "x",\n  oops\n}')
    assert exc.value.line == 3


def test_wrong_format_tag():
    doc = _b0_doc()
    doc["format"] = "other/2"
    with pytest.raises(ParseError):
        document.spec_from_dict(doc)


def test_format_tag_optional():
    doc = _b0_doc()
    del doc["format"]
    assert document.spec_from_dict(doc) == zoo.efficientnet_b0()


def test_load_dump(tmp_path):
    p = tmp_path / "b0.json"
    document.dump(zoo.efficientnet_b0(), p)
    assert document.load(p) == zoo.efficientnet_b0()
