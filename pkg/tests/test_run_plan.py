"""Plan parsing, validation errors and round trips."""

import copy
import json

import pytest

from hypobound.configs.run_plan import config_hash, parse_config, plan_from_dict, read_config_hash
from hypobound.core.errors import ConfigParseError, ConfigValidationError
from hypobound.core.reports import InequalityId, ReportFormat

BASE = {
    "model": {"name": "k", "r": 1, "dims": [1, 1], "A0": [1.0], "blocks": [[1.0]]},
    "mc": {"n": 1000, "seed": 3},
    "testfns": [{"id": "f", "kind": "logistic", "params": {"a": [1.0, 0.0], "delta": 0.5}}],
    "grid": [{"t": 1.0, "x": [0.0, 0.0], "y": [0.5, 0.0]}],
    "suites": [{"inequality": "be"}],
}


def _plan(**changes):
    data = copy.deepcopy(BASE)
    for dotted, value in changes.items():
        target = data
        *path, last = dotted.split("__")
        for part in path:
            target = target[int(part)] if part.isdigit() else target[part]
        target[last] = value
    return data


@pytest.mark.parametrize("name", ["kolmogorov.toml", "equalities.toml", "iterated.toml"])
def test_bundled_plans_are_valid(data_dir, name):
    plan = parse_config(data_dir / name)
    assert plan.structure().N == len(plan.grid[0].x)
    assert plan.suites


def test_bundled_kolmogorov_plan(data_dir):
    plan = parse_config(data_dir / "kolmogorov.toml")
    assert plan.model.dims == [1, 1]
    assert plan.mc.seed == 20240601
    assert plan.suites[0].inequality == "all"
    assert plan.output.formats == [ReportFormat.JSON, ReportFormat.CSV, ReportFormat.SVG]


def test_defaults():
    plan = plan_from_dict(BASE)
    assert plan.mc.sigma_level == 3.0
    assert plan.suites[0].inequality is InequalityId.BE
    assert plan.suites[0].powers == [2.0]
    assert plan.output.formats == [ReportFormat.JSON, ReportFormat.CSV]
    assert "formats" not in plan.output.model_fields_set
    assert plan.jobs is None


def test_non_monotone_dims():
    data = _plan(model__dims=[1, 2], model__blocks=[[1.0, 0.0]])
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(data)
    assert info.value.field == "model"
    assert "NotMonotone" in info.value.reason


def test_missing_seed_names_field():
    data = copy.deepcopy(BASE)
    del data["mc"]["seed"]
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(data)
    assert info.value.field == "mc.seed"


def test_unknown_key_rejected():
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(_plan(model__bogus=1))
    assert info.value.field == "model.bogus"


@pytest.mark.parametrize(
    ("changes", "field"),
    [
        ({"grid__0__x": [0.0, 0.0, 0.0]}, "grid[0].x"),
        ({"grid__0__y": [0.0]}, "grid[0].y"),
        ({"suites__0__testfns": ["missing"]}, "suites[0].testfns"),
        ({"suites__0__direction": [1.0, 0.0]}, "suites[0].direction"),
        ({"testfns__0__params": {"a": [1.0, 0.0, 0.0]}}, "testfns[0].params"),
        ({"testfns__0__params": {"b": 1.0}}, "testfns[0].params"),
    ],
)
def test_cross_field_errors(changes, field):
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(_plan(**changes))
    assert info.value.field == field


def test_duplicate_testfn_ids():
    data = copy.deepcopy(BASE)
    data["testfns"].append(copy.deepcopy(data["testfns"][0]))
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(data)
    assert info.value.field == "testfns"


def test_negative_time_rejected():
    with pytest.raises(ConfigValidationError) as info:
        plan_from_dict(_plan(grid__0__t=-1.0))
    assert info.value.field == "grid[0].t"


def test_parse_error_carries_position(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text('[model]\nname = "k"\nr = = 1\n', encoding="utf-8")
    with pytest.raises(ConfigParseError) as info:
        parse_config(path)
    assert info.value.line == 3


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ConfigParseError):
        parse_config(tmp_path / "nope.toml")
    with pytest.raises(ConfigParseError):
        read_config_hash(tmp_path / "nope.toml")


def test_json_parse_error_carries_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "model": ,\n}\n', encoding="utf-8")
    with pytest.raises(ConfigParseError) as info:
        parse_config(path)
    assert info.value.line == 2


def test_echo_round_trip(data_dir, tmp_path):
    plan = parse_config(data_dir / "iterated.toml")
    again = plan_from_dict(plan.echo())
    assert again.echo() == plan.echo()
    assert again.structure() == plan.structure()

    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan.echo()), encoding="utf-8")
    assert parse_config(path).echo() == plan.echo()


def test_plan_read_back_from_report(data_dir, tmp_path):
    plan = parse_config(data_dir / "equalities.toml")
    report = {"schema_version": 1, "plan_hash": "x", "plan": plan.echo(), "reports": []}
    path = tmp_path / "report.json"
    path.write_text(json.dumps(report), encoding="utf-8")
    assert parse_config(path).echo() == plan.echo()


def test_config_hash_is_sha256_of_bytes(data_dir):
    path = data_dir / "kolmogorov.toml"
    digest = read_config_hash(path)
    assert digest == config_hash(path.read_bytes())
    assert len(digest) == 64
