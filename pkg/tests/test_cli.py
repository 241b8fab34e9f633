"""Command line: subcommands, output files and exit codes."""

import pytest

import hypobound.cli as cli
from hypobound.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_IO, EXIT_OK, main
from hypobound.configs.app_config import get_config
from hypobound.core.reports import CheckContext, CheckReport, InequalityId, SuiteReport, Variant, Verdict


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    config = get_config()
    monkeypatch.setattr(config, "jobs", None)
    monkeypatch.setattr(config, "default_formats", ["json", "csv"])


def test_validate(data_dir, capsys):
    assert main(["validate", "--config", str(data_dir / "kolmogorov.toml")]) == EXIT_OK
    assert "valid plan" in capsys.readouterr().out


def test_validate_reports_bad_plan(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[model]\nr = 1\ndims = [1, 2]\nA0 = [1.0]\nblocks = [[1.0, 0.0]]\n[mc]\nseed = 1\n")
    assert main(["validate", "--config", str(path)]) == EXIT_CONFIG


def test_validate_reports_parse_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[model\n")
    assert main(["validate", "--config", str(path)]) == EXIT_CONFIG


def test_covariance_output(data_dir, capsys):
    assert main(["covariance", "--config", str(data_dir / "kolmogorov.toml"), "--t", "1.0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "C(t):" in out and "C+(t):" in out and "E(t):" in out
    assert "-0.5" in out
    assert "0.333333333333" in out


def test_run_writes_reports(data_dir, tmp_path, capsys):
    code = main(["run", "--config", str(data_dir / "equalities.toml"), "--out", str(tmp_path), "--sigma", "5"])
    assert code == EXIT_OK
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "checks.csv").exists()
    assert not (tmp_path / "margins.svg").exists()
    assert "fail 0" in capsys.readouterr().out


def without_wall_time(raw: bytes) -> bytes:
    lines = raw.splitlines(keepends=True)
    kept = [line for line in lines if not line.lstrip().startswith(b'"wall_time"')]
    assert len(kept) == len(lines) - 1
    return b"".join(kept)


def test_run_is_reproducible(data_dir, tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        args = ["run", "--config", str(data_dir / "equalities.toml"), "--out", str(out), "--sigma", "5"]
        assert main(args + ["--formats", "json,csv"]) == EXIT_OK
        outputs.append((without_wall_time((out / "report.json").read_bytes()), (out / "checks.csv").read_bytes()))
    assert outputs[0] == outputs[1]


def test_run_format_override(data_dir, tmp_path):
    args = ["run", "--config", str(data_dir / "equalities.toml"), "--out", str(tmp_path), "--sigma", "5"]
    assert main(args + ["--formats", "svg"]) == EXIT_OK
    assert (tmp_path / "margins.svg").exists()
    assert not (tmp_path / "report.json").exists()


def test_run_returns_failure_code(data_dir, tmp_path, monkeypatch):
    failing = CheckReport(
        inequality_id=InequalityId.BE, variant=Variant.RIGHT, verdict=Verdict.FAIL, context=CheckContext(model="k", t=1.0)
    )
    monkeypatch.setattr(cli, "run_suite", lambda *args, **kwargs: SuiteReport(plan_hash="x", plan={}, reports=[failing]))
    assert main(["run", "--config", str(data_dir / "equalities.toml"), "--out", str(tmp_path)]) == EXIT_FAILED


def test_run_reports_unwritable_output(data_dir, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    args = ["run", "--config", str(data_dir / "equalities.toml"), "--out", str(blocker / "out"), "--sigma", "5"]
    assert main(args) == EXIT_IO


def test_plot_from_report(data_dir, tmp_path):
    assert main(["run", "--config", str(data_dir / "equalities.toml"), "--out", str(tmp_path), "--sigma", "5"]) == 0
    plots = tmp_path / "plots"
    assert main(["plot", "--report", str(tmp_path / "report.json"), "--out", str(plots)]) == EXIT_OK
    assert (plots / "margins.svg").exists()


def test_plot_missing_report(tmp_path):
    assert main(["plot", "--report", str(tmp_path / "missing.json")]) == EXIT_IO


def test_invalid_environment(data_dir, monkeypatch):
    monkeypatch.setattr(get_config(), "jobs", 0)
    assert main(["validate", "--config", str(data_dir / "kolmogorov.toml")]) == EXIT_CONFIG


def test_unknown_format_is_usage_error(data_dir):
    with pytest.raises(SystemExit) as info:
        main(["run", "--config", str(data_dir / "equalities.toml"), "--formats", "pdf"])
    assert info.value.code == 2
