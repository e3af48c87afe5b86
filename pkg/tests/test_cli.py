import json

import pandas as pd
import pytest

from qgroupoid_cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from src.qgroupoid_verifier import __version__
from src.utils import config_loader

SCENARIO = """\
name = cli-sl2
expected = {expected}

[base]
field = ratfun

[instance]
kind = dynamical-r
fixture = rational-sl2

[checks]
equivariance
symmetric-part
"""


@pytest.fixture(autouse=True)
def shipped_config(monkeypatch):
    monkeypatch.setattr(config_loader, "_config_loader", None)


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "cli_sl2.scn"
    path.write_text(SCENARIO.format(expected="pass"), encoding="utf-8")
    return path


def test_version(capsys):
    assert main(["version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_list_checks(capsys):
    assert main(["list-checks"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "cdybe" in out
    assert "[classical, deformed]" in out


@pytest.mark.parametrize("argv", [[], ["run"], ["frobnicate"]])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_missing_config_is_a_usage_error(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.json"), "version"]) == EXIT_USAGE
    assert "not found" in capsys.readouterr().out


def test_run_text_report(scenario_file, capsys):
    assert main(["run", str(scenario_file)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Scenario: cli-sl2" in out
    assert "Verdict: pass (expected pass, met)" in out


def test_run_machine_report_without_timings(scenario_file, capsys):
    assert main(["run", "--report", "machine", "--no-timings", str(scenario_file)]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data == {
        "scenario": "cli-sl2",
        "checks": [
            {"name": "equivariance", "status": "pass", "max_residual": "0"},
            {"name": "symmetric-part", "status": "pass", "max_residual": "0"},
        ],
        "verdict": "pass",
    }


def test_run_directory_and_outputs(tmp_path, scenario_file):
    (tmp_path / "cli_fail.scn").write_text(SCENARIO.format(expected="fail"), encoding="utf-8")
    report_path = tmp_path / "out" / "report.txt"
    csv_path = tmp_path / "out" / "checks.csv"
    status = main(["--quiet", "run", str(tmp_path), "--out", str(report_path), "--output-csv", str(csv_path)])
    assert status == EXIT_MISMATCH
    assert "VIOLATED" in report_path.read_text(encoding="utf-8")
    df = pd.read_csv(csv_path)
    assert len(df) == 4
    assert set(df["Status"]) == {"pass"}


def test_check_override_not_applicable(scenario_file, capsys):
    assert main(["run", "--check", "twistor", str(scenario_file)]) == EXIT_USAGE
    assert "does not apply" in capsys.readouterr().out


def test_unparseable_scenario(tmp_path, capsys):
    path = tmp_path / "bad.scn"
    path.write_text("name = bad\n[instance]\nkind = dynamical-r\n[checks]\nfrobnicate\n", encoding="utf-8")
    assert main(["run", str(path)]) == EXIT_USAGE
    assert "line 5" in capsys.readouterr().out


def test_unreadable_scenario(tmp_path):
    assert main(["run", str(tmp_path / "missing.scn")]) == EXIT_USAGE
