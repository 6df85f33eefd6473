"""Tests for the command line: exit codes, outputs and printed tables."""
import json
from pathlib import Path

import pytest

from tgfield.main import main


def test_verify_passing_suite(tmp_path, capsys):
    out = tmp_path / "tg.json"
    code = main(["verify", "--manifold", "sphere:3", "--field", "hopf:1", "--suite", "tg", "--samples", "3", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "pass"
    assert payload["config"]["samples"] == 3
    assert payload["rng"] == "numpy.random.PCG64"
    assert "MainEq" in capsys.readouterr().out


def test_verify_failing_suite(tmp_path):
    out = tmp_path / "radial.json"
    code = main(["verify", "--manifold", "flat:2", "--field", "flat-radial", "--suite", "tg", "--samples", "2", "--out", str(out)])
    assert code == 1
    assert json.loads(out.read_text())["verdict"] == "fail"


def test_verify_csv_output(tmp_path):
    out = tmp_path / "props.csv"
    code = main(
        [
            "verify",
            "--manifold", "flat:3",
            "--field", "flat-parallel",
            "--suite", "properties",
            "--samples", "2",
            "--format", "csv",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert out.read_text().startswith("check,max_defect,tolerance,passed,chart,note")


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--manifold", "torus:2", "--field", "hopf:1", "--suite", "tg"],
        ["verify", "--manifold", "sphere:2", "--field", "hopf:1", "--suite", "tg"],
        ["verify", "--manifold", "sphere:3", "--field", "hopf:1", "--suite", "tg", "--tol", "MainEq"],
        ["verify", "--manifold", "sphere:3", "--field", "hopf:1", "--suite", "tg", "--samples", "0"],
        ["verify", "--manifold", "sphere:3", "--field", "hopf:1", "--suite", "curvature"],
        ["verify", "--manifold", "sphere:3", "--field", "hopf:1"],
        ["report", "--samples", "0"],
        [],
    ],
)
def test_usage_errors_exit_with_two(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path / "x.json")] if argv and argv[0] == "verify" else [])) == 2


def test_classify_prints_flags(tmp_path, capsys):
    out = tmp_path / "classify.json"
    code = main(["classify", "--manifold", "flat:2", "--field", "flat-parallel", "--samples", "3", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "invariant" in printed
    classification = json.loads(out.read_text())["classification"]
    assert classification["invariant"]["holds"] is False
    assert classification["killing"]["holds"] is True


def test_trajectory_command_writes_csv(tmp_path):
    out = tmp_path / "flat.json"
    code = main(
        ["trajectory", "--manifold", "flat:2", "--field", "flat-tg:0.5,0", "--starts", "2", "--length", "0.5", "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert [Path(p).name for p in payload["outputs"]] == ["flat_trajectory_0.csv", "flat_trajectory_1.csv"]
    assert all(Path(p).exists() for p in payload["outputs"])
