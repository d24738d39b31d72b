"""
Tests for cli.py - argument parsing, exit codes and the report outputs.
"""
from __future__ import annotations

import argparse
import json

import pytest

from plasticity_symmetry import cli
from plasticity_symmetry.config import CONFIG_ENV


@pytest.fixture(autouse=True)
def _no_config_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


class TestArgumentHelpers:
    def test_grid(self):
        assert cli._grid("-2:2:21") == (-2.0, 2.0, 21)

    def test_bad_grid_raises(self):
        with pytest.raises(argparse.ArgumentTypeError):
            cli._grid("1:2")

    def test_param_keeps_expressions(self):
        assert cli._param("a1=0.5") == ("a1", 0.5)
        assert cli._param("H=s^2") == ("H", "s^2")

    def test_negative_grid_needs_equals_form(self):
        args = cli.build_parser().parse_args(
            ["solution", "flowfield", "--family", "R17", "--grid=-1:1:3"])
        assert args.grid == (-1.0, 1.0, 3)


class TestExitCodes:
    def test_passing_table_exits_zero(self, capsys):
        assert cli.main(["check-table", "--degree", "1", "--trials", "6"]) == 0
        out = capsys.readouterr().out
        assert "check-table: PASS" in out

    def test_failing_report_exits_one(self, mocker, report):
        mocker.patch.object(cli.core, "cmd_check_table", return_value=report(passed=False))
        assert cli.main(["check-table"]) == 1

    def test_both_zero_slots_exit_two(self, capsys):
        assert cli.main(["classify", "normal-form", "--f", "0", "--g", "0"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_unparseable_slot_exits_two(self):
        assert cli.main(["classify", "normal-form", "--f", "2 + * t"]) == 2

    def test_bad_config_exits_two(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("nonsense=1\n", encoding="utf-8")
        assert cli.main(["check-table", "--config", str(path)]) == 2


class TestOutputs:
    def test_json_report_is_deterministic(self, capsys):
        argv = ["classify", "normal-form", "--f", "2t^2 + 6t^3", "--json", "--trials", "8"]
        cli.main(argv)
        first = capsys.readouterr().out
        cli.main(argv)
        second = capsys.readouterr().out
        assert first == second
        payload = json.loads(first)
        assert payload["checks"][0]["detail"]["m1"] == 2
        assert "wall_time" not in payload

    def test_timings_flag_records_wall_time(self, capsys):
        cli.main(["classify", "normal-form", "--f", "t", "--json", "--timings"])
        assert "wall_time" in json.loads(capsys.readouterr().out)

    def test_out_writes_report(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        assert cli.main(["classify", "normal-form", "--f", "t + 1", "--out", str(target)]) == 0
        assert json.loads(target.read_text())["command"] == "classify normal-form"

    def test_flowfield_prints_csv(self, capsys):
        cli.main(["solution", "flowfield", "--family", "R17", "--t", "0.1", "--grid=-1:1:3"])
        out = capsys.readouterr().out
        assert out.startswith("# family=R17/derived")
        assert "x,y,u,v" in out
        assert "PASS" not in out, "no summary is mixed into the CSV stream"

    def test_flowfield_save_writes_one_pair_per_time(self, tmp_path):
        base = tmp_path / "ff"
        cli.main(["solution", "flowfield", "--family", "R17", "--t", "0.1", "10",
                  "--grid=-1:1:3", "--save", str(base)])
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["ff_t0.1.csv", "ff_t0.1.svg", "ff_t10.csv", "ff_t10.svg"]

    def test_first_integral_candidate(self, capsys):
        assert cli.main(["solution", "first-integral", "--candidate", "R8", "--a1", "2"]) == 0
