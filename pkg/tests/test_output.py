"""
Tests for the output package: flow-field CSV and SVG files, JSON reports and
the text summary.
"""
from __future__ import annotations

import json

from plasticity_symmetry.output.flowfield import to_csv, write_flowfield, write_svg
from plasticity_symmetry.output.reports import summarize, write_report
from plasticity_symmetry.schemas import CheckRecord


class TestFlowFieldOutput:
    def test_csv_header_and_rows(self, mock_grid):
        lines = to_csv(mock_grid()).splitlines()
        assert lines[0] == "# family=R17/derived, a1=1, a2=1, t=0.1"
        assert lines[1] == "x,y,u,v"
        assert lines[2] == "1,0,0.5,2"
        assert len(lines) == 4

    def test_csv_keeps_full_precision(self, mock_grid):
        grid = mock_grid(rows=((0.1, 1 / 3, 0.0, 0.0),))
        row = to_csv(grid).splitlines()[2].split(",")
        assert float(row[1]) == 1 / 3

    def test_svg_is_byte_stable(self, mock_grid, tmp_path):
        first = write_svg(mock_grid(), tmp_path / "a.svg").read_bytes()
        second = write_svg(mock_grid(), tmp_path / "b.svg").read_bytes()
        assert first == second
        assert b"<svg" in first

    def test_flowfield_pair_keeps_dotted_names(self, mock_grid, tmp_path):
        paths = write_flowfield(mock_grid(), tmp_path / "out" / "ff_t0.1")
        assert [p.name for p in paths] == ["ff_t0.1.csv", "ff_t0.1.svg"]
        assert all(p.exists() for p in paths)

    def test_known_suffix_is_replaced(self, mock_grid, tmp_path):
        paths = write_flowfield(mock_grid(), tmp_path / "field.svg")
        assert [p.name for p in paths] == ["field.csv", "field.svg"]


class TestReports:
    def test_write_report_round_trips(self, report, tmp_path):
        path = write_report(report(), tmp_path / "nested" / "r.json")
        payload = json.loads(path.read_text())
        assert payload["passed"] is True
        assert payload["schema_version"] == 1

    def test_summary_of_passing_report(self, report):
        text = summarize(report())
        assert text.splitlines()[-1] == "check-table: PASS"

    def test_summary_lists_witness_and_flags(self, report):
        checks = [
            CheckRecord(name="ok one", passed=True, max_residual=1e-12),
            CheckRecord(name="bad one", passed=False, max_residual=0.5,
                        witness={"x": 1.0, "y": 2.0}, detail={"flags": ["SUSPECT"]}),
        ]
        text = summarize(report(passed=False, checks=checks))
        assert "FAIL bad one  max |r| = 5.000e-01" in text
        assert "witness: x=1, y=2" in text
        assert "SUSPECT" in text
        assert text.endswith("check-table: FAIL (1 of 2)")
