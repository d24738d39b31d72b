"""
Tests for service/core.py - the command functions behind the CLI and the
HTTP routes, and the expectations they encode for each force.
"""
from __future__ import annotations

import pytest

from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.symexpr import t
from plasticity_symmetry.schemas import ForceSpec
from plasticity_symmetry.service import core

# ---------------------------------------------------------------------------
# Force expectations
# ---------------------------------------------------------------------------

class TestForceKey:
    def test_time_terms_mark_friction_time(self):
        assert core._force_key(ForceSpec(name="friction", k3=1.0)) == "friction-time"
        assert core._force_key(ForceSpec(name="friction")) == "friction"

    def test_spiral_without_position_terms_is_plain_friction(self):
        assert core._force_key(ForceSpec(name="spiral")) == "friction"
        assert core._force_key(ForceSpec(name="spiral", h3="1")) == "spiral"


class TestCheckSymmetry:
    """
    Default generator lists pass when every generator behaves as recorded:
    either a symmetry, or a known failure for that force.
    """
    def test_force_free_algebra(self, settings):
        report = core.cmd_check_symmetry(settings(), ForceSpec())
        assert report.passed, [c.name for c in report.checks if not c.passed]
        assert len(report.checks) == len(core.EQ9)

    def test_spiral_force_records_lost_time_translation(self, settings):
        report = core.cmd_check_symmetry(settings(), ForceSpec(name="spiral", h3="1"))
        assert report.passed
        by_name = {c.name: c for c in report.checks}
        assert by_name["P0"].detail["symmetry"] is False
        assert by_name["P0"].detail["expected"] is False

    def test_friction_time_records_both_failures(self, settings):
        report = core.cmd_check_symmetry(settings(), ForceSpec(name="friction", k3=1.0))
        assert report.passed
        broken = sorted(c.name for c in report.checks if not c.detail["symmetry"])
        assert len(broken) == 2
        assert broken[0].startswith("K[") and broken[1] == "P0"

    def test_explicit_generators_must_pass(self, settings):
        report = core.cmd_check_symmetry(settings(), ForceSpec(name="spiral", h3="1"), ["P0"])
        assert not report.passed
        assert report.checks[0].witness is not None

    def test_monogenic_generators_carry_potential(self, settings):
        spec = ForceSpec(name="monogenic", potential="x*y + t^2*x")
        report = core.cmd_check_symmetry(settings(), spec, ["P0", "B_x[t^2]"])
        assert report.passed

    def test_unknown_generator_raises(self, settings):
        with pytest.raises(ValueError):
            core.cmd_check_symmetry(settings(), ForceSpec(), ["Q"])


# ---------------------------------------------------------------------------
# Other commands
# ---------------------------------------------------------------------------

class TestCommands:
    def test_check_table_low_degree(self, settings):
        report = core.cmd_check_table(settings(), degree=1)
        assert report.passed
        assert report.command == "check-table"

    def test_adjoint_adds_two_term_check_for_cobord(self, settings):
        report = core.cmd_adjoint(settings(), "X[t^2]", "P0", "0.5")
        assert [c.passed for c in report.checks] == [True, True]
        assert report.checks[1].name.endswith("two terms")

    def test_adjoint_without_cobord_has_one_check(self, settings):
        report = core.cmd_adjoint(settings(), "L", "X[t^2]")
        assert len(report.checks) == 1
        assert report.passed

    def test_normal_form_summary(self, settings):
        summary, ok = core.normal_form_summary(settings(), "2t^2 + 6t^3")
        assert ok
        assert symexpr.parse(summary["f"]) == t**2 + t**3
        assert summary["roundtrip_residual"] < 1e-9

    def test_invariants_of_k_include_denominator_checks(self, settings):
        report = core.cmd_invariants(settings(), "K")
        assert report.passed, [c.name for c in report.checks if not c.passed]
        assert sum("denominators" in c.name for c in report.checks) == 2

    def test_unknown_reduction_raises(self, settings):
        with pytest.raises(ValueError):
            core.cmd_invariants(settings(), "Q")

    def test_residual_without_variant_flags_suspect_printed_form(self, settings):
        report = core.cmd_solution_residual(settings(), "R16", points=10)
        assert report.checks[0].detail["flags"] == [core.SUSPECT]
        assert report.checks[1].name == "R16/derived"
        assert report.passed

    def test_first_integral_r11_ignores_a1(self, settings):
        report = core.cmd_first_integral(settings(), "R11", a1=5.0)
        assert report.passed

    def test_unknown_candidate_raises(self, settings):
        with pytest.raises(ValueError):
            core.cmd_first_integral(settings(), "R99")

    def test_timing_only_when_requested(self, settings):
        assert core.cmd_normal_form(settings(), "t").wall_time is None
        assert core.cmd_normal_form(settings(record_timing=True), "t").wall_time is not None
