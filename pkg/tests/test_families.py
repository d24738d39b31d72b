"""
Tests for models/families.py - explicit solutions, the residual oracle and
flow-field sampling.
"""
from __future__ import annotations

import pytest
import sympy

from plasticity_symmetry.models.families import (
    FAMILIES,
    UnknownFamily,
    build_family,
    check_family,
    curl,
    flow_field,
    probe_ratio,
    quadrature_consistency,
    r10,
    r10_ansatz_consistency,
    r17,
    residual,
    residual_expressions,
)


class TestBuild:
    def test_default_variant_is_last_listed(self):
        assert build_family("r17").variant == "derived"
        assert build_family("R10").variant == "printed"

    def test_unknown_family_raises(self):
        with pytest.raises(UnknownFamily):
            build_family("R99")

    def test_unknown_variant_raises(self):
        with pytest.raises(UnknownFamily):
            build_family("R10", "derived")

    def test_every_family_builds(self):
        for name in FAMILIES:
            family = build_family(name)
            assert set(family.fields) == {"u", "v", "sigma", "theta"}


class TestResidual:
    def test_source_flow_solves_system(self):
        report = residual(r10(), points=30)
        assert report.passed, report.by_equation()
        assert report.points == 30

    def test_source_flow_is_irrotational(self, zero):
        assert zero(curl(r10(a1=2.0)))

    def test_negative_a1_reverses_flow(self):
        inward = r10(a1=-1.0).evaluate({"t": 1.0, "x": 1.0, "y": 0.0})
        assert inward["u"] == pytest.approx(-1.0)

    def test_superposed_vortex_derived_solves_system(self):
        report = residual(r17("derived"), points=30)
        assert report.passed, report.by_equation()
        assert report.by_equation()["d"] < 1e-12, "the flow is incompressible"

    def test_rotation_under_friction_solves_system(self):
        report = residual(build_family("RF9"), points=20)
        assert report.passed, report.by_equation()

    def test_same_seed_same_report(self):
        first = residual(r10(), points=10, seed=4)
        second = residual(r10(), points=10, seed=4)
        assert first.by_equation() == second.by_equation()


class TestCheckFamily:
    def test_rigid_rotation_printed_form_is_suspect(self):
        """The printed R16 misses the gate and the derived variant is checked instead."""
        check = check_family("R16", points=20)
        assert check.suspect
        assert check.derived is not None and check.derived.passed
        assert check.passed
        assert len(check.remarks) == 2

    def test_passing_printed_form_has_no_derived_run(self):
        check = check_family("R10", points=20)
        assert not check.suspect
        assert check.derived is None

    def test_unknown_family_raises(self):
        with pytest.raises(UnknownFamily):
            check_family("R99")


class TestConsistency:
    def test_source_flow_matches_rotation_dilation_ansatz(self):
        result = r10_ansatz_consistency(trials=12)
        assert all(result.values()), result

    def test_quadrature_derivative_matches_integrand(self):
        (q,) = build_family("RF9").quadratures
        assert quadrature_consistency(q, 1.2) < 1e-5

    def test_residuals_of_quadrature_family_are_fully_differentiated(self):
        """Sigma enters through its gradient only, so the integrand replaces the node."""
        family = build_family("R16", "derived")
        exprs = residual_expressions(family)
        assert not any(e.atoms(sympy.Derivative) for e in exprs)
        (q,) = family.quadratures
        assert not any(e.has(q.node) for e in exprs)


class TestFlowField:
    def test_origin_is_skipped(self):
        grid = flow_field(r17(), 0.1, (-1.0, 1.0, 3))
        assert len(grid.rows) == 8
        assert all((row[0], row[1]) != (0.0, 0.0) for row in grid.rows)
        assert grid.family == "R17/derived"

    def test_non_positive_time_raises(self):
        with pytest.raises(ValueError):
            flow_field(r17(), 0.0)

    @pytest.mark.parametrize("t_value,ratio", [(0.1, 100.0), (1.0, 1.0), (10.0, 0.01)])
    def test_probe_ratio_is_inverse_square_of_time(self, t_value, ratio):
        """Tangential over radial speed at (1, 0) is a2 / (sqrt(a1) t^2)."""
        assert probe_ratio(r17(), t_value) == pytest.approx(ratio)
