"""
Tests for engine/prolong.py - jets, the first prolongation, the solution
manifold and the symmetry criterion for each force.
"""
from __future__ import annotations

import pytest
import sympy

from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.prolong import (
    JET_BOX,
    ManifoldDegenerate,
    check_symmetry,
    friction_force,
    jet,
    monogenic_force,
    plasticity_system,
    profile,
    prolong1,
    rotational_force,
    solve_on_manifold,
    spiral_friction_force,
)
from plasticity_symmetry.engine.symexpr import t, u, x, y
from plasticity_symmetry.engine.vfield import D, K, L, P0, VectorField, instantiate

FREE = plasticity_system()


def _passes(spec_or_field, system=FREE, **kwargs) -> bool:
    vf = spec_or_field if isinstance(spec_or_field, VectorField) else instantiate(spec_or_field)
    return check_symmetry(vf, system, trials=10, **kwargs).passed


class TestProlongation:
    def test_translation_has_no_jet_part(self):
        pr = prolong1(instantiate(P0()))
        assert all(c == 0 for c in pr.jet_coeffs.values())

    def test_dilation_scales_first_derivatives(self):
        """Under D every first derivative has weight -1."""
        pr = prolong1(instantiate(D()))
        assert sympy.simplify(pr["u_x"] + jet(u, x)) == 0
        assert sympy.simplify(pr["sigma_t"] + jet(symexpr.sigma, t)) == 0

    def test_base_coefficients_pass_through(self):
        pr = prolong1(instantiate(L()))
        assert pr["x"] == y


class TestManifold:
    def test_solved_derivatives_satisfy_all_residuals(self, zero):
        manifold = solve_on_manifold(FREE)
        for residual in FREE.residuals:
            assert zero(manifold.substitute(residual), box=JET_BOX, params={"rho": 1.0})

    def test_degenerate_theta_range_raises(self):
        box = JET_BOX.with_ranges(theta=(0.0, 0.0))
        with pytest.raises(ManifoldDegenerate):
            check_symmetry(instantiate(P0()), FREE, box=box, trials=4)


class TestForceFree:
    """Every generator of the force-free algebra passes the criterion."""

    @pytest.mark.parametrize("text", ["P0", "D", "L", "X[1]", "X[t^3]", "Y[t^2]", "S[1]",
                                      "S[t^2]"])
    def test_generator_is_symmetry(self, field, text):
        assert _passes(field(text)), f"{text} should leave the force-free system invariant"

    def test_velocity_shift_is_not_a_symmetry(self):
        """u -> u + eps without a compensating x-motion breaks (a)."""
        report = check_symmetry(VectorField.from_components(u=1), FREE, trials=10)
        assert not report.passed
        failing = [eq for eq in report.equations if not eq.passed]
        assert failing[0].equation == "a"
        assert failing[0].witness is not None

    def test_report_shape(self):
        report = check_symmetry(instantiate(D()), FREE, label="D", trials=4, seed=5)
        assert report.generator == "D"
        assert [eq.equation for eq in report.equations] == ["a", "b", "c", "d"]
        assert report.seed == 5


class TestMonogenicForce:
    V = x * y + t**2 * x

    def test_pressure_compensated_generators(self, field):
        system = plasticity_system(monogenic_force(self.V))
        for text in ("P0", "B_x[t^2]", "B_y[t]", "S[t]"):
            assert _passes(field(text, potential=self.V), system), text

    def test_plain_translation_fails_for_time_dependent_potential(self):
        system = plasticity_system(monogenic_force(self.V))
        assert not _passes(P0(), system)


class TestFrictionForces:
    def test_profile_reads_text(self):
        assert profile("s^2")(x) == x**2

    def test_k_is_symmetry_of_friction(self):
        system = plasticity_system(friction_force("s", "1", 1, 1))
        assert _passes(K(0, 1, 1), system)

    def test_translations_survive_friction(self, field):
        system = plasticity_system(friction_force("s", "1", 1, 1))
        for text in ("P0", "P1", "P2"):
            assert _passes(field(text), system), text

    def test_time_dependent_friction_loses_time_translation(self):
        system = plasticity_system(friction_force("s", "1", 1, 1, k3=1))
        report = check_symmetry(instantiate(P0()), system, trials=10)
        assert not report.passed
        assert report.force == "friction-time"

    def test_printed_time_term_breaks_k(self):
        """The time term rotates against K, so the combined generator fails."""
        system = plasticity_system(friction_force("s", "1", 1, 1, k3=1))
        assert not _passes(K(0, 1, 1), system)

    def test_spiral_force_loses_time_translation(self):
        system = plasticity_system(spiral_friction_force("s", "1", "1", "0", 1, 1))
        assert not _passes(P0(), system)


class TestRotationalForce:
    def test_rotation_and_dilation_with_inverse_square_decay(self):
        system = plasticity_system(rotational_force(1))
        assert _passes(L(), system)
        assert _passes(D(), system)

    def test_dilation_fails_with_inverse_decay(self):
        system = plasticity_system(rotational_force(1, time_power=1))
        assert not _passes(D(), system)
