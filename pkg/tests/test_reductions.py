"""
Tests for models/reductions.py - invariants of the reducing subalgebras,
ansatz invariance and the first-integral check.
"""
from __future__ import annotations

import pytest
import sympy

from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.symexpr import kappa1, kappa2, r, x, xi, y
from plasticity_symmetry.engine.vfield import K, L, instantiate
from plasticity_symmetry.models.reductions import (
    CANDIDATES,
    Unsupported,
    ansatz_invariance,
    dl_ansatz,
    first_integral_check,
    invariants_of,
    k_ansatz,
)
from plasticity_symmetry.models.subalgebras import Subalgebra, reduction_subalgebras, span

DL, KSUB = reduction_subalgebras()


class TestInvariants:
    def test_rotation_dilation_invariants_annihilated(self):
        coords = invariants_of(DL, trials=12)
        assert coords.annihilated, [c for c in coords.checks if not c.passed]
        assert set(coords.all()) == {"xi", "T1", "T2", "R", "S"}

    def test_potential_enters_pressure_invariant(self):
        """With V = x^2 + y^2 the pressure invariant becomes sigma + rho V."""
        V = x**2 + y**2
        coords = invariants_of(DL, V, trials=12)
        assert coords.annihilated
        assert coords.invariants["S"] == symexpr.sigma + symexpr.rho * V

    def test_k_invariants_annihilated(self):
        coords = invariants_of(KSUB, trials=12)
        assert coords.annihilated
        assert set(coords.variables) == {"r", "xi"}

    def test_one_check_per_generator_and_invariant(self):
        coords = invariants_of(DL, trials=4)
        assert len(coords.checks) == 2 * 5

    def test_unwired_subalgebra_raises(self):
        with pytest.raises(Unsupported):
            invariants_of(Subalgebra("<L>", "test", span(L())))


class TestAnsatz:
    def test_dl_ansatz_recovers_fields(self):
        """Constant reduced functions give a rigid rotation of the angle."""
        fields = dl_ansatz(1, 0, 0, 0)
        assert sympy.simplify(fields["u"] - sympy.cos(sympy.atan2(y, x))) == 0
        assert fields["theta"] == sympy.atan2(y, x)

    def test_k_ansatz_with_matching_denominators_is_invariant(self):
        """u = -y/t, v = x/t, theta = phi + pi/2 are K-invariant."""
        ansatz = k_ansatz(sympy.sqrt(r), xi / kappa1 + sympy.pi / 2,
                          xi + kappa1 * sympy.pi / 2, 0)
        tests = ansatz_invariance(instantiate(K()), ansatz, trials=12)
        assert all(tests.values()), {k: v.max_residual for k, v in tests.items()}

    def test_mismatched_denominator_breaks_invariance(self):
        """
        K rotates (u, v) together, so the u residual reads v and a wrong v
        phase breaks it as well.
        """
        ansatz = k_ansatz(sympy.sqrt(r), xi / kappa1 + sympy.pi / 2,
                          xi + kappa1 * sympy.pi / 2, 0, denominators=(kappa1, kappa2))
        tests = ansatz_invariance(instantiate(K()), ansatz, trials=12)
        assert not tests["v"]
        assert not all(tests.values())


class TestFirstIntegral:
    def test_r8_candidate_is_constant(self):
        result = first_integral_check(*CANDIDATES["R8"](), 1.5, params={"a1": 1.5})
        assert result.passed
        assert result.offset == pytest.approx(0.0, abs=1e-12)

    def test_r11_candidate_vanishes(self):
        result = first_integral_check(*CANDIDATES["R11"](), 0.0, params={"b1": 2.0})
        assert result.passed
        assert result.offset == pytest.approx(0.0, abs=1e-12)

    def test_constant_speed_is_not_a_first_integral(self):
        result = first_integral_check("1", "0", "0", 1.0)
        assert not result.passed
        assert result.spread == pytest.approx(1.5)

    def test_text_candidates_are_parsed(self):
        result = first_integral_check("2/xi", "pi/4", "pi/4", 2.0)
        assert result.passed

    def test_unbound_parameter_raises(self):
        with pytest.raises(symexpr.UnboundSymbol):
            first_integral_check(symexpr.b1 / xi, 0, 0, 1.0)
