"""
Tests for engine/vfield.py - vector field algebra, the named generators and
the commutation table.
"""
from __future__ import annotations

import pytest
import sympy

from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.symexpr import rho, t, x, y
from plasticity_symmetry.engine.vfield import (
    D,
    K,
    L,
    P0,
    S,
    X,
    Y,
    Combination,
    Kind,
    MissingSlot,
    Relation,
    VectorField,
    bracket,
    check_relation,
    check_table,
    generator_from_text,
    instantiate,
    lincomb,
    table_relations,
)


# ---------------------------------------------------------------------------
# VectorField
# ---------------------------------------------------------------------------

class TestVectorField:
    def test_needs_seven_coefficients(self):
        with pytest.raises(ValueError):
            VectorField((1, 2, 3))

    def test_unknown_component_raises(self):
        with pytest.raises(symexpr.UnknownVariable):
            VectorField.from_components(w=1)

    def test_apply_is_a_derivation(self):
        """D applied to x^2 + y^2 is 2(x^2 + y^2)."""
        dilation = instantiate(D())
        assert sympy.expand(dilation.apply(x**2 + y**2) - 2 * (x**2 + y**2)) == 0

    def test_lookup_by_name_and_symbol(self):
        vf = instantiate(X(t**2))
        assert vf["u"] == 2 * t
        assert vf[symexpr.sigma] == 2 * rho * x


# ---------------------------------------------------------------------------
# Brackets
# ---------------------------------------------------------------------------

class TestBracket:
    """
    The bracket [A, B] has coefficients A(B_i) - B(A_i); these cases are
    small enough to check against hand computation.
    """
    def test_time_translation_differentiates_slot(self, vanishes):
        residual = bracket(instantiate(P0()), instantiate(X(t**3))) - instantiate(X(3 * t**2))
        assert vanishes(residual), "[P0, X_f] should equal X_f'"

    def test_rotation_swaps_x_and_y(self, vanishes):
        assert vanishes(bracket(instantiate(L()), instantiate(X(t))) - instantiate(Y(t)))
        assert vanishes(bracket(instantiate(L()), instantiate(Y(t))) + instantiate(X(t)))

    def test_two_x_slots_commute_modulo_pressure(self, vanishes):
        """[X_t, X_t^2] = S[rho (f g'' - g f'')] = S[2 rho t]."""
        residual = bracket(instantiate(X(t)), instantiate(X(t**2))) - instantiate(S(2 * rho * t))
        assert vanishes(residual)

    def test_antisymmetric(self, vanishes):
        a, b = instantiate(D()), instantiate(X(t**2 + 1))
        assert vanishes(bracket(a, b) + bracket(b, a))

    def test_rotation_commutes_with_dilation(self, vanishes):
        assert vanishes(bracket(instantiate(L()), instantiate(D())))


# ---------------------------------------------------------------------------
# Named generators
# ---------------------------------------------------------------------------

class TestGenerators:
    def test_from_text_reads_slot(self):
        assert generator_from_text("X[t^2]") == X(t**2)
        assert generator_from_text("S_h[1]") == S(1), "S_h is an alias of S"

    def test_from_text_reads_kappa_triple(self):
        spec = generator_from_text("K[0, 1, 2]")
        assert spec.kind is Kind.K
        assert spec.kappa == (0, 1, 2)

    def test_unknown_name_raises(self):
        with pytest.raises(ValueError):
            generator_from_text("Q")

    def test_slotted_kind_without_slot_raises(self):
        with pytest.raises(MissingSlot):
            instantiate(generator_from_text("X"))

    def test_monogenic_generator_needs_potential(self):
        with pytest.raises(MissingSlot):
            instantiate(generator_from_text("B_x[1]"))

    def test_potential_enters_pressure_of_time_translation(self):
        V = t * x
        vf = instantiate(P0(potential=V))
        assert vf["sigma"] == -rho * x

    def test_labels(self):
        assert X(t**2).label() == "X[t**2]"
        assert K(0, 1, 2).label() == "K[0,1,2]"
        assert D().label() == "D"


class TestCombination:
    def test_like_terms_merge(self):
        combo = D() + D() * 2
        assert combo.terms == ((3, D()),)

    def test_cancellation_leaves_zero(self):
        assert (X(t) - X(t)).label() == "0"

    def test_lincomb_instantiates_sum(self, vanishes):
        combo = lincomb((2, L()), D())
        assert vanishes(combo.instantiate() - (2 * instantiate(L()) + instantiate(D())))

    def test_empty_combination_is_zero_field(self):
        assert Combination().instantiate() == VectorField.zero()


# ---------------------------------------------------------------------------
# Commutation table
# ---------------------------------------------------------------------------

class TestTable:
    def test_relation_count_per_rung(self):
        """Nine nonzero relations per ladder rung."""
        assert len(table_relations(0)) == 9
        assert len(table_relations(2)) == 27

    def test_table_holds_through_degree_three(self):
        report = check_table(table_relations(3), trials=8)
        assert report.passed, [r for r in report.results if not r.passed]
        assert all(report.by_relation().values())

    def test_extended_table_holds(self):
        report = check_table(table_relations(2, extended=True), trials=8)
        assert report.passed
        assert "[X_f,X_g]" in report.by_relation()

    def test_wrong_relation_reports_witness(self):
        """A deliberately wrong entry fails and names a component and a point."""
        wrong = Relation("[P0,X_f]", P0(), X(t**2), Combination.of(X(t**2)))
        result = check_relation(wrong, trials=8)
        assert not result.passed
        assert result.component == "x"
        assert result.witness is not None
