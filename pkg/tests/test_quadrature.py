"""
Tests for models/quadrature.py
"""
from __future__ import annotations

import pytest
import sympy

from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.symexpr import x
from plasticity_symmetry.models.quadrature import Quadrature

eta = sympy.Symbol("eta", positive=True)


class TestQuadrature:
    def test_numeric_value(self):
        assert Quadrature(eta**2, eta).evaluate(2.0) == pytest.approx(7 / 3)

    def test_upper_below_lower_flips_sign(self):
        assert Quadrature(eta**2, eta).evaluate(0.5) == pytest.approx(-(1 - 0.125) / 3)

    def test_zero_width(self):
        q = Quadrature(eta**2, eta)
        assert q.evaluate(1.0) == 0.0
        assert q.max_error == 0.0

    def test_error_estimate_is_tracked(self):
        q = Quadrature(sympy.sqrt(eta), eta)
        q.evaluate(3.0)
        assert 0.0 <= q.max_error <= 10 * q.abs_tol

    def test_derivative_uses_chain_rule(self):
        """d/dx Q(x^2) = 2x (x^2)^2."""
        node = Quadrature(eta**2, eta)(x**2)
        assert sympy.expand(sympy.diff(node, x) - 2 * x**5) == 0

    def test_node_evaluates_inside_expressions(self):
        q = Quadrature(eta**2, eta)
        value = symexpr.evaluate(3 * q(x) + 1, {"x": 2.0})
        assert value == pytest.approx(8.0)

    def test_unbound_symbol_in_integrand_raises(self):
        with pytest.raises(ValueError):
            Quadrature(eta * x, eta)
