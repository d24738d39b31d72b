"""
Integrals with a variable upper limit as sympy nodes.

A solution field may carry a quadrature that has no closed form. The node
differentiates to its integrand and evaluates through scipy, so residuals
of such fields are formed with ordinary sympy differentiation.
"""
from __future__ import annotations

import itertools
import logging

import scipy.integrate
import sympy
from sympy.core.function import UndefinedFunction

from ..engine.symexpr import Expr

LOG = logging.getLogger(__name__)

_COUNTER = itertools.count()


class Quadrature:
    """
    A definite integral with a fixed lower limit and a variable upper limit,
    usable as a node inside sympy expressions.

    Symbolic differentiation returns the integrand at the upper limit
    (times the derivative of the limit, by the chain rule). Numeric
    evaluation runs an adaptive 15-point Gauss-Kronrod rule.

    Attributes:
        integrand (Expr): Integrand in the dummy variable `var`; must be numeric otherwise.
        var (Symbol): Integration variable.
        lower (float): Fixed lower limit.
        abs_tol (float): Absolute tolerance handed to scipy.
        limit (int): Cap on subintervals.
        max_error (float): Largest error estimate seen so far.
    """

    def __init__(
        self,
        integrand: Expr,
        var: sympy.Symbol,
        lower: float = 1.0,
        *,
        abs_tol: float = 1e-10,
        limit: int = 200,
        name: str = "Q",
    ):
        self.integrand = sympy.sympify(integrand)
        extra = self.integrand.free_symbols - {var}
        if extra:
            names = ", ".join(sorted(sym.name for sym in extra))
            raise ValueError(f"integrand has unbound symbols: {names}")
        self.var = var
        self.lower = float(lower)
        self.abs_tol = abs_tol
        self.limit = limit
        self.max_error = 0.0
        self._numeric = sympy.lambdify(var, self.integrand, modules="math")

        integrand_at = self.integrand

        def fdiff(node, argindex=1):
            return integrand_at.subs(var, node.args[0])

        self.node = UndefinedFunction(
            f"{name}_{next(_COUNTER)}",
            _imp_=staticmethod(self.evaluate),
            fdiff=fdiff,
        )

    def __call__(self, upper: Expr) -> Expr:
        return self.node(upper)

    def evaluate(self, upper: float) -> float:
        upper = float(upper)
        if upper == self.lower:
            return 0.0
        forward = upper > self.lower
        lo, hi, sign = (self.lower, upper, 1.0) if forward else (upper, self.lower, -1.0)
        value, err = scipy.integrate.quad_vec(
            self._numeric, lo, hi, epsabs=self.abs_tol, limit=self.limit, quadrature="gk15",
        )
        self.max_error = max(self.max_error, float(err))
        if err > 10 * self.abs_tol:
            LOG.warning("quadrature error estimate %.2e above tolerance on [%g, %g]", err, lo, hi)
        else:
            LOG.debug("quadrature on [%g, %g]: error estimate %.2e", lo, hi, err)
        return sign * float(value)
