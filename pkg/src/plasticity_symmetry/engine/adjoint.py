"""
Adjoint action of one-parameter subgroups on the force-free algebra.

Conjugation follows e^G Z e^{-G} = sum_n [G^(n), Z] / n!, where
[G^(n+1), Z] = [G, [G^(n), Z]]. `ad_series` truncates that sum; `ad_closed`
returns the summed form as a combination of named generators.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import sympy
from sympy.core.function import AppliedUndef

from . import symexpr
from .symexpr import DEFAULT_BOX, Expr, SamplingBox, t
from .vfield import (
    Combination,
    GeneratorSpec,
    Kind,
    VectorField,
    bracket,
    field_is_zero,
    generator_from_text,
    instantiate,
)
from .vfield import P0 as P0_
from .vfield import S as S_
from .vfield import X as X_
from .vfield import Y as Y_

LOG = logging.getLogger(__name__)

GROUP_KINDS = frozenset({Kind.P0, Kind.D, Kind.L, Kind.X, Kind.Y, Kind.S})
TARGET_KINDS = GROUP_KINDS


class NotCovered(ValueError):
    pass


@dataclass(frozen=True)
class GroupElement:
    """exp(param * generator). For X, Y and S the parameter scales the slot."""
    generator: GeneratorSpec
    param: Expr = sympy.Integer(1)

    def __post_init__(self):
        object.__setattr__(self, "param", sympy.sympify(self.param))

    @classmethod
    def from_text(cls, text: str, param: Expr | str = 1) -> GroupElement:
        value = symexpr.parse(param) if isinstance(param, str) else param
        return cls(generator_from_text(text), value)

    def inverse(self) -> GroupElement:
        return GroupElement(self.generator, -self.param)

    def gamma(self, rho: Expr = symexpr.rho) -> VectorField:
        return self.param * instantiate(self.generator, rho)

    def label(self) -> str:
        return f"exp({sympy.sstr(self.param)}*{self.generator.label()})"


# ---- Slot transformations -------------------------------------------------------

def _is_polynomial(f: Expr) -> bool:
    return not f.atoms(AppliedUndef, sympy.Derivative, sympy.Subs) and f.is_polynomial(t)


def rescale_slot(f: Expr, alpha: Expr) -> Expr:
    """f(e^alpha t)."""
    f = sympy.sympify(f)
    if _is_polynomial(f):
        poly = sympy.Poly(f, t)
        return sympy.Add(*(c * sympy.exp(alpha * k) * t**k
                           for (k,), c in poly.terms()))
    return f.subs(t, sympy.exp(alpha) * t)


def shift_slot(f: Expr, t0: Expr) -> Expr:
    """f(t + t0) for any t0: integer, rational, float or symbolic."""
    f = sympy.sympify(f)
    shifted = f.subs(t, t + sympy.sympify(t0))
    return sympy.expand(shifted) if _is_polynomial(f) else shifted


# ---- Series ------------------------------------------------------------------

def ad_series(
    g: GroupElement,
    X: VectorField,
    terms: int,
    rho: Expr = symexpr.rho,
) -> VectorField:
    """Partial sum of the first `terms` bracket terms of e^G X e^{-G}."""
    if terms < 1:
        raise ValueError("terms must be at least 1")
    gamma = g.gamma(rho)
    term = X
    out = X
    for n in range(1, terms):
        term = (bracket(gamma, term) * sympy.Rational(1, n)).expand()
        if all(c == 0 for c in term.coeffs):
            break
        out = out + term
    return out


# ---- Closed forms --------------------------------------------------------------

@dataclass(frozen=True)
class AdjointResult:
    """
    Conjugated generator as named combinations.

    Attributes:
        combination: The main result. For exp(B) on A this is the two-term
                     cobord form, e.g. D + X_{f - t f'}.
        correction:  S-valued remainder from brackets inside B.
        cobord:      The B-part picked up by an A-generator, if any.
    """
    element: GroupElement
    target: GeneratorSpec
    combination: Combination
    correction: Combination = field(default_factory=Combination)
    cobord: Combination = field(default_factory=Combination)

    @property
    def full(self) -> Combination:
        return self.combination + self.correction

    def instantiate(self, rho: Expr = symexpr.rho) -> VectorField:
        return self.full.instantiate(rho)


def _wronskian_s(f: Expr, k: Expr, rho: Expr) -> Expr:
    """Slot of [X_f, X_k] = S_{rho (f k'' - k f'')}."""
    return rho * (f * sympy.diff(k, t, 2) - k * sympy.diff(f, t, 2))


def _require_covered(g: GroupElement, target: GeneratorSpec) -> None:
    gen = g.generator
    if gen.kind not in GROUP_KINDS or target.kind not in TARGET_KINDS:
        raise NotCovered(f"no closed form for {g.label()} acting on {target.label()}")
    if gen.potential is not None or target.potential is not None:
        raise NotCovered("closed forms cover the force-free algebra only")


def ad_closed(g: GroupElement, target: GeneratorSpec, rho: Expr = symexpr.rho) -> AdjointResult:
    """
    Closed-form adjoint action e^G Z e^{-G}.

    Raises:
        NotCovered: Either side lies outside P0, D, L, X, Y, S, or carries a potential.
    """
    _require_covered(g, target)
    a = g.param
    gk, zk = g.generator.kind, target.kind
    z = target.slot
    same = Combination.of(target)

    def result(combination: Combination, correction: Combination | None = None,
               cobord: Combination | None = None) -> AdjointResult:
        return AdjointResult(g, target, combination, correction or Combination(),
                             cobord or Combination())

    match gk:
        case Kind.L:
            if zk is Kind.X:
                return result(Combination.of(X_(z), sympy.cos(a))
                              + Combination.of(Y_(z), sympy.sin(a)))
            if zk is Kind.Y:
                return result(Combination.of(Y_(z), sympy.cos(a))
                              - Combination.of(X_(z), sympy.sin(a)))
            return result(same)
        case Kind.D:
            if zk is Kind.P0:
                return result(Combination.of(target, sympy.exp(-a)))
            if zk in (Kind.X, Kind.Y):
                make = X_ if zk is Kind.X else Y_
                return result(Combination.of(make(rescale_slot(z, a)), sympy.exp(-a)))
            if zk is Kind.S:
                return result(Combination.of(S_(rescale_slot(z, a))))
            return result(same)
        case Kind.P0:
            if zk is Kind.D:
                return result(same + Combination.of(P0_(), a))
            if zk in (Kind.X, Kind.Y, Kind.S):
                make = {Kind.X: X_, Kind.Y: Y_, Kind.S: S_}[zk]
                return result(Combination.of(make(shift_slot(z, a))))
            return result(same)
        case Kind.S:
            h = a * g.generator.slot
            if zk is Kind.P0:
                return result(same - Combination.of(S_(sympy.diff(h, t))))
            if zk is Kind.D:
                return result(same - Combination.of(S_(t * sympy.diff(h, t))))
            return result(same)
        case Kind.X | Kind.Y:
            return _ad_abelian(g, target, rho, result)
    raise NotCovered(f"no closed form for {g.label()}")  # pragma: no cover


def _ad_abelian(g, target, rho, result) -> AdjointResult:
    """exp(X_f) or exp(Y_f) acting on anything in the force-free algebra."""
    f = g.param * g.generator.slot
    own = X_ if g.generator.kind is Kind.X else Y_
    other = Y_ if own is X_ else X_
    zk = target.kind
    same = Combination.of(target)
    match zk:
        case Kind.P0:
            df = sympy.diff(f, t)
            cobord = -Combination.of(own(df))
            corr = Combination.of(S_(-_wronskian_s(f, df, rho) / 2))
            return result(same + cobord, corr, cobord)
        case Kind.D:
            tilde = f - t * sympy.diff(f, t)
            cobord = Combination.of(own(tilde))
            corr = Combination.of(S_(_wronskian_s(f, tilde, rho) / 2))
            return result(same + cobord, corr, cobord)
        case Kind.L:
            # [X_f, L] = -Y_f and [Y_f, L] = X_f; both commute with their image
            sign = -1 if own is X_ else 1
            cobord = Combination.of(other(f), sign)
            return result(same + cobord, None, cobord)
        case Kind.X | Kind.Y if (zk is Kind.X) == (own is X_):
            return result(same, Combination.of(S_(_wronskian_s(f, target.slot, rho))))
    return result(same)


def ad_combination(g: GroupElement, combo: Combination, rho: Expr = symexpr.rho) -> Combination:
    out = Combination()
    for coef, spec in combo.terms:
        out = out + ad_closed(g, spec, rho).full * coef
    return out


def conjugate(elements: Sequence[GroupElement], combo: Combination | GeneratorSpec,
              rho: Expr = symexpr.rho) -> Combination:
    """
    Apply the product g_1 g_2 ... g_k to a combination, acting right to left.
    """
    out = combo if isinstance(combo, Combination) else Combination.of(combo)
    for g in reversed(elements):
        out = ad_combination(g, out, rho)
    return out


# ---- Oracle comparison -----------------------------------------------------------

@dataclass(frozen=True)
class AdjointReport:
    element: str
    target: str
    terms: int
    passed: bool
    max_residual: float
    closed_form: str
    component: str | None = None
    witness: dict[str, float] | None = None
    witness_value: float | None = None


def ad_check(
    g: GroupElement,
    target: GeneratorSpec,
    *,
    terms: int = 24,
    tol: float = 1e-8,
    box: SamplingBox = DEFAULT_BOX,
    rho: float = 1.0,
    trials: int = 32,
    seed: int = 0,
) -> AdjointReport:
    """
    Compare the truncated series against the closed form coefficientwise.

    Args:
        g:      Group element, with a numeric parameter.
        target: Generator being conjugated.
        terms:  Number of series terms.
        tol:    Relative tolerance of the zero test.
        box:    Sampling box.
        rho:    Numeric density.
        trials: Sample points.
        seed:   Sampling seed.

    Returns:
        An AdjointReport; passed iff the difference zero-tests at tol.

    Raises:
        NotCovered: No closed form for the pair.
    """
    closed = ad_closed(g, target)
    if g.param.is_number and abs(float(g.param)) > 0.5 and g.generator.kind in (Kind.L, Kind.D):
        LOG.warning("parameter %s is outside the series comfort range", g.param)
    series = ad_series(g, instantiate(target), terms)
    diff = series - closed.instantiate()
    test = field_is_zero(diff, box, trials=trials, tol=tol, seed=seed, params={"rho": rho})
    if not test:
        LOG.warning("series and closed form differ for %s on %s", g.label(), target.label())
    return AdjointReport(g.label(), target.label(), terms, test.is_zero, test.max_residual,
                         closed.full.label(), test.component, test.witness, test.witness_value)


def compose(elements: Iterable[GroupElement]) -> list[GroupElement]:
    """Drop identity factors (zero parameter) from a product."""
    return [g for g in elements if g.param != 0]
