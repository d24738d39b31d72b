"""
Normal form of one-dimensional subalgebras <X_f + Y_g> of B for polynomial slots.

The reduction rotates away a proportional Y-part, translates a real root
of f to t = 0, divides by the first non-vanishing coefficient and dilates
until the next coefficient is +-1. A constant f is divided out and the same
translation and dilation are then applied to g.

Only roots inside the working window are translated. A slot whose real roots
all lie outside it is left untranslated and undilated, so that a dilation
cannot pull one of those roots into the window.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.optimize
import sympy

from ..engine.adjoint import GroupElement, conjugate, rescale_slot, shift_slot
from ..engine.symexpr import DEFAULT_BOX, Expr, SamplingBox, t
from ..engine.vfield import D, L, P0, X, Y, Combination, FieldZeroTest, field_is_zero

LOG = logging.getLogger(__name__)

EPS = 1e-12


class NoRealRoot(ValueError):
    pass


class BothZero(ValueError):
    pass


@dataclass(frozen=True)
class NormalForm:
    """
    Result of the one-dimensional reduction.

    Attributes:
        f, g:          Input slots.
        f_normal:      Reduced X-slot, t^m1 + mu (t^m2 + ...), or 1 on the constant branch.
        g_normal:      Reduced Y-slot.
        m1, m2, mu:    Shape of the reduced X-slot.
        conjugator:    Group elements in product order; applied right to left.
        rescale:       Factor multiplying the conjugated field to reach the normal form.
        branch:        "root", "no-root" or "constant".
        root_fallback: True when the slot being reduced had no real root in the window.
        rotation:      Rotation parameter used to remove a proportional Y-part, if any.
        m3, m4:        Lowest and next degree of g_normal on the constant branch.
    """
    f: Expr
    g: Expr
    f_normal: Expr
    g_normal: Expr
    m1: int
    m2: int
    mu: int
    conjugator: tuple[GroupElement, ...]
    rescale: Expr
    branch: str
    root_fallback: bool = False
    rotation: Expr | None = None
    m3: int = 0
    m4: int = 0

    @property
    def combination(self) -> Combination:
        return X(self.f_normal) + Y(self.g_normal)

    def summary(self) -> dict[str, object]:
        return {
            "f": sympy.sstr(self.f_normal),
            "g": sympy.sstr(self.g_normal),
            "m1": self.m1,
            "m2": self.m2,
            "mu": self.mu,
            "m3": self.m3,
            "m4": self.m4,
            "branch": self.branch,
            "root_fallback": self.root_fallback,
            "rescale": sympy.sstr(self.rescale),
            "conjugator": [g.label() for g in self.conjugator],
        }


# ---- Polynomial helpers ---------------------------------------------------------

def _clean(e: Expr) -> Expr:
    """Expand and drop float coefficients below EPS relative to the largest one."""
    terms = sympy.Poly(sympy.expand(e), t).terms()
    floor = EPS * max([1.0] + [abs(float(c)) for _, c in terms])
    return sympy.Add(*(c * t**k for (k,), c in terms if not (c.is_Float and abs(c) < floor)))


def _coeffs(e: Expr) -> dict[int, Expr]:
    """Nonzero coefficients by degree."""
    return {k: c for (k,), c in sympy.Poly(e, t).terms() if c != 0}


def _rational(e: Expr) -> sympy.Poly:
    poly = sympy.Poly(e, t)
    coeffs = [c if c.is_Rational else sympy.Rational(Fraction(float(c)).limit_denominator(10**15))
              for c in poly.all_coeffs()]
    return sympy.Poly(coeffs, t)


def real_roots(f: Expr) -> list[Expr]:
    """
    Real roots of a polynomial: exact where rational, otherwise isolated by
    sympy and refined by bisection.
    """
    poly = _rational(f)
    exact = {sympy.nsimplify(r) for r in poly.ground_roots() if r.is_real}
    roots: list[Expr] = sorted(exact, key=lambda r: abs(float(r)))
    # square-free, so every isolated root is a sign change
    sqf = poly.sqf_part()
    numeric = np.poly1d([float(c) for c in sqf.all_coeffs()])
    for (lo, hi), _ in sqf.intervals():
        if lo == hi:
            if lo not in exact:
                roots.append(sympy.Rational(lo))
            continue
        if any(lo <= r <= hi for r in exact):
            continue
        roots.append(sympy.Float(scipy.optimize.bisect(numeric, float(lo), float(hi),
                                                       xtol=1e-15)))
    return roots


def pick_root(f: Expr, window: tuple[float, float] = (-3.0, 3.0)) -> Expr:
    """
    The root used for the translation: zero if f(0) = 0, else the root
    nearest 0 inside the window.

    Raises:
        NoRealRoot: f has no real root in the window.
    """
    lo, hi = window
    if lo <= 0 <= hi and abs(float(_coeffs(f).get(0, 0))) < EPS:
        return sympy.Integer(0)
    inside = [r for r in real_roots(f) if lo <= float(r) <= hi]
    if not inside:
        raise NoRealRoot(f"{sympy.sstr(f)} has no real root in [{lo:g}, {hi:g}]")
    return min(inside, key=lambda r: abs(float(r)))


def _wronskian_vanishes(f: Expr, g: Expr) -> bool:
    w = _clean(f * sympy.diff(g, t) - g * sympy.diff(f, t))
    return w == 0


# ---- Reduction ---------------------------------------------------------------

def normal_form_1d(
    f: Expr | str,
    g: Expr | str = 0,
    *,
    window: tuple[float, float] = (-3.0, 3.0),
) -> NormalForm:
    """
    Reduce <X_f + Y_g> to its normal form.

    Args:
        f:      Polynomial X-slot.
        g:      Polynomial Y-slot.
        window: Working interval; only a root inside it is moved to t = 0.

    Returns:
        The NormalForm, including the conjugator and rescale factor so that
        rescale * Ad(conjugator)(X_f + Y_g) equals the normal form.

    Raises:
        BothZero:   f and g are both zero.
        ValueError: A slot is not a polynomial in t with numeric coefficients.
    """
    f_in, g_in = sympy.sympify(f), sympy.sympify(g)
    for slot in (f_in, g_in):
        if not slot.is_polynomial(t) or slot.free_symbols - {t}:
            raise ValueError(f"normal form needs polynomial slots, got {sympy.sstr(slot)}")
    cur_f, cur_g = _clean(f_in), _clean(g_in)
    if cur_f == 0 and cur_g == 0:
        raise BothZero("f and g are both zero")

    steps: list[GroupElement] = []
    rotation = None

    if cur_g != 0 and _wronskian_vanishes(cur_f, cur_g):
        if cur_f == 0:
            beta = -sympy.pi / 2
        else:
            k = sympy.nsimplify(sympy.cancel(cur_g / cur_f))
            beta = -sympy.atan(k)
        steps.append(GroupElement(L(), beta))
        rotation = beta
        cur_f, cur_g = (_clean(sympy.cos(beta) * cur_f - sympy.sin(beta) * cur_g),
                        _clean(sympy.sin(beta) * cur_f + sympy.cos(beta) * cur_g))

    if sympy.Poly(cur_f, t).degree() <= 0:
        return _constant_branch(f_in, g_in, cur_f, cur_g, steps, rotation, window)

    t0, fallback = _translation(cur_f, window)
    if t0 != 0:
        steps.append(GroupElement(P0(), t0))
        cur_f, cur_g = _clean(shift_slot(cur_f, t0)), _clean(shift_slot(cur_g, t0))

    coeffs = _coeffs(cur_f)
    degrees = sorted(coeffs)
    m1 = degrees[0]
    higher = degrees[1:]
    m2, mu = m1, 0
    if higher:
        m2 = higher[0]
        ratio = coeffs[m2] / coeffs[m1]
        mu = 1 if ratio > 0 else -1
        if _may_dilate(cur_f, fallback) and abs(abs(float(ratio)) - 1) > EPS:
            alpha = -sympy.log(abs(ratio)) / (m2 - m1)
            steps.append(GroupElement(D(), alpha))
            scale = sympy.exp(-alpha)
            cur_f = _clean(scale * rescale_slot(cur_f, alpha))
            cur_g = _clean(scale * rescale_slot(cur_g, alpha))

    lead = _coeffs(cur_f)[m1]
    f_normal, g_normal = _clean(cur_f / lead), _clean(cur_g / lead)
    LOG.debug("normal form m1=%d m2=%d mu=%d", m1, m2, mu)
    return NormalForm(f_in, g_in, f_normal, g_normal, m1, m2, mu, tuple(reversed(steps)),
                      1 / lead, "no-root" if fallback else "root", fallback, rotation)


def _translation(p: Expr, window: tuple[float, float]) -> tuple[Expr, bool]:
    """Root of p to move to t = 0, and whether the no-root fallback applies."""
    try:
        return pick_root(p, window), False
    except NoRealRoot as e:
        LOG.info("%s; keeping the expansion at t = 0", e)
        return sympy.Integer(0), True


def _may_dilate(p: Expr, fallback: bool) -> bool:
    """On the fallback only a slot with no real root at all may be dilated."""
    return not fallback or not real_roots(p)


def _constant_branch(
    f_in: Expr,
    g_in: Expr,
    c: Expr,
    cur_g: Expr,
    steps: list[GroupElement],
    rotation: Expr | None,
    window: tuple[float, float],
) -> NormalForm:
    """
    f = c: divide by c, move a root of g to t = 0 and dilate until the lowest
    positive-degree coefficient of g is +-1. X_1 is fixed by both moves once
    the dilation's factor e^-alpha is absorbed into the rescale.
    """
    LOG.debug("constant branch with f = %s", c)
    cur_g = _clean(cur_g / c)
    rescale = 1 / c
    fallback = False
    if sympy.Poly(cur_g, t).degree() > 0:
        t0, fallback = _translation(cur_g, window)
        if t0 != 0:
            steps.append(GroupElement(P0(), t0))
            cur_g = _clean(shift_slot(cur_g, t0))

    coeffs = _coeffs(cur_g)
    degrees = sorted(coeffs)
    m3 = degrees[0] if degrees else 0
    m4 = degrees[1] if len(degrees) > 1 else m3
    positive = [k for k in degrees if k > 0]
    if positive and _may_dilate(cur_g, fallback):
        k = positive[0]
        size = abs(coeffs[k])
        if abs(float(size) - 1) > EPS:
            alpha = -sympy.log(size) / k
            steps.append(GroupElement(D(), alpha))
            cur_g = _clean(rescale_slot(cur_g, alpha))
            rescale = rescale * sympy.exp(alpha)
    return NormalForm(f_in, g_in, sympy.Integer(1), cur_g, 0, 0, 0, tuple(reversed(steps)),
                      rescale, "constant", fallback, rotation, m3, m4)


def roundtrip(
    nf: NormalForm,
    *,
    box: SamplingBox = DEFAULT_BOX,
    rho: float = 1.0,
    tol: float = 1e-9,
    seed: int = 0,
) -> FieldZeroTest:
    """Zero-test rescale * Ad(conjugator)(X_f + Y_g) - (X_fn + Y_gn)."""
    image = conjugate(nf.conjugator, X(nf.f) + Y(nf.g))
    diff = (image * nf.rescale).instantiate() - nf.combination.instantiate()
    return field_is_zero(diff, box, tol=tol, seed=seed, params={"rho": rho})
