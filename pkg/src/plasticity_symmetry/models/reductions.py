"""
Invariants and invariant-solution ansatzes for the two wired reductions:
the rotation-dilation subalgebra <D, L> under a monogenic force, and the
friction generator K.
"""
from __future__ import annotations

import dataclasses
import logging
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import sympy

from ..engine import symexpr
from ..engine.symexpr import (
    DEFAULT_BOX,
    DEPENDENT,
    INDEPENDENT,
    Expr,
    SamplingBox,
    ZeroTest,
    angle,
    kappa0,
    kappa1,
    kappa2,
    sigma,
    t,
    theta,
    u,
    v,
    x,
    xi,
    y,
)
from ..engine.vfield import FACTOR_KINDS, Combination, VectorField
from .subalgebras import Subalgebra

LOG = logging.getLogger(__name__)

KAPPA_SAMPLE = {"kappa1": 1.0, "kappa2": 2.0}


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class AnnihilationCheck:
    generator: str
    invariant: str
    passed: bool
    max_residual: float


@dataclass(frozen=True)
class ReducedCoords:
    """
    Invariants of a reducing subalgebra.

    Attributes:
        key:        "DL" or "K".
        variables:  Symmetry variables, by name (xi; or r and xi).
        invariants: The remaining invariants T1, T2, R, S.
        checks:     One annihilation test per basis generator and invariant.
    """
    key: str
    variables: Mapping[str, Expr]
    invariants: Mapping[str, Expr]
    checks: tuple[AnnihilationCheck, ...] = ()

    @property
    def annihilated(self) -> bool:
        return all(c.passed for c in self.checks)

    def all(self) -> dict[str, Expr]:
        return {**self.variables, **self.invariants}


def _with_potential(combo: Combination, V: Expr) -> Combination:
    terms = tuple(
        (c, dataclasses.replace(spec, potential=V) if spec.kind in FACTOR_KINDS else spec)
        for c, spec in combo.terms
    )
    return Combination(terms)


def _dl_invariants(V: Expr, rho: Expr) -> tuple[dict[str, Expr], dict[str, Expr]]:
    variables = {"xi": (x**2 + y**2) / t**2}
    invariants = {
        "T1": theta - angle(y, x),
        "T2": theta - angle(v, u),
        "R": u**2 + v**2,
        "S": sigma + rho * V,
    }
    return variables, invariants


def _k_invariants(k0: Expr, k1: Expr, k2: Expr) -> tuple[dict[str, Expr], dict[str, Expr]]:
    tau = t + k0 / k1
    variables = {
        "r": (x**2 + y**2) / tau**2,
        "xi": k2 * sympy.log(tau) + k1 * angle(y, x),
    }
    invariants = {
        "R": u**2 + v**2,
        "T1": k2 * sympy.log(tau) + k1 * theta,
        "T2": k2 * sympy.log(tau) + k1 * angle(v, u),
        "S": sigma,
    }
    return variables, invariants


def invariants_of(
    s: Subalgebra,
    potential: Expr | None = None,
    *,
    box: SamplingBox = DEFAULT_BOX,
    params: Mapping[str, float] | None = None,
    trials: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
) -> ReducedCoords:
    """
    Functionally independent invariants of a reducing subalgebra.

    Each invariant is checked to be annihilated by every basis generator.
    For <D, L> the generators carry the potential V so that sigma + rho V
    is invariant.

    Args:
        s:         A subalgebra with key "DL" or "K".
        potential: V(t, x, y) of the monogenic force; 0 when omitted.
        box:       Sampling box.
        params:    Numeric values for rho and the kappa parameters.
        trials:    Sample points per annihilation test.
        tol:       Relative zero-test tolerance.
        seed:      Sampling seed.

    Raises:
        Unsupported: The subalgebra has no wired invariants.
    """
    rho = symexpr.rho
    params = {"rho": 1.0, **KAPPA_SAMPLE, **(params or {})}
    V = sympy.sympify(potential) if potential is not None else sympy.Integer(0)
    match s.key:
        case "DL":
            variables, invariants = _dl_invariants(V, rho)
            basis = [_with_potential(c, V) for c in s.basis]
        case "K":
            kappas = s.basis[0].terms[0][1].kappa or (kappa0, kappa1, kappa2)
            variables, invariants = _k_invariants(*kappas)
            basis = list(s.basis)
        case _:
            raise Unsupported(f"no wired reduction for {s.label}")

    checks = []
    for combo in basis:
        field = combo.instantiate(rho)
        for name, inv in {**variables, **invariants}.items():
            test = symexpr.is_zero(field.apply(inv), box, trials=trials, tol=tol, seed=seed,
                                   params=params)
            checks.append(AnnihilationCheck(combo.label(), name, test.is_zero,
                                            test.max_residual))
            if not test:
                LOG.warning("%s does not annihilate %s", combo.label(), name)
    return ReducedCoords(s.key, variables, invariants, tuple(checks))


# ---- Ansatzes ------------------------------------------------------------------

def dl_ansatz(
    R: Expr,
    T1: Expr,
    T2: Expr,
    S: Expr,
    potential: Expr = 0,
    rho: Expr = symexpr.rho,
) -> dict[str, Expr]:
    """
    Invert the <D, L> invariants: fields (u, v, sigma, theta) from reduced
    functions of xi.
    """
    sym = (x**2 + y**2) / t**2
    R, T1, T2, S = (sympy.sympify(e).subs(xi, sym) for e in (R, T1, T2, S))
    phase = T1 - T2 + angle(y, x)
    return {
        "u": sympy.sqrt(R) * sympy.cos(phase),
        "v": sympy.sqrt(R) * sympy.sin(phase),
        "sigma": S - rho * sympy.sympify(potential),
        "theta": T1 + angle(y, x),
    }


def k_ansatz(
    R: Expr,
    T1: Expr,
    T2: Expr,
    S: Expr,
    *,
    k1: Expr = kappa1,
    k2: Expr = kappa2,
    denominators: tuple[Expr, Expr] | None = None,
) -> dict[str, Expr]:
    """
    Invert the K invariants. R, T1, T2, S are functions of the symbols
    `r` and `xi`. `denominators` divides the u and v phases; both are k1
    unless given.
    """
    du, dv = denominators or (k1, k1)
    variables = {symexpr.r: (x**2 + y**2) / t**2, xi: k2 * sympy.log(t) + k1 * angle(y, x)}
    R, T1, T2, S = (sympy.sympify(e).subs(variables, simultaneous=True)
                    for e in (R, T1, T2, S))
    phase = T2 - k2 * sympy.log(t)
    return {
        "u": R * sympy.cos(phase / du),
        "v": R * sympy.sin(phase / dv),
        "sigma": S,
        "theta": T1 - k2 / k1 * sympy.log(t),
    }


def ansatz_invariance(
    X: VectorField,
    ansatz: Mapping[str, Expr],
    *,
    box: SamplingBox = DEFAULT_BOX,
    params: Mapping[str, float] | None = None,
    trials: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
) -> dict[str, ZeroTest]:
    """
    Decide whether the graph q = Q(t, x, y) of each ansatz field is invariant
    under X, i.e. X[q] - sum_i X[x_i] dQ/dx_i vanishes on the graph.
    """
    params = {"rho": 1.0, **KAPPA_SAMPLE, **(params or {})}
    on_graph = {dep: sympy.sympify(ansatz[dep.name]) for dep in DEPENDENT if dep.name in ansatz}
    out: dict[str, ZeroTest] = {}
    for dep, Q in on_graph.items():
        transport = sum((X[ind] * sympy.diff(Q, ind) for ind in INDEPENDENT), sympy.Integer(0))
        residual = (X[dep] - transport).xreplace(on_graph)
        out[dep.name] = symexpr.is_zero(residual, box, trials=trials, tol=tol, seed=seed,
                                        params=params)
    return out


# ---- First integral ------------------------------------------------------------

@dataclass(frozen=True)
class FirstIntegralCheck:
    passed: bool
    spread: float
    max_derivative: float
    offset: float
    grid: tuple[float, float, int]


def first_integral_check(
    R: Expr | str,
    T1: Expr | str,
    T2: Expr | str,
    a1: float,
    *,
    grid: tuple[float, float, int] = (0.5, 2.0, 41),
    tol: float = 1e-10,
    params: Mapping[str, float] | None = None,
) -> FirstIntegralCheck:
    """
    Evaluate (1/2) xi R (1 + cos(2 T1 - 2 T2)) - a1 along a xi grid.

    The candidate passes when the quantity and its xi-derivative are constant
    to `tol`. `offset` is the largest distance of the quantity from a1.
    """
    R, T1, T2 = (symexpr.parse(e) if isinstance(e, str) else sympy.sympify(e)
                 for e in (R, T1, T2))
    values = dict(params or {})
    values["a1"] = a1
    quantity = sympy.Rational(1, 2) * xi * R * (1 + sympy.cos(2 * T1 - 2 * T2))
    bound = quantity.subs({sym: values[sym.name] for sym in quantity.free_symbols
                           if sym.name in values})
    extra = bound.free_symbols - {xi}
    if extra:
        raise symexpr.UnboundSymbol(
            f"no value for {', '.join(sorted(sym.name for sym in extra))}")
    q = sympy.lambdify(xi, bound, modules="numpy")
    dq = sympy.lambdify(xi, sympy.diff(bound, xi), modules="numpy")
    points = np.linspace(*grid[:2], grid[2])
    qs = np.broadcast_to(np.asarray(q(points), dtype=float), points.shape)
    dqs = np.broadcast_to(np.asarray(dq(points), dtype=float), points.shape)
    spread = float(np.max(qs) - np.min(qs))
    max_derivative = float(np.max(np.abs(dqs)))
    offset = float(np.max(np.abs(qs - a1)))
    passed = spread <= tol and max_derivative <= tol
    if not passed:
        LOG.info("first integral varies by %.3e on [%g, %g]", spread, grid[0], grid[1])
    return FirstIntegralCheck(passed, spread, max_derivative, offset, grid)


def candidate_r8(a1: Expr = symexpr.a1) -> tuple[Expr, Expr, Expr]:
    """R = a1 / xi with T1 = T2 = pi/4."""
    return a1 / xi, sympy.pi / 4, sympy.pi / 4


def candidate_r11(b1: Expr = symexpr.b1) -> tuple[Expr, Expr, Expr]:
    """a1 = 0 branch: R = b1^2 xi with T1 = T2 - pi/2."""
    return b1**2 * xi, sympy.Integer(0), sympy.pi / 2


CANDIDATES = {"R8": candidate_r8, "R11": candidate_r11}
