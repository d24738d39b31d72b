"""
First prolongation and the infinitesimal symmetry criterion for the planar
plasticity system.

The system has four residuals over the first jet:

    (a) sigma_x - (theta_x cos2theta + theta_y sin2theta) + rho (F1 - u_t - u u_x - v u_y)
    (b) sigma_y - (theta_x sin2theta - theta_y cos2theta) + rho (F2 - v_t - u v_x - v v_y)
    (c) (u_y + v_x) sin2theta + (u_x - v_y) cos2theta
    (d) u_x + v_y

A generator is a symmetry when its prolongation annihilates every residual
on the solution manifold. The manifold is parametrised by solving for
sigma_x, sigma_y, v_x and v_y.
"""
from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import symexpr
from .symexpr import (
    DEFAULT_BOX,
    DEPENDENT,
    INDEPENDENT,
    Expr,
    SamplingBox,
    sigma,
    t,
    theta,
    u,
    v,
    x,
    y,
)
from .vfield import VectorField

LOG = logging.getLogger(__name__)

# ---- Jet coordinates ---------------------------------------------------------

JET: dict[tuple[str, str], sympy.Symbol] = {
    (dep.name, ind.name): sympy.Symbol(f"{dep.name}_{ind.name}", real=True)
    for dep in DEPENDENT for ind in INDEPENDENT
}
JET_VARS: tuple[sympy.Symbol, ...] = tuple(JET.values())


def jet(dep: sympy.Symbol, ind: sympy.Symbol) -> sympy.Symbol:
    return JET[(dep.name, ind.name)]


u_t, u_x, u_y = (jet(u, ind) for ind in INDEPENDENT)
v_t, v_x, v_y = (jet(v, ind) for ind in INDEPENDENT)
sigma_t, sigma_x, sigma_y = (jet(sigma, ind) for ind in INDEPENDENT)
theta_t, theta_x, theta_y = (jet(theta, ind) for ind in INDEPENDENT)

JET_BOX: SamplingBox = DEFAULT_BOX.with_ranges(
    theta=(0.2, 1.2),
    **{sym.name: (-1.0, 1.0) for sym in JET_VARS},
)


def total_derivative(e: Expr, ind: sympy.Symbol) -> Expr:
    """D_i on functions of the base variables, truncated to the first jet."""
    e = sympy.sympify(e)
    out = symexpr.diff(e, ind)
    for dep in DEPENDENT:
        out += jet(dep, ind) * symexpr.diff(e, dep)
    return out


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    jet_coeffs: Mapping[str, Expr]

    def __getitem__(self, name: str) -> Expr:
        if name in self.jet_coeffs:
            return self.jet_coeffs[name]
        return self.base[name]

    def apply(self, e: Expr) -> Expr:
        e = sympy.sympify(e)
        out = self.base.apply(e)
        for sym in JET_VARS:
            coeff = self.jet_coeffs[sym.name]
            if coeff != 0:
                out += coeff * symexpr.diff(e, sym)
        return out


def prolong1(X: VectorField) -> ProlongedField:
    """
    First prolongation, phi^J = D_J phi - sum_i u_i D_J xi^i, for point
    fields whose coefficients live on the base space.
    """
    xis = {ind.name: X[ind] for ind in INDEPENDENT}
    coeffs: dict[str, Expr] = {}
    for dep in DEPENDENT:
        phi = X[dep]
        for J in INDEPENDENT:
            transport = sum((jet(dep, i) * total_derivative(xis[i.name], J) for i in INDEPENDENT),
                            sympy.Integer(0))
            coeffs[jet(dep, J).name] = total_derivative(phi, J) - transport
    return ProlongedField(X, coeffs)


# ---- Forces ------------------------------------------------------------------

Profile = Callable[[Expr], Expr]


def profile(h: Profile | Expr | str) -> Profile:
    """Turn an expression in `s` (or its text) into a one-argument profile."""
    if callable(h) and not isinstance(h, sympy.Basic):
        return h
    body = symexpr.parse(h) if isinstance(h, str) else sympy.sympify(h)
    return lambda arg: body.subs(symexpr.s, arg)


@dataclass(frozen=True)
class Force:
    name: str
    F1: Expr = sympy.Integer(0)
    F2: Expr = sympy.Integer(0)


def null_force() -> Force:
    return Force("none")


def monogenic_force(V: Expr) -> Force:
    V = sympy.sympify(V)
    return Force("monogenic", sympy.diff(V, x), sympy.diff(V, y))


def friction_force(
    h1: Profile | Expr | str,
    h2: Profile | Expr | str,
    k1: Expr,
    k2: Expr,
    *,
    k0: Expr = 0,
    k3: Expr = 0,
    k4: Expr = 0,
) -> Force:
    """
    Velocity-dependent friction force with an optional time-dependent term.

    The velocity part is (u h1 + v h2, v h1 - u h2) exp((k1/k2) atan2(v, u))
    with h1, h2 evaluated at u^2 + v^2. With k3 or k4 nonzero the term
    (t + k0/k1)^-1 (k3 sin phi + k4 cos phi, -k3 cos phi + k4 sin phi),
    phi = (k2/k1) ln(t + k0/k1), is added.
    """
    h1, h2 = profile(h1), profile(h2)
    k0, k1, k2, k3, k4 = (sympy.sympify(k) for k in (k0, k1, k2, k3, k4))
    speed2 = u**2 + v**2
    damping = sympy.exp(k1 / k2 * symexpr.angle(v, u))
    F1 = (u * h1(speed2) + v * h2(speed2)) * damping
    F2 = (v * h1(speed2) - u * h2(speed2)) * damping
    name = "friction"
    if k3 != 0 or k4 != 0:
        shifted = t + k0 / k1
        phase = k2 / k1 * sympy.log(shifted)
        F1 += (k3 * sympy.sin(phase) + k4 * sympy.cos(phase)) / shifted
        F2 += (-k3 * sympy.cos(phase) + k4 * sympy.sin(phase)) / shifted
        name = "friction-time"
    return Force(name, F1, F2)


def spiral_friction_force(
    h1: Profile | Expr | str,
    h2: Profile | Expr | str,
    h3: Profile | Expr | str,
    h4: Profile | Expr | str,
    k1: Expr,
    k2: Expr,
) -> Force:
    """Friction force plus the position term t^-1 (x h3 + y h4, y h3 - x h4) e^{(k1/k2) phi}."""
    base = friction_force(h1, h2, k1, k2)
    h3, h4 = profile(h3), profile(h4)
    k1, k2 = sympy.sympify(k1), sympy.sympify(k2)
    r2 = (x**2 + y**2) / t**2
    spiral = sympy.exp(k1 / k2 * symexpr.angle(y, x)) / t
    F1 = base.F1 + (x * h3(r2) + y * h4(r2)) * spiral
    F2 = base.F2 + (y * h3(r2) - x * h4(r2)) * spiral
    return Force("spiral", F1, F2)


def rotational_force(a2: Expr, potential: Expr = 0, time_power: int = 2) -> Force:
    """
    Force (V_x + a2 y / t^p, V_y - a2 x / t^p) admitting the potential vortex
    superposed on a rigid rotation. The solution family needs p = 2.
    """
    V = sympy.sympify(potential)
    a2 = sympy.sympify(a2)
    return Force(
        f"rotational(p={time_power})",
        sympy.diff(V, x) + a2 * y / t**time_power,
        sympy.diff(V, y) - a2 * x / t**time_power,
    )


# ---- The system --------------------------------------------------------------

@dataclass(frozen=True)
class PDESystem:
    force: Force = field(default_factory=null_force)
    rho: Expr = symexpr.rho

    @property
    def residuals(self) -> tuple[Expr, Expr, Expr, Expr]:
        F1, F2, rho = self.force.F1, self.force.F2, self.rho
        c2, s2 = sympy.cos(2 * theta), sympy.sin(2 * theta)
        return (
            sigma_x - (theta_x * c2 + theta_y * s2) + rho * (F1 - u_t - u * u_x - v * u_y),
            sigma_y - (theta_x * s2 - theta_y * c2) + rho * (F2 - v_t - u * v_x - v * v_y),
            (u_y + v_x) * s2 + (u_x - v_y) * c2,
            u_x + v_y,
        )


EQUATIONS = ("a", "b", "c", "d")


def plasticity_system(force: Force | None = None, rho: Expr = symexpr.rho) -> PDESystem:
    return PDESystem(force or null_force(), rho)


class ManifoldDegenerate(ValueError):
    pass


@dataclass(frozen=True)
class ManifoldSolve:
    solved: Mapping[sympy.Symbol, Expr]

    def substitute(self, e: Expr) -> Expr:
        return sympy.sympify(e).xreplace(dict(self.solved))


def solve_on_manifold(system: PDESystem) -> ManifoldSolve:
    """Solve (d), (c), (a), (b) for v_y, v_x, sigma_x, sigma_y in that order."""
    F1, F2, rho = system.force.F1, system.force.F2, system.rho
    c2, s2 = sympy.cos(2 * theta), sympy.sin(2 * theta)
    vy = -u_x
    vx = -u_y - 2 * u_x * c2 / s2
    sx = theta_x * c2 + theta_y * s2 - rho * (F1 - u_t - u * u_x - v * u_y)
    sy = theta_x * s2 - theta_y * c2 - rho * (F2 - v_t - u * vx - v * vy)
    return ManifoldSolve({v_y: vy, v_x: vx, sigma_x: sx, sigma_y: sy})


# ---- Symmetry criterion --------------------------------------------------------

@dataclass(frozen=True)
class EquationResult:
    equation: str
    passed: bool
    max_residual: float
    witness: dict[str, float] | None = None
    witness_value: float | None = None


@dataclass(frozen=True)
class SymmetryReport:
    generator: str
    force: str
    equations: tuple[EquationResult, ...]
    seed: int
    trials: int

    @property
    def passed(self) -> bool:
        return all(eq.passed for eq in self.equations)

    @property
    def max_residual(self) -> float:
        return max(eq.max_residual for eq in self.equations)


def _require_solvable(box: SamplingBox, trials: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    lo, hi = box.ranges["theta"]
    samples = rng.uniform(lo, hi, size=max(trials, 1))
    if np.all(np.abs(np.sin(2 * samples)) < 1e-6):
        raise ManifoldDegenerate(f"sin(2 theta) vanishes on theta in [{lo}, {hi}]")


def check_symmetry(
    X: VectorField,
    system: PDESystem,
    *,
    label: str = "X",
    box: SamplingBox = JET_BOX,
    trials: int = 32,
    tol: float = 1e-8,
    seed: int = 0,
    params: Mapping[str, float] | None = None,
    bindings: Mapping[str, symexpr.FunctionBinding] | None = None,
) -> SymmetryReport:
    """
    Apply the symmetry criterion to one generator.

    Each residual is hit with the first prolongation of X, the solved
    derivatives are substituted, and the result is zero-tested on the jet box.

    Args:
        X:        The candidate generator.
        system:   System with its force.
        label:    Generator name echoed in the report.
        box:      Sampling box over base and jet variables.
        trials:   Sample points per equation.
        tol:      Relative zero-test tolerance.
        seed:     Seed for the sampling generator.
        params:   Numeric values for rho and any other free parameter.
        bindings: Numeric stand-ins for formal slot functions.

    Returns:
        A SymmetryReport with per-equation maxima and the first witness.

    Raises:
        ManifoldDegenerate: sin(2 theta) vanishes at every sample.
    """
    _require_solvable(box, trials, seed)
    pr = prolong1(X)
    manifold = solve_on_manifold(system)
    params = {"rho": 1.0, **(params or {})}

    results = []
    for name, delta in zip(EQUATIONS, system.residuals, strict=True):
        expr = manifold.substitute(pr.apply(delta))
        test = symexpr.is_zero(expr, box, trials=trials, tol=tol, seed=seed,
                               params=params, bindings=bindings)
        results.append(EquationResult(name, test.is_zero, test.max_residual, test.witness,
                                      test.witness_value))
    report = SymmetryReport(label, system.force.name, tuple(results), seed, trials)
    if not report.passed:
        LOG.info("%s is not a symmetry with force %s", label, system.force.name)
    return report
