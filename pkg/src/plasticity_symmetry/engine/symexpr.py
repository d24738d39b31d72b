"""
Expression kernel for the plasticity symmetry engine.

Expressions are sympy trees over the seven base variables of the planar
plasticity system, named parameters and formal functions of time. Nothing in
here canonicalises: identities are decided by evaluating at random points
(see `is_zero`), and evaluation reports domain violations instead of
returning NaN.
"""
from __future__ import annotations

import logging
import math
import re
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from tokenize import TokenError

import numpy as np
import sympy
from sympy.core.function import AppliedUndef, UndefinedFunction
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)

LOG = logging.getLogger(__name__)

Expr = sympy.Expr

# ---- Variables and parameters ------------------------------------------------

t, x, y, u, v, sigma, theta = sympy.symbols("t x y u v sigma theta", real=True)

BASE_VARS: tuple[sympy.Symbol, ...] = (t, x, y, u, v, sigma, theta)
INDEPENDENT: tuple[sympy.Symbol, ...] = (t, x, y)
DEPENDENT: tuple[sympy.Symbol, ...] = (u, v, sigma, theta)

rho = sympy.Symbol("rho", positive=True)
kappa0, kappa1, kappa2, kappa3, kappa4 = sympy.symbols("kappa0:5", real=True)
a1, a2, a3 = sympy.symbols("a1:4", real=True)
b1, b2, b3 = sympy.symbols("b1:4", real=True)
c1, c2, c3 = sympy.symbols("c1:4", real=True)

# Reduction variables and the dummy argument of force profiles h(s).
xi, r = sympy.symbols("xi r", positive=True)
s = sympy.Symbol("s", real=True)

PARAMETERS: tuple[sympy.Symbol, ...] = (
    rho, kappa0, kappa1, kappa2, kappa3, kappa4, a1, a2, a3, b1, b2, b3, c1, c2, c3,
)

_REGISTRY: dict[str, sympy.Symbol] = {
    sym.name: sym for sym in (*BASE_VARS, *PARAMETERS, xi, r, s)
}
_REGISTRY.update({"σ": sigma, "θ": theta, "ρ": rho, "ξ": xi})


class UnknownVariable(ValueError):
    pass


class UnboundSymbol(ValueError):
    pass


class DomainViolation(ValueError):
    """Raised when a point lies outside the domain of some subterm."""

    def __init__(self, subterm: sympy.Basic, detail: str = ""):
        self.subterm = subterm
        msg = f"domain violation in {sympy.sstr(subterm)}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class AllPointsOutOfDomain(ValueError):
    pass


class ParseError(ValueError):
    pass


def variable(name: str) -> sympy.Symbol:
    """Look up a base variable, parameter or reduction variable by name."""
    try:
        return _REGISTRY[name]
    except KeyError as e:
        raise UnknownVariable(f"unknown variable {name!r}") from e


def formal(name: str) -> UndefinedFunction:
    """A formal function symbol such as f, g, h or V."""
    return sympy.Function(name)


def angle(num: Expr, den: Expr) -> Expr:
    """The two-argument angle standing in for arctan(num/den)."""
    return sympy.atan2(num, den)


def diff(e: Expr, var: sympy.Symbol) -> Expr:
    if not isinstance(var, sympy.Symbol):
        raise UnknownVariable(f"cannot differentiate with respect to {var!r}")
    return sympy.diff(sympy.sympify(e), var)


def substitute(e: Expr, mapping: Mapping[sympy.Basic, Expr]) -> Expr:
    return sympy.sympify(e).subs(dict(mapping), simultaneous=True)


# ---- Function bindings ---------------------------------------------------------

@dataclass(frozen=True)
class FunctionBinding:
    """
    Numeric stand-in for a formal function of one argument.

    Attributes:
        name:        Name of the formal function being bound.
        derivatives: Callables for the value and successive derivatives.
        expr:        Closed form in `t` when one is known. Expression bindings
                     are substituted symbolically before compilation so every
                     derivative order is available.
    """
    name: str
    derivatives: tuple[Callable[[float], float], ...] = ()
    expr: Expr | None = None

    @classmethod
    def from_expr(cls, name: str, expr: Expr | str, var: sympy.Symbol = t) -> FunctionBinding:
        body = parse(expr) if isinstance(expr, str) else sympy.sympify(expr)
        return cls(name=name, expr=body.subs(var, t))

    @classmethod
    def from_callable(cls, name: str, *derivatives: Callable[[float], float]) -> FunctionBinding:
        if not derivatives:
            raise ValueError(f"binding for {name} needs at least a value callable")
        return cls(name=name, derivatives=tuple(derivatives))

    def value(self, arg: float, order: int = 0) -> float:
        if self.expr is not None:
            d = sympy.diff(self.expr, t, order) if order else self.expr
            return float(d.subs(t, arg))
        if order >= len(self.derivatives):
            raise UnboundSymbol(f"{self.name} has no bound derivative of order {order}")
        return float(self.derivatives[order](arg))


@dataclass(frozen=True)
class _Slot:
    dummy: sympy.Dummy
    binding: FunctionBinding
    order: int
    arg: Expr


def _undefined_nodes(e: Expr) -> list[sympy.Basic]:
    """Outermost Subs/Derivative/application nodes of undefined functions."""
    found: list[sympy.Basic] = []

    def formal_call(node: sympy.Basic) -> bool:
        # nodes carrying their own numeric implementation (quadratures) are not slots
        return isinstance(node, AppliedUndef) and not hasattr(node.func, "_imp_")

    def walk(node: sympy.Basic) -> None:
        if isinstance(node, sympy.Subs) and any(map(formal_call, node.expr.atoms(AppliedUndef))):
            found.append(node)
            return
        if isinstance(node, sympy.Derivative) and formal_call(node.expr):
            found.append(node)
            return
        if formal_call(node):
            found.append(node)
            return
        for arg in node.args:
            walk(arg)

    walk(e)
    return found


def _slot_for(node: sympy.Basic) -> tuple[str, int, Expr]:
    inner = node.expr if isinstance(node, sympy.Derivative | sympy.Subs) else node
    if isinstance(inner, sympy.Derivative):
        inner = inner.expr
    if isinstance(inner, AppliedUndef) and len(inner.args) != 1:
        raise UnboundSymbol(f"{inner.func.__name__} takes {len(inner.args)} arguments; "
                            "only functions of one argument can be bound")
    if isinstance(node, AppliedUndef):
        return node.func.__name__, 0, node.args[0]
    if isinstance(node, sympy.Derivative):
        inner = node.expr
        order = sum(count for _, count in node.variable_count)
        return inner.func.__name__, order, inner.args[0]
    # Subs(Derivative(f(d), (d, k)), d, arg)
    inner = node.expr
    if isinstance(inner, sympy.Derivative) and isinstance(inner.expr, AppliedUndef):
        order = sum(count for _, count in inner.variable_count)
        arg = inner.expr.args[0].subs(dict(zip(node.variables, node.point, strict=True)))
        return inner.expr.func.__name__, order, arg
    raise UnboundSymbol(f"cannot bind {sympy.sstr(node)}")


def bind_functions(e: Expr, bindings: Mapping[str, FunctionBinding]) -> Expr:
    """Substitute expression bindings in place of their formal functions."""
    for b in bindings.values():
        if b.expr is None:
            continue
        body = b.expr
        e = e.replace(formal(b.name), lambda arg, body=body: body.subs(t, arg))
    return e.doit() if bindings else e


class CompiledExpr:
    """
    One or more expressions lambdified over a shared argument list.

    Formal functions bound to callables are replaced by dummies whose values
    are computed from the binding before each call.
    """

    def __init__(
        self,
        exprs: Expr | Sequence[Expr],
        bindings: Mapping[str, FunctionBinding] | None = None,
    ):
        bindings = dict(bindings or {})
        if isinstance(exprs, sympy.Basic | int | float):
            exprs = [exprs]
        prepared = [bind_functions(sympy.sympify(e), bindings) for e in exprs]

        slots: dict[sympy.Basic, _Slot] = {}
        for e in prepared:
            for node in _undefined_nodes(e):
                if node in slots:
                    continue
                name, order, arg = _slot_for(node)
                if name not in bindings:
                    raise UnboundSymbol(f"formal function {name} is not bound")
                slots[node] = _Slot(sympy.Dummy(f"{name}{order}"), bindings[name], order, arg)

        replace = {node: slot.dummy for node, slot in slots.items()}
        self.exprs: tuple[Expr, ...] = tuple(e.xreplace(replace) for e in prepared)
        self._slots = tuple(slots.values())

        free: set[sympy.Symbol] = set()
        for e in self.exprs:
            free |= e.free_symbols
        for slot in self._slots:
            free |= slot.arg.free_symbols
        dummies = {slot.dummy for slot in self._slots}
        self.symbols: tuple[sympy.Symbol, ...] = tuple(
            sorted(free - dummies, key=lambda sym: sym.name)
        )
        self._args = (*self.symbols, *(slot.dummy for slot in self._slots))
        self._fn = sympy.lambdify(self._args, list(self.exprs), modules="math")
        self._arg_fns = [sympy.lambdify(self.symbols, slot.arg, modules="math")
                         for slot in self._slots]

    def _values(self, point: Mapping[str, float]) -> list[float]:
        values = []
        for sym in self.symbols:
            if sym.name not in point:
                raise UnboundSymbol(f"no value for {sym.name}")
            values.append(float(point[sym.name]))
        for slot, arg_fn in zip(self._slots, self._arg_fns, strict=True):
            values.append(slot.binding.value(float(arg_fn(*values[: len(self.symbols)])),
                                             slot.order))
        return values

    def __call__(self, point: Mapping[sympy.Symbol | str, float]) -> tuple[float, ...]:
        point = _by_name(point)
        values = self._values(point)
        try:
            out = self._fn(*values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainViolation(self._locate(values), str(exc)) from exc
        result = []
        for e, val in zip(self.exprs, out, strict=True):
            if isinstance(val, complex) or not math.isfinite(val):
                raise DomainViolation(self._locate(values, e), f"value {val}")
            result.append(float(val))
        return tuple(result)

    def _locate(self, values: Sequence[float], root: Expr | None = None) -> sympy.Basic:
        """Innermost subterm whose evaluation fails at `values`."""

        def fails(node: sympy.Basic) -> bool:
            try:
                val = sympy.lambdify(self._args, node, modules="math")(*values)
            except (ValueError, ZeroDivisionError, OverflowError, TypeError):
                return True
            return isinstance(val, complex) or (
                isinstance(val, float) and not math.isfinite(val))

        node = root if root is not None else next(
            (e for e in self.exprs if fails(e)), self.exprs[0])
        while True:
            bad = next((arg for arg in node.args if isinstance(arg, sympy.Expr) and fails(arg)),
                       None)
            if bad is None:
                return node
            node = bad


def _by_name(point: Mapping[sympy.Symbol | str, float]) -> dict[str, float]:
    return {(k.name if isinstance(k, sympy.Symbol) else str(k)): v for k, v in point.items()}


def evaluate(
    e: Expr,
    point: Mapping[sympy.Symbol | str, float],
    bindings: Mapping[str, FunctionBinding] | None = None,
) -> float:
    """
    Evaluate an expression at a numeric point.

    Args:
        e:        Expression to evaluate.
        point:    Values for every free symbol, keyed by symbol or name.
        bindings: Numeric stand-ins for formal functions, keyed by name.

    Returns:
        The value as a Python float.

    Raises:
        UnboundSymbol:   A free symbol or formal function has no value.
        DomainViolation: Some subterm is undefined at the point; the error
                         names the innermost offending subterm.
    """
    return CompiledExpr(e, bindings)(point)[0]


# ---- Randomised zero testing -------------------------------------------------

@dataclass(frozen=True)
class SamplingBox:
    """
    Per-variable sampling ranges.

    `nonzero` maps a variable name to a half-width around zero that samples
    must avoid (used for u, v so that v/u stays bounded).
    """
    ranges: Mapping[str, tuple[float, float]]
    nonzero: Mapping[str, float] = field(default_factory=dict)

    def with_ranges(self, **ranges: tuple[float, float]) -> SamplingBox:
        merged = {**self.ranges, **ranges}
        return SamplingBox(ranges=merged, nonzero=dict(self.nonzero))

    def sample(self, rng: np.random.Generator) -> dict[str, float]:
        point: dict[str, float] = {}
        for name, (lo, hi) in self.ranges.items():
            margin = self.nonzero.get(name)
            if margin is not None and lo < 0 < hi:
                magnitude = rng.uniform(margin, max(-lo, hi))
                point[name] = float(magnitude if rng.random() < 0.5 else -magnitude)
            else:
                point[name] = float(rng.uniform(lo, hi))
        return point


DEFAULT_BOX = SamplingBox(
    ranges={
        "t": (0.5, 2.0), "x": (0.5, 2.0), "y": (0.5, 2.0),
        "u": (-1.0, 1.0), "v": (-1.0, 1.0),
        "sigma": (-1.0, 1.0), "theta": (-1.0, 1.0),
    },
    nonzero={"u": 0.1, "v": 0.1},
)


@dataclass(frozen=True)
class ZeroTest:
    is_zero: bool
    trials: int
    seed: int
    max_residual: float = 0.0
    skipped: int = 0
    witness: dict[str, float] | None = None
    witness_value: float | None = None

    def __bool__(self) -> bool:
        return self.is_zero


def is_zero(
    e: Expr,
    box: SamplingBox = DEFAULT_BOX,
    *,
    trials: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
    bindings: Mapping[str, FunctionBinding] | None = None,
    params: Mapping[str, float] | None = None,
) -> ZeroTest:
    """
    Decide whether an expression vanishes identically on a sampling box.

    A point passes when |e| <= tol * (1 + largest |term|), the terms being
    the top-level summands of e. Points outside the domain of e are skipped
    and counted. The first failing point is returned as the witness.

    Raises:
        AllPointsOutOfDomain: No sampled point was inside the domain.
    """
    e = sympy.sympify(e)
    if e == 0:
        return ZeroTest(True, trials, seed)

    terms = sympy.Add.make_args(e)
    compiled = CompiledExpr([e, *terms] if len(terms) > 1 else [e], bindings)
    rng = np.random.default_rng(seed)
    fixed = dict(params or {})

    accepted = skipped = 0
    worst = 0.0
    for _ in range(8 * trials):
        if accepted == trials:
            break
        point = {**box.sample(rng), **fixed}
        try:
            values = compiled(point)
        except DomainViolation:
            skipped += 1
            continue
        accepted += 1
        value = values[0]
        scale = max((abs(val) for val in values[1:]), default=abs(value))
        residual = abs(value) / (1.0 + scale)
        worst = max(worst, residual)
        if residual > tol:
            LOG.debug("nonzero at %s: %.3e", point, value)
            return ZeroTest(False, trials, seed, worst, skipped, point, value)

    if accepted == 0:
        raise AllPointsOutOfDomain(
            f"no in-domain sample for {sympy.sstr(e)[:80]} after {skipped} attempts")
    return ZeroTest(True, trials, seed, worst, skipped)


# ---- Text syntax -------------------------------------------------------------

_TRANSFORMS = (*standard_transformations, implicit_multiplication, convert_xor)
_PRIMES = re.compile(r"([A-Za-z_]\w*)('+)\s*\(")
_ALIASES: dict[str, object] = {
    "atan2": sympy.atan2, "arctan": sympy.atan, "atan": sympy.atan,
    "arccos": sympy.acos, "acos": sympy.acos, "ln": sympy.log, "log": sympy.log,
    "sqrt": sympy.sqrt, "exp": sympy.exp, "sin": sympy.sin, "cos": sympy.cos,
    "tan": sympy.tan, "pi": sympy.pi,
}


def _derivative_of(name: str, order: int) -> Callable[[Expr], Expr]:
    def build(arg: Expr) -> Expr:
        d = sympy.Dummy("d")
        return sympy.diff(formal(name)(d), d, order).subs(d, arg)

    return build


def parse(text: str) -> Expr:
    """
    Parse the plain-text expression syntax (see docs/expression-syntax.md).

    Raises:
        ParseError: The text is not a well-formed expression.
    """
    local: dict[str, object] = {**_REGISTRY, **_ALIASES}

    def mark(m: re.Match[str]) -> str:
        name, order = m.group(1), len(m.group(2))
        key = f"{name}__d{order}"
        local[key] = _derivative_of(name, order)
        return f"{key}("

    source = _PRIMES.sub(mark, text.strip())
    if not source:
        raise ParseError("empty expression")
    try:
        out = parse_expr(source, local_dict=local, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, TokenError, sympy.SympifyError) as e:
        raise ParseError(f"cannot parse {text!r}: {e}") from e
    if not isinstance(out, sympy.Expr):
        raise ParseError(f"{text!r} is not an expression")
    return out


def free_functions(exprs: Iterable[Expr]) -> set[str]:
    names: set[str] = set()
    for e in exprs:
        names |= {f.func.__name__ for f in sympy.sympify(e).atoms(AppliedUndef)
                  if not hasattr(f.func, "_imp_")}
    return names
