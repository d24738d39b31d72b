"""
Vector fields on the base space (t, x, y, u, v, sigma, theta), the named
generators of the plasticity symmetry algebra and the Lie bracket.
"""
from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import sympy

from . import symexpr
from .symexpr import (
    BASE_VARS,
    DEFAULT_BOX,
    Expr,
    SamplingBox,
    ZeroTest,
    t,
    u,
    v,
    x,
    y,
)

LOG = logging.getLogger(__name__)

COORD_NAMES: tuple[str, ...] = tuple(sym.name for sym in BASE_VARS)


class MissingSlot(ValueError):
    pass


@dataclass(frozen=True)
class VectorField:
    """Coefficients on (d_t, d_x, d_y, d_u, d_v, d_sigma, d_theta)."""
    coeffs: tuple[Expr, ...]

    def __post_init__(self):
        coeffs = tuple(sympy.sympify(c) for c in self.coeffs)
        if len(coeffs) != len(BASE_VARS):
            raise ValueError(f"a vector field has 7 coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls) -> VectorField:
        return cls((0,) * len(BASE_VARS))

    @classmethod
    def from_components(cls, **components: Expr) -> VectorField:
        unknown = set(components) - set(COORD_NAMES)
        if unknown:
            raise symexpr.UnknownVariable(f"unknown coordinates {sorted(unknown)}")
        return cls(tuple(components.get(name, 0) for name in COORD_NAMES))

    def __getitem__(self, coord: sympy.Symbol | str) -> Expr:
        name = coord.name if isinstance(coord, sympy.Symbol) else coord
        return self.coeffs[COORD_NAMES.index(name)]

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(tuple(a + b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(tuple(a - b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __neg__(self) -> VectorField:
        return VectorField(tuple(-c for c in self.coeffs))

    def __mul__(self, scalar: Expr | float) -> VectorField:
        k = sympy.sympify(scalar)
        return VectorField(tuple(k * c for c in self.coeffs))

    __rmul__ = __mul__

    def apply(self, e: Expr) -> Expr:
        """The derivation X(F) = sum_i X_i dF/dz_i."""
        e = sympy.sympify(e)
        return sympy.Add(*(c * symexpr.diff(e, z)
                           for c, z in zip(self.coeffs, BASE_VARS, strict=True) if c != 0))

    def expand(self) -> VectorField:
        return VectorField(tuple(sympy.expand(c) for c in self.coeffs))

    def subs(self, mapping: Mapping[sympy.Basic, Expr]) -> VectorField:
        return VectorField(tuple(symexpr.substitute(c, mapping) for c in self.coeffs))

    def to_json(self) -> list[str]:
        return [sympy.sstr(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> VectorField:
        return cls(tuple(symexpr.parse(item) for item in items))


def bracket(a: VectorField, b: VectorField) -> VectorField:
    """Commutator [A, B] with coefficients A(B_i) - B(A_i)."""
    return VectorField(tuple(a.apply(bc) - b.apply(ac)
                             for ac, bc in zip(a.coeffs, b.coeffs, strict=True)))


@dataclass(frozen=True)
class FieldZeroTest:
    is_zero: bool
    max_residual: float
    component: str | None = None
    witness: dict[str, float] | None = None
    witness_value: float | None = None

    def __bool__(self) -> bool:
        return self.is_zero


def field_is_zero(
    vf: VectorField,
    box: SamplingBox = DEFAULT_BOX,
    *,
    components: Iterable[str] = COORD_NAMES,
    **kwargs,
) -> FieldZeroTest:
    """Zero-test each selected coefficient; stop at the first nonzero one."""
    worst = 0.0
    for name in components:
        test: ZeroTest = symexpr.is_zero(vf[name], box, **kwargs)
        worst = max(worst, test.max_residual)
        if not test:
            return FieldZeroTest(False, test.max_residual, name, test.witness,
                                 test.witness_value)
    return FieldZeroTest(True, worst)


# ---- Named generators --------------------------------------------------------

class Kind(StrEnum):
    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    D = "D"
    L = "L"
    K = "K"
    X = "X"
    Y = "Y"
    S = "S"
    BX = "B_x"
    BY = "B_y"
    P_SIGMA = "P_sigma"


SLOTTED = frozenset({Kind.X, Kind.Y, Kind.S, Kind.BX, Kind.BY, Kind.P_SIGMA})
# Generators of the force-free algebra, spanning A = <P0, D, L>, B = <X, Y> and S.
FACTOR_KINDS = frozenset({Kind.P0, Kind.D, Kind.L})


@dataclass(frozen=True)
class GeneratorSpec:
    """
    A named generator with its slot function, force parameters and potential.

    Attributes:
        kind:      Which generator.
        slot:      Function of t for X, Y, S, B_x, B_y and P_sigma.
        kappa:     (kappa0, kappa1, kappa2) for K; symbolic when omitted.
        potential: V(t, x, y) for the monogenic-force versions of P0, D, L, B_x, B_y.
    """
    kind: Kind
    slot: Expr | None = None
    kappa: tuple[Expr, Expr, Expr] | None = None
    potential: Expr | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.slot is not None:
            object.__setattr__(self, "slot", sympy.sympify(self.slot))
        if self.kappa is not None:
            object.__setattr__(self, "kappa", tuple(sympy.sympify(k) for k in self.kappa))
        if self.potential is not None:
            object.__setattr__(self, "potential", sympy.sympify(self.potential))

    def with_slot(self, slot: Expr) -> GeneratorSpec:
        return GeneratorSpec(self.kind, slot, self.kappa, self.potential)

    def label(self) -> str:
        if self.kind in SLOTTED:
            return f"{self.kind.value}[{sympy.sstr(self.slot)}]"
        if self.kind is Kind.K and self.kappa is not None:
            return f"K[{','.join(sympy.sstr(k) for k in self.kappa)}]"
        return self.kind.value

    # arithmetic lifts to Combination
    def __add__(self, other: Combination | GeneratorSpec) -> Combination:
        return Combination.of(self) + other

    def __sub__(self, other: Combination | GeneratorSpec) -> Combination:
        return Combination.of(self) - other

    def __neg__(self) -> Combination:
        return Combination.of(self, -1)

    def __mul__(self, scalar: Expr | float) -> Combination:
        return Combination.of(self, scalar)

    __rmul__ = __mul__


def P0(potential: Expr | None = None) -> GeneratorSpec:
    return GeneratorSpec(Kind.P0, potential=potential)


def D(potential: Expr | None = None) -> GeneratorSpec:
    return GeneratorSpec(Kind.D, potential=potential)


def L(potential: Expr | None = None) -> GeneratorSpec:
    return GeneratorSpec(Kind.L, potential=potential)


def X(f: Expr) -> GeneratorSpec:
    return GeneratorSpec(Kind.X, slot=f)


def Y(g: Expr) -> GeneratorSpec:
    return GeneratorSpec(Kind.Y, slot=g)


def S(h: Expr) -> GeneratorSpec:
    return GeneratorSpec(Kind.S, slot=h)


def K(kappa0: Expr = 0, kappa1: Expr = symexpr.kappa1,
      kappa2: Expr = symexpr.kappa2) -> GeneratorSpec:
    return GeneratorSpec(Kind.K, kappa=(kappa0, kappa1, kappa2))


def instantiate(spec: GeneratorSpec, rho: Expr = symexpr.rho) -> VectorField:
    """
    Build the vector field of a named generator.

    Args:
        spec: The generator, with its slot bound where the kind needs one.
        rho:  Density parameter; symbolic by default and bound at evaluation.

    Returns:
        The exact coefficient tuple, e.g. X_f = (0, f, 0, f', 0, rho x f'', 0).

    Raises:
        MissingSlot: A slotted generator has no slot, or B_x/B_y has no potential.
    """
    kind = spec.kind
    if kind in SLOTTED and spec.slot is None:
        raise MissingSlot(f"{kind.value} needs a slot function")
    f = spec.slot
    V = spec.potential if spec.potential is not None else sympy.Integer(0)

    def d(e: Expr, n: int = 1) -> Expr:
        return sympy.diff(e, t, n)

    match kind:
        case Kind.P0:
            return VectorField.from_components(t=1, sigma=-rho * d(V))
        case Kind.P1:
            return VectorField.from_components(x=1)
        case Kind.P2:
            return VectorField.from_components(y=1)
        case Kind.D:
            euler = t * d(V) + x * sympy.diff(V, x) + y * sympy.diff(V, y)
            return VectorField.from_components(t=t, x=x, y=y, sigma=-rho * euler)
        case Kind.L:
            return _rotation(rho, V)
        case Kind.K:
            k0, k1, k2 = spec.kappa or (symexpr.kappa0, symexpr.kappa1, symexpr.kappa2)
            dilation = VectorField.from_components(t=t, x=x, y=y)
            return (VectorField.from_components(t=k0) + k1 * dilation
                    + k2 * _rotation(rho, sympy.Integer(0)))
        case Kind.X:
            return VectorField.from_components(x=f, u=d(f), sigma=rho * x * d(f, 2))
        case Kind.Y:
            return VectorField.from_components(y=f, v=d(f), sigma=rho * y * d(f, 2))
        case Kind.S:
            return VectorField.from_components(sigma=f)
        case Kind.P_SIGMA:
            return VectorField.from_components(sigma=rho * f)
        case Kind.BX | Kind.BY:
            if spec.potential is None:
                raise MissingSlot(f"{kind.value} needs a potential V")
            q, vel = (x, "u") if kind is Kind.BX else (y, "v")
            coord = "x" if kind is Kind.BX else "y"
            sigma_c = -rho * (f * sympy.diff(V, q) - q * d(f, 2))
            return VectorField.from_components(**{coord: f, vel: d(f)}, sigma=sigma_c)
    raise MissingSlot(f"unsupported generator {kind}")  # pragma: no cover


def _rotation(rho: Expr, V: Expr) -> VectorField:
    return VectorField.from_components(
        x=y, y=-x, u=v, v=-u, theta=-1,
        sigma=rho * (x * sympy.diff(V, y) - y * sympy.diff(V, x)),
    )


_GENERATOR_TEXT = re.compile(r"^\s*([A-Za-z_0-9]+?)\s*(?:\[(.*)\])?\s*$")


def generator_from_text(text: str, potential: Expr | None = None) -> GeneratorSpec:
    """
    Parse a generator name such as "P0", "D", "X[t^2]" or "S[1]".

    Raises:
        ValueError: The name is not a known generator.
    """
    m = _GENERATOR_TEXT.match(text)
    if not m:
        raise ValueError(f"cannot read generator {text!r}")
    name, slot = m.group(1), m.group(2)
    aliases = {"X_f": "X", "Y_g": "Y", "S_h": "S", "Bx": "B_x", "By": "B_y", "Psigma": "P_sigma"}
    try:
        kind = Kind(aliases.get(name, name))
    except ValueError as e:
        raise ValueError(f"unknown generator {name!r}") from e
    if kind is Kind.K and slot:
        k0, k1, k2 = (symexpr.parse(part) for part in slot.split(","))
        return GeneratorSpec(Kind.K, kappa=(k0, k1, k2))
    return GeneratorSpec(kind, symexpr.parse(slot) if slot else None, potential=potential)


# ---- Linear combinations -------------------------------------------------------

@dataclass(frozen=True)
class Combination:
    """A linear combination of named generators with scalar coefficients."""
    terms: tuple[tuple[Expr, GeneratorSpec], ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, spec: GeneratorSpec, coef: Expr = 1) -> Combination:
        return cls(((sympy.sympify(coef), spec),))

    def __add__(self, other: Combination | GeneratorSpec) -> Combination:
        other = _as_combination(other)
        merged: dict[GeneratorSpec, Expr] = {}
        for coef, spec in (*self.terms, *other.terms):
            merged[spec] = merged.get(spec, sympy.Integer(0)) + coef
        return Combination(tuple((c, sp) for sp, c in merged.items() if c != 0))

    __radd__ = __add__

    def __neg__(self) -> Combination:
        return Combination(tuple((-c, sp) for c, sp in self.terms))

    def __sub__(self, other: Combination | GeneratorSpec) -> Combination:
        return self + (-_as_combination(other))

    def __mul__(self, scalar: Expr | float) -> Combination:
        k = sympy.sympify(scalar)
        return Combination(tuple((k * c, sp) for c, sp in self.terms))

    __rmul__ = __mul__

    def instantiate(self, rho: Expr = symexpr.rho) -> VectorField:
        out = VectorField.zero()
        for coef, spec in self.terms:
            out = out + coef * instantiate(spec, rho)
        return out

    def label(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for coef, spec in self.terms:
            parts.append(spec.label() if coef == 1 else f"({sympy.sstr(coef)})*{spec.label()}")
        return " + ".join(parts)


def _as_combination(value: Combination | GeneratorSpec) -> Combination:
    return value if isinstance(value, Combination) else Combination.of(value)


def lincomb(*terms: tuple[Expr, GeneratorSpec] | GeneratorSpec) -> Combination:
    out = Combination()
    for term in terms:
        out = out + (Combination.of(term) if isinstance(term, GeneratorSpec)
                     else Combination.of(term[1], term[0]))
    return out


# ---- Commutation table ---------------------------------------------------------

def slot_tilde(f: Expr) -> Expr:
    """t f'(t) - f(t), the slot of [D, X_f]."""
    return t * sympy.diff(f, t) - f


def monomial_ladder(degree: int) -> list[Expr]:
    return [t**k for k in range(degree + 1)]


@dataclass(frozen=True)
class Relation:
    name: str
    left: GeneratorSpec
    right: GeneratorSpec
    expected: Combination


def commutation_relations(f: Expr, g: Expr, h: Expr) -> list[Relation]:
    """The nonzero brackets of the force-free algebra."""
    df, dg, dh = (sympy.diff(e, t) for e in (f, g, h))
    return [
        Relation("[P0,X_f]", P0(), X(f), Combination.of(X(df))),
        Relation("[P0,Y_g]", P0(), Y(g), Combination.of(Y(dg))),
        Relation("[P0,D]", P0(), D(), Combination.of(P0())),
        Relation("[P0,S_h]", P0(), S(h), Combination.of(S(dh))),
        Relation("[D,S_h]", D(), S(h), Combination.of(S(t * dh))),
        Relation("[D,X_f]", D(), X(f), Combination.of(X(slot_tilde(f)))),
        Relation("[D,Y_g]", D(), Y(g), Combination.of(Y(slot_tilde(g)))),
        Relation("[L,X_f]", L(), X(f), Combination.of(Y(f))),
        Relation("[L,Y_g]", L(), Y(g), Combination.of(X(g), -1)),
    ]


def vanishing_relations(f: Expr, g: Expr, h: Expr, k: Expr) -> list[Relation]:
    """
    Brackets left out of the printed table: the commuting pairs, and the
    brackets inside B, which only vanish modulo the ideal S.
    """
    rho = symexpr.rho
    wr = rho * (f * sympy.diff(g, t, 2) - g * sympy.diff(f, t, 2))
    zero = Combination()
    return [
        Relation("[L,D]", L(), D(), zero),
        Relation("[L,P0]", L(), P0(), zero),
        Relation("[X_f,Y_g]", X(f), Y(g), zero),
        Relation("[L,S_h]", L(), S(h), zero),
        Relation("[X_f,S_h]", X(f), S(h), zero),
        Relation("[Y_g,S_h]", Y(g), S(h), zero),
        Relation("[S_h,S_k]", S(h), S(k), zero),
        Relation("[X_f,X_g]", X(f), X(g), Combination.of(S(wr))),
        Relation("[Y_f,Y_g]", Y(f), Y(g), Combination.of(S(wr))),
    ]


def table_relations(degree: int, extended: bool = False) -> list[Relation]:
    """
    Instantiate the table over the monomial ladder t^0..t^degree.

    Single-slot relations run over every rung; two-slot relations pair each
    rung with the next one up the ladder.
    """
    ladder = monomial_ladder(degree)
    out: list[Relation] = []
    for i, f in enumerate(ladder):
        g = ladder[(i + 1) % len(ladder)]
        out.extend(commutation_relations(f, f, f))
        if extended:
            out.extend(vanishing_relations(f, g, f, g))
    return out


@dataclass(frozen=True)
class RelationResult:
    name: str
    slots: str
    passed: bool
    max_residual: float
    component: str | None = None
    witness: dict[str, float] | None = None
    witness_value: float | None = None


@dataclass(frozen=True)
class TableReport:
    results: tuple[RelationResult, ...]

    @property
    def passed(self) -> bool:
        return all(res.passed for res in self.results)

    def by_relation(self) -> dict[str, bool]:
        """Relation name -> passed on every slot instance."""
        out: dict[str, bool] = {}
        for res in self.results:
            out[res.name] = out.get(res.name, True) and res.passed
        return out


def check_relation(
    rel: Relation,
    *,
    box: SamplingBox = DEFAULT_BOX,
    rho: float = 1.0,
    trials: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
) -> RelationResult:
    residual = (bracket(instantiate(rel.left), instantiate(rel.right))
                - rel.expected.instantiate())
    test = field_is_zero(residual, box, trials=trials, tol=tol, seed=seed,
                         params={"rho": rho})
    slots = ", ".join(sp.label() for sp in (rel.left, rel.right))
    if not test:
        LOG.warning("%s fails on %s (component %s)", rel.name, slots, test.component)
    return RelationResult(rel.name, slots, test.is_zero, test.max_residual, test.component,
                          test.witness, test.witness_value)


def check_table(relations: Iterable[Relation], **kwargs) -> TableReport:
    """
    Verify a relation table by zero-testing every residual field
    [left, right] - expected.

    Keyword arguments are passed to `check_relation`.
    """
    return TableReport(tuple(check_relation(rel, **kwargs) for rel in relations))
