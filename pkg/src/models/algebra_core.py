"""
Exact Scalar, Polynomial and Truncated Series Arithmetic

Every other module builds on the helpers here:
- Rational scalars are elements of sympy's QQ domain (reduced, exact)
- Poly is a PolyElement of a PolyRing over QQ with named coordinates
- RatFun is a FracElement of the matching FracField, kept in cancelled form
- HbarSeries is an immutable list of coefficients v_0..v_N in powers of hbar

Rings are memoized per coordinate tuple so that two polynomials built from the
same names share one ring and can be multiplied; mixing rings is a structural
error rather than a silent coercion.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, List, Sequence, Tuple, Union

import sympy
from sympy import QQ
from sympy.parsing.sympy_parser import TokenError, parse_expr
from sympy.polys.fields import FracElement, FracField
from sympy.polys.rings import PolyElement, PolyRing

from ..utils.exceptions import NotInvertibleError, StructureError, ZeroDenominatorError

logger = logging.getLogger(__name__)

Rational = Any  # an element of QQ
Poly = PolyElement
RatFun = FracElement
Scalar = Union[PolyElement, FracElement]
Domain = Union[PolyRing, FracField]


# =========================
# Scalars
# =========================


def to_rational(value: Any) -> Rational:
    """Coerce ints, "a/b" strings, Fractions and sympy Rationals into QQ.

    Floats are refused: an inexact value can never enter the engine.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, float):
        raise TypeError(f"floating-point value {value!r} rejected; use an exact rational")
    if QQ.of_type(value):
        return value
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        value = sympy.Rational(value.strip())
    if isinstance(value, sympy.Basic):
        if not value.is_Rational:
            raise TypeError(f"{value} is not an exact rational")
        return QQ.from_sympy(value)
    return QQ.convert(value)


# =========================
# Rings and fields
# =========================


@lru_cache(maxsize=None)
def base_ring(names: Tuple[str, ...]) -> PolyRing:
    """Polynomial ring QQ[names]; an empty tuple gives the ring of a point."""
    return PolyRing(tuple(names), QQ)


@lru_cache(maxsize=None)
def rational_field(names: Tuple[str, ...]) -> FracField:
    return FracField(tuple(names), QQ)


def coordinate_names(domain: Domain) -> Tuple[str, ...]:
    return tuple(str(s) for s in domain.symbols)


def domain_of(c: Scalar) -> Domain:
    if isinstance(c, FracElement):
        return c.field
    if isinstance(c, PolyElement):
        return c.ring
    raise TypeError(f"not a polynomial or rational function: {c!r}")


def monomials_up_to(ring: PolyRing, degree: int) -> List[PolyElement]:
    """All monic monomials of total degree <= degree, graded then lexicographic."""
    out = []
    for total in range(degree + 1):
        for exps in _exponents_of_degree(ring.ngens, total):
            out.append(ring({exps: QQ.one}))
    return out


def _exponents_of_degree(nvars: int, total: int) -> List[Tuple[int, ...]]:
    if nvars == 0:
        return [()] if total == 0 else []
    found = []
    for combo in itertools.combinations_with_replacement(range(nvars), total):
        exps = [0] * nvars
        for k in combo:
            exps[k] += 1
        found.append(tuple(exps))
    return sorted(set(found), reverse=True)


def total_degree(p: PolyElement) -> int:
    if not p:
        return -1
    return max(sum(m) for m in p.itermonoms())


# =========================
# Poly / RatFun operations
# =========================


def poly_mul(p: PolyElement, q: PolyElement) -> PolyElement:
    if p.ring != q.ring:
        raise StructureError(
            f"variable lists differ: {coordinate_names(p.ring)} vs {coordinate_names(q.ring)}")
    return p * q


def partial(c: Scalar, k: int) -> Scalar:
    """Partial derivative in coordinate k for Poly and RatFun alike."""
    domain = domain_of(c)
    if not 0 <= k < domain.ngens:
        raise StructureError(f"coordinate index {k} outside {coordinate_names(domain)}")
    return c.diff(domain.gens[k])


def poly_partial(p: PolyElement, k: int) -> PolyElement:
    return partial(p, k)


def derivative(c: Scalar, index: Sequence[int]) -> Scalar:
    """Apply the multi-index derivative d^I to a coefficient."""
    domain = domain_of(c)
    for k, times in enumerate(index):
        for _ in range(times):
            if not c:
                return c
            c = c.diff(domain.gens[k])
    return c


def make_ratfun(field: FracField, numerator: PolyElement, denominator: PolyElement) -> FracElement:
    if not denominator:
        raise ZeroDenominatorError("denominator is identically zero")
    return field.new(numerator, denominator)


def ratfun_arith(a: FracElement, b: FracElement, op: str) -> FracElement:
    if a.field != b.field:
        raise StructureError(
            f"variable lists differ: {coordinate_names(a.field)} vs {coordinate_names(b.field)}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ZeroDenominatorError("division by the zero rational function")
        return a / b
    raise ValueError(f"unknown rational-function operation {op!r}")


def ratfun_partial(a: FracElement, k: int) -> FracElement:
    return partial(a, k)


def ratfun_equal(a: FracElement, b: FracElement) -> bool:
    """Equality by cross-multiplication, independent of the stored normal form."""
    return a.numer * b.denom == b.numer * a.denom


def is_constant(c: Scalar) -> bool:
    domain = domain_of(c)
    return all(not partial(c, k) for k in range(domain.ngens))


def parse_coefficient(domain: Domain, value: Any) -> Scalar:
    """Coerce a scalar, element or expression string such as "-1/(lam_h - 1)" into ``domain``."""
    if isinstance(value, (PolyElement, FracElement)):
        return value if domain_of(value) == domain else domain(value)
    if not isinstance(value, str):
        return domain(to_rational(value))
    symbols = {name: sympy.Symbol(name) for name in coordinate_names(domain)}
    try:
        expr = parse_expr(value, local_dict=symbols)
    except (SyntaxError, TokenError, TypeError) as exc:
        raise StructureError(f"cannot parse coefficient {value!r}: {exc}") from exc
    if expr.has(sympy.Float):
        raise TypeError(f"floating-point value in {value!r} rejected; use an exact rational")
    if expr.has(sympy.zoo, sympy.nan, sympy.oo):
        raise ZeroDenominatorError(f"coefficient {value!r} has a zero denominator")
    unknown = {str(s) for s in expr.free_symbols} - set(symbols)
    if unknown:
        raise StructureError(f"coefficient {value!r} uses unknown variables {sorted(unknown)}")
    try:
        return domain.from_expr(expr)
    except (ValueError, sympy.polys.polyerrors.CoercionFailed) as exc:
        raise StructureError(f"{value!r} is not an element of {domain}") from exc


# =========================
# Truncated hbar series
# =========================


@dataclass(frozen=True)
class HbarSeries:
    """Coefficients v_0..v_N of a formal series in hbar, truncated at order N.

    The coefficient space only needs +, - and multiplication by QQ scalars;
    products between series take an explicit bilinear ``mul``.
    """
    coefficients: Tuple[Any, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a truncated series needs at least the hbar^0 coefficient")
        object.__setattr__(self, 'coefficients', tuple(self.coefficients))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def constant(cls, value: Any, order: int, zero: Any = None) -> "HbarSeries":
        zero = value - value if zero is None else zero
        return cls((value,) + (zero,) * order)

    @classmethod
    def from_terms(cls, terms: dict, order: int, zero: Any) -> "HbarSeries":
        """Series from a sparse {power: coefficient} map."""
        return cls(tuple(terms.get(k, zero) for k in range(order + 1)))

    def coefficient(self, k: int) -> Any:
        if k > self.order:
            raise IndexError(f"hbar^{k} lies beyond truncation order {self.order}")
        return self.coefficients[k]

    def __getitem__(self, k: int) -> Any:
        return self.coefficient(k)

    def __len__(self) -> int:
        return len(self.coefficients)

    def truncate(self, order: int) -> "HbarSeries":
        return HbarSeries(self.coefficients[:order + 1])

    def map(self, fn: Callable[[Any], Any]) -> "HbarSeries":
        return HbarSeries(tuple(fn(c) for c in self.coefficients))

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        n = min(self.order, other.order)
        return HbarSeries(tuple(self.coefficients[k] + other.coefficients[k] for k in range(n + 1)))

    def __sub__(self, other: "HbarSeries") -> "HbarSeries":
        n = min(self.order, other.order)
        return HbarSeries(tuple(self.coefficients[k] - other.coefficients[k] for k in range(n + 1)))

    def __neg__(self) -> "HbarSeries":
        return self.map(lambda c: -c)

    def scale(self, factor: Any) -> "HbarSeries":
        factor = to_rational(factor)
        return self.map(lambda c: c * factor)

    def shift(self, power: int = 1) -> "HbarSeries":
        """Multiply by hbar^power, keeping the truncation order."""
        zero = self.coefficients[0] - self.coefficients[0]
        return HbarSeries(((zero,) * power + self.coefficients)[:self.order + 1])

    def is_zero(self) -> bool:
        return all(is_zero_value(c) for c in self.coefficients)

    def leading_order(self) -> int:
        """First power with a nonzero coefficient, or -1 for the zero series."""
        for k, c in enumerate(self.coefficients):
            if not is_zero_value(c):
                return k
        return -1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return self.order == other.order and all(
            is_zero_value(a - b) for a, b in zip(self.coefficients, other.coefficients))

    def __hash__(self):
        return hash((self.order, tuple(_hash_key(c) for c in self.coefficients)))

    def __str__(self) -> str:
        parts = [f"hbar^{k}: {c}" for k, c in enumerate(self.coefficients) if not is_zero_value(c)]
        return "; ".join(parts) if parts else "0"


def _hash_key(c: Any) -> Any:
    """Representation-independent key, so series equal under __eq__ hash alike."""
    terms = getattr(c, "terms", None)
    if isinstance(terms, dict):
        return tuple(sorted((key, str(v)) for key, v in terms.items()))
    return "0" if is_zero_value(c) else str(c)


def is_zero_value(c: Any) -> bool:
    if hasattr(c, "is_zero") and callable(c.is_zero):
        return c.is_zero()
    return not c


def series_mul(a: HbarSeries, b: HbarSeries, mul: Callable[[Any, Any], Any]) -> HbarSeries:
    """Cauchy product truncated at min(N_a, N_b)."""
    n = min(a.order, b.order)
    out = []
    for k in range(n + 1):
        acc = mul(a.coefficients[0], b.coefficients[k])
        for i in range(1, k + 1):
            acc = acc + mul(a.coefficients[i], b.coefficients[k - i])
        out.append(acc)
    return HbarSeries(tuple(out))


def series_invert(a: HbarSeries, mul: Callable[[Any, Any], Any], unit: Any) -> HbarSeries:
    """Order-by-order inverse: b_0 = 1, b_k = -sum_{j>=1} a_j b_{k-j}."""
    if not is_zero_value(a.coefficients[0] - unit):
        raise NotInvertibleError("leading coefficient is not the unit")
    inverse = [unit]
    for k in range(1, a.order + 1):
        acc = mul(a.coefficients[1], inverse[k - 1])
        for j in range(2, k + 1):
            acc = acc + mul(a.coefficients[j], inverse[k - j])
        inverse.append(-acc)
    logger.debug("inverted series through hbar^%d", a.order)
    return HbarSeries(tuple(inverse))


def as_series(value: Any, order: int) -> HbarSeries:
    if isinstance(value, HbarSeries):
        return value.truncate(order) if value.order > order else value
    return HbarSeries.constant(value, order)


def residual_size(value: Any) -> int:
    """Term count used to rank residuals in reports."""
    if isinstance(value, HbarSeries):
        return sum(residual_size(c) for c in value.coefficients)
    if isinstance(value, FracElement):
        return len(value.numer)
    if hasattr(value, "size") and callable(value.size):
        return value.size()
    try:
        return len(value)
    except TypeError:
        return 0 if not value else 1
