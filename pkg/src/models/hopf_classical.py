"""
Classical Hopf Algebroids

Two instances of the axioms (coassociativity, compatibility with the
bimodule structure and the product, counit):
- D(R^n), differential operators over polynomial functions with the
  Leibniz coproduct, alpha = beta = multiplication, counit = zero-order part
- U(g) over a point in the PBW basis, generators primitive

Checkers are written once against ``HopfAlgebroidInstance``, a bundle of
evaluators for the total algebra, its tensor powers and the base algebra.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from sympy import QQ

from .algebra_core import base_ring, coordinate_names, monomials_up_to, to_rational
from .diffop import (
    PolyDiffOp,
    coproduct_in_slot,
    counit as diffop_counit,
    compose,
    flip,
    leibniz_coproduct,
    multiplication_operator,
    partial_operator,
    slotwise_product,
    tensor,
)
from ..data.structures import LieAlgebraData, ResidualReport
from ..utils.exceptions import InvalidStructureError, StructureError

logger = logging.getLogger(__name__)


@dataclass
class ProbeBounds:
    max_coefficient_degree: int = 2
    max_operator_order: int = 2
    pbw_degree: int = 3
    max_exhaustive_pairs: int = 1500

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "ProbeBounds":
        return cls(
            max_coefficient_degree=config.get("MAX_COEFFICIENT_DEGREE", 2),
            max_operator_order=config.get("MAX_OPERATOR_ORDER", 2),
            pbw_degree=config.get("PBW_DEGREE", 3),
            max_exhaustive_pairs=config.get("MAX_EXHAUSTIVE_PAIRS", 1500),
        )


# =========================
# Universal enveloping algebra in the PBW basis
# =========================


Monomial = Tuple[int, ...]


class UniversalEnvelopingAlgebra:
    """U(g) with PBW monomials x_0^{n_0} ... x_{m-1}^{n_{m-1}} in basis order.

    Straightening rewrites the leftmost inversion x_a x_b (a > b) into
    x_b x_a + sum_c f^c_ab x_c; results are memoized per word.
    """

    def __init__(self, g: LieAlgebraData):
        issues = g.validate()
        if 'antisymmetry' in issues or 'jacobi' in issues:
            raise InvalidStructureError(f"{g.name}: {issues}")
        self.g = g
        self.dim = g.dim
        self._brackets: Dict[Tuple[int, int], List[Tuple[int, Any]]] = {}
        for a in range(g.dim):
            for b in range(g.dim):
                self._brackets[(a, b)] = [(c, g.structure_constants[a, b, c])
                                          for c in range(g.dim) if g.structure_constants[a, b, c]]
        self._cache: Dict[Tuple[int, ...], Dict[Monomial, Any]] = {}

    def word(self, monomial: Monomial) -> Tuple[int, ...]:
        return tuple(itertools.chain.from_iterable([a] * n for a, n in enumerate(monomial)))

    def normal_order(self, word: Tuple[int, ...]) -> Dict[Monomial, Any]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        for i in range(len(word) - 1):
            a, b = word[i], word[i + 1]
            if a > b:
                result = dict(self.normal_order(word[:i] + (b, a) + word[i + 2:]))
                for c, coeff in self._brackets[(a, b)]:
                    for mono, value in self.normal_order(word[:i] + (c,) + word[i + 2:]).items():
                        result[mono] = result.get(mono, QQ.zero) + coeff * value
                result = {mono: v for mono, v in result.items() if v}
                break
        else:
            exps = [0] * self.dim
            for a in word:
                exps[a] += 1
            result = {tuple(exps): QQ.one}
        self._cache[word] = result
        return result

    def monomial_product(self, m: Monomial, n: Monomial) -> Dict[Monomial, Any]:
        return self.normal_order(self.word(m) + self.word(n))

    def unit_monomial(self) -> Monomial:
        return (0,) * self.dim

    def element(self, terms: Dict[Monomial, Any]) -> "PBWElement":
        return PBWElement(self, terms)

    def generator(self, a: int) -> "PBWElement":
        return PBWElement(self, {tuple(1 if k == a else 0 for k in range(self.dim)): QQ.one})

    def one(self) -> "PBWElement":
        return PBWElement(self, {self.unit_monomial(): QQ.one})

    def monomial_coproduct(self, m: Monomial) -> List[Tuple[Monomial, Monomial, int]]:
        """Delta(x^n) = sum_{k <= n} prod binom(n_a, k_a) x^k (x) x^{n-k}."""
        out = []
        for lower in itertools.product(*(range(n + 1) for n in m)):
            weight = 1
            for n, k in zip(m, lower):
                weight *= comb(n, k)
            out.append((tuple(lower), tuple(n - k for n, k in zip(m, lower)), weight))
        return out


def pbw_monomials(dim: int, degree: int) -> List[Monomial]:
    """Exponent vectors of total degree <= degree, graded."""
    out = []
    for total in range(degree + 1):
        level = set()
        for combo in itertools.combinations_with_replacement(range(dim), total):
            exps = [0] * dim
            for a in combo:
                exps[a] += 1
            level.add(tuple(exps))
        out.extend(sorted(level, reverse=True))
    return out


class PBWElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: UniversalEnvelopingAlgebra, terms: Dict[Monomial, Any]):
        self.algebra = algebra
        self.terms = {m: to_rational(v) for m, v in terms.items() if v}

    def __add__(self, other: "PBWElement") -> "PBWElement":
        merged = dict(self.terms)
        for m, v in other.terms.items():
            merged[m] = merged.get(m, QQ.zero) + v
        return PBWElement(self.algebra, merged)

    def __neg__(self) -> "PBWElement":
        return PBWElement(self.algebra, {m: -v for m, v in self.terms.items()})

    def __sub__(self, other: "PBWElement") -> "PBWElement":
        return self + (-other)

    def __mul__(self, other: "PBWElement") -> "PBWElement":
        if not isinstance(other, PBWElement):
            q = to_rational(other)
            return PBWElement(self.algebra, {m: v * q for m, v in self.terms.items()})
        out: Dict[Monomial, Any] = {}
        for m, u in self.terms.items():
            for n, v in other.terms.items():
                for mono, w in self.algebra.monomial_product(m, n).items():
                    out[mono] = out.get(mono, QQ.zero) + u * v * w
        return PBWElement(self.algebra, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PBWElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def size(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{v}*{_monomial_string(m, self.algebra.g.basis)}"
                          for m, v in sorted(self.terms.items(), reverse=True))


def _monomial_string(m: Monomial, names: Sequence[str]) -> str:
    factors = [name if n == 1 else f"{name}^{n}" for name, n in zip(names, m) if n]
    return "*".join(factors) if factors else "1"


class PBWTensor:
    """Element of U(g)^{(x)k}: map from k-tuples of PBW monomials to QQ."""

    __slots__ = ("algebra", "arity", "terms")

    def __init__(self, algebra: UniversalEnvelopingAlgebra, arity: int, terms: Dict[Tuple[Monomial, ...], Any]):
        self.algebra = algebra
        self.arity = arity
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def simple(cls, *factors: PBWElement) -> "PBWTensor":
        terms: Dict[Tuple[Monomial, ...], Any] = {}
        for choice in itertools.product(*(f.terms.items() for f in factors)):
            key = tuple(m for m, _ in choice)
            value = QQ.one
            for _, v in choice:
                value *= v
            terms[key] = terms.get(key, QQ.zero) + value
        return cls(factors[0].algebra, len(factors), terms)

    def __add__(self, other: "PBWTensor") -> "PBWTensor":
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, QQ.zero) + v
        return PBWTensor(self.algebra, self.arity, merged)

    def __neg__(self) -> "PBWTensor":
        return PBWTensor(self.algebra, self.arity, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "PBWTensor") -> "PBWTensor":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PBWTensor):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    __hash__ = None

    def product(self, other: "PBWTensor") -> "PBWTensor":
        """Slotwise product in U(g)^{(x)k}."""
        if other.arity != self.arity:
            raise StructureError("slotwise product of tensors with different arity")
        out: Dict[Tuple[Monomial, ...], Any] = {}
        for k1, u in self.terms.items():
            for k2, v in other.terms.items():
                slots = [self.algebra.monomial_product(a, b).items() for a, b in zip(k1, k2)]
                for choice in itertools.product(*slots):
                    key = tuple(m for m, _ in choice)
                    value = u * v
                    for _, w in choice:
                        value *= w
                    out[key] = out.get(key, QQ.zero) + value
        return PBWTensor(self.algebra, self.arity, out)

    def coproduct_in_slot(self, slot: int) -> "PBWTensor":
        out: Dict[Tuple[Monomial, ...], Any] = {}
        for key, v in self.terms.items():
            for lower, rest, weight in self.algebra.monomial_coproduct(key[slot]):
                new_key = key[:slot] + (lower, rest) + key[slot + 1:]
                out[new_key] = out.get(new_key, QQ.zero) + v * weight
        return PBWTensor(self.algebra, self.arity + 1, out)

    def permute(self, order: Sequence[int]) -> "PBWTensor":
        return PBWTensor(self.algebra, self.arity, {tuple(k[i] for i in order): v for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def size(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.algebra.g.basis
        return " + ".join(f"{v}*[{' ⊗ '.join(_monomial_string(m, names) for m in k)}]"
                          for k, v in sorted(self.terms.items(), reverse=True))


# =========================
# Instance bundle
# =========================


@dataclass
class HopfAlgebroidInstance:
    """Evaluators realizing (H, R, alpha, beta, m, Delta, epsilon)."""
    name: str
    multiply: Callable[[Any, Any], Any]
    unit: Any
    base_multiply: Callable[[Any, Any], Any]
    base_unit: Any
    alpha: Callable[[Any], Any]
    beta: Callable[[Any], Any]
    coproduct: Callable[[Any], Any]
    coproduct_slot: Callable[[Any, int], Any]
    tensor_product: Callable[[Any, Any], Any]
    base_difference: Callable[[Any], Any]  # beta(a) (x) 1 - 1 (x) alpha(a), slot-decorated
    counit: Callable[[Any], Any]
    counit_left: Callable[[Any], Any]   # sum alpha(eps(h')) h''
    counit_right: Callable[[Any], Any]  # sum beta(eps(h'')) h'
    flip: Callable[[Any], Any]
    probes: List[Any] = field(default_factory=list)
    base_probes: List[Any] = field(default_factory=list)
    generators: List[Any] = field(default_factory=list)
    truncation_order: int = 0
    max_exhaustive_pairs: int = 1500

    def probe_pairs(self) -> List[Tuple[Any, Any]]:
        """All probe pairs when affordable, otherwise probes x generators both ways."""
        if len(self.probes) ** 2 <= self.max_exhaustive_pairs:
            return list(itertools.product(self.probes, self.probes))
        logger.warning("%s: %d probes exceed the exhaustive pair budget; pairing with generators",
                       self.name, len(self.probes))
        pairs = [(h, g) for h in self.probes for g in self.generators]
        pairs += [(g, h) for g in self.generators for h in self.probes]
        return pairs


def differential_operator_probes(ring, max_coefficient_degree: int, max_operator_order: int) -> List[PolyDiffOp]:
    """{c * d^I : c monomial of degree <= d, |I| <= k}."""
    probes = []
    for index in monomials_up_to(ring, max_operator_order):
        (multi_index,) = index.itermonoms()
        for c in monomials_up_to(ring, max_coefficient_degree):
            probes.append(PolyDiffOp(ring, 1, {(multi_index,): c}))
    return probes


def dp_instance(coordinates: Sequence[str], bounds: Optional[ProbeBounds] = None,
                coproduct: Optional[Callable[[PolyDiffOp], PolyDiffOp]] = None,
                coproduct_slot: Optional[Callable[[PolyDiffOp, int], PolyDiffOp]] = None,
                name: Optional[str] = None) -> HopfAlgebroidInstance:
    """Differential operators on R^n as a cocommutative Hopf algebroid over R."""
    if isinstance(coordinates, int):
        if coordinates < 1:
            raise StructureError("dimension must be at least 1")
        coordinates = tuple(f"x{k + 1}" for k in range(coordinates)) if coordinates > 1 else ("x",)
    coordinates = tuple(coordinates)
    if not coordinates:
        raise StructureError("dimension must be at least 1")
    bounds = bounds or ProbeBounds()
    ring = base_ring(coordinates)
    identity = PolyDiffOp.identity(ring)

    def base_difference(a):
        alpha = multiplication_operator(a)
        return tensor(alpha, identity) - tensor(identity, alpha)

    def counit_left(t: PolyDiffOp) -> PolyDiffOp:
        zero = ring.zero_monom
        return PolyDiffOp(ring, 1, {(key[1],): c for key, c in t.terms.items() if key[0] == zero})

    def counit_right(t: PolyDiffOp) -> PolyDiffOp:
        zero = ring.zero_monom
        return PolyDiffOp(ring, 1, {(key[0],): c for key, c in t.terms.items() if key[1] == zero})

    generators = [identity]
    generators += [multiplication_operator(g) for g in ring.gens]
    generators += [partial_operator(ring, k) for k in range(ring.ngens)]

    instance = HopfAlgebroidInstance(
        name=name or f"D(R^{len(coordinates)})",
        multiply=compose,
        unit=identity,
        base_multiply=lambda a, b: a * b,
        base_unit=ring.one,
        alpha=multiplication_operator,
        beta=multiplication_operator,
        coproduct=coproduct or leibniz_coproduct,
        coproduct_slot=coproduct_slot or coproduct_in_slot,
        tensor_product=slotwise_product,
        base_difference=base_difference,
        counit=diffop_counit,
        counit_left=counit_left,
        counit_right=counit_right,
        flip=flip,
        probes=differential_operator_probes(ring, bounds.max_coefficient_degree, bounds.max_operator_order),
        base_probes=monomials_up_to(ring, bounds.max_coefficient_degree),
        generators=generators,
        max_exhaustive_pairs=bounds.max_exhaustive_pairs,
    )
    logger.info("built %s with %d probes over %s", instance.name, len(instance.probes),
                coordinate_names(ring))
    return instance


def _drop_right_primitive(t: PolyDiffOp, slot: int) -> PolyDiffOp:
    """Remove terms 1 (x) d^J (J != 0) produced in slots (slot, slot+1)."""
    zero = t.ring.zero_monom
    return PolyDiffOp(t.ring, t.arity, {k: c for k, c in t.terms.items()
                                        if not (k[slot] == zero and k[slot + 1] != zero)})


def corrupted_dp_instance(coordinates: Sequence[str], bounds: Optional[ProbeBounds] = None) -> HopfAlgebroidInstance:
    """Negative control: a coproduct that drops the 1 (x) D part, e.g. Delta(d) = d (x) 1."""
    return dp_instance(
        coordinates, bounds,
        coproduct=lambda op: _drop_right_primitive(leibniz_coproduct(op), 0),
        coproduct_slot=lambda t, slot: _drop_right_primitive(coproduct_in_slot(t, slot), slot),
        name="corrupted D",
    )


def ug_instance(g: LieAlgebraData, bounds: Optional[ProbeBounds] = None) -> HopfAlgebroidInstance:
    """U(g) over a point: primitive generators, counit = degree-0 coefficient."""
    bounds = bounds or ProbeBounds()
    algebra = UniversalEnvelopingAlgebra(g)
    one = algebra.one()
    unit_key = algebra.unit_monomial()

    def coproduct(h: PBWElement) -> PBWTensor:
        return PBWTensor(algebra, 1, {(m,): v for m, v in h.terms.items()}).coproduct_in_slot(0)

    def scalar_element(a) -> PBWElement:
        return one * a

    def counit_left(t: PBWTensor) -> PBWElement:
        out = PBWElement(algebra, {})
        for (m1, m2), v in t.terms.items():
            if m1 == unit_key:
                out = out + PBWElement(algebra, {m2: v})
        return out

    def counit_right(t: PBWTensor) -> PBWElement:
        out = PBWElement(algebra, {})
        for (m1, m2), v in t.terms.items():
            if m2 == unit_key:
                out = out + PBWElement(algebra, {m1: v})
        return out

    probes = [PBWElement(algebra, {m: QQ.one}) for m in pbw_monomials(g.dim, bounds.pbw_degree)]
    instance = HopfAlgebroidInstance(
        name=f"U({g.name})",
        multiply=lambda a, b: a * b,
        unit=one,
        base_multiply=lambda a, b: a * b,
        base_unit=QQ.one,
        alpha=scalar_element,
        beta=scalar_element,
        coproduct=coproduct,
        coproduct_slot=lambda t, slot: t.coproduct_in_slot(slot),
        tensor_product=lambda a, b: a.product(b),
        base_difference=lambda a: PBWTensor.simple(scalar_element(a), one) - PBWTensor.simple(one, scalar_element(a)),
        counit=lambda h: h.terms.get(unit_key, QQ.zero),
        counit_left=counit_left,
        counit_right=counit_right,
        flip=lambda t: t.permute((1, 0)),
        probes=probes,
        base_probes=[QQ.one, QQ(2), QQ(-1, 3)],
        generators=[one] + [algebra.generator(a) for a in range(g.dim)],
        max_exhaustive_pairs=bounds.max_exhaustive_pairs,
    )
    instance.algebra = algebra
    logger.info("built %s with %d PBW probes", instance.name, len(probes))
    return instance


# =========================
# Axiom checkers
# =========================


def check_coassociativity(inst: HopfAlgebroidInstance, probes: Optional[Sequence[Any]] = None) -> ResidualReport:
    report = ResidualReport("coassociativity")
    for h in probes if probes is not None else inst.probes:
        delta = inst.coproduct(h)
        report.record(f"h={h}", inst.coproduct_slot(delta, 0) - inst.coproduct_slot(delta, 1))
    return report


def check_compatibility(inst: HopfAlgebroidInstance, probes: Optional[Sequence[Any]] = None,
                        base_probes: Optional[Sequence[Any]] = None,
                        pairs: Optional[Sequence[Tuple[Any, Any]]] = None) -> ResidualReport:
    """Delta(h)(beta(a) (x) 1 - 1 (x) alpha(a)) = 0 and Delta(h1 h2) = Delta(h1) Delta(h2)."""
    report = ResidualReport("compatibility")
    probes = inst.probes if probes is None else probes
    base_probes = inst.base_probes if base_probes is None else base_probes
    for h in probes:
        delta = inst.coproduct(h)
        for a in base_probes:
            report.record(f"bimodule h={h}, a={a}", inst.tensor_product(delta, inst.base_difference(a)))
    for h1, h2 in (inst.probe_pairs() if pairs is None else pairs):
        lhs = inst.coproduct(inst.multiply(h1, h2))
        rhs = inst.tensor_product(inst.coproduct(h1), inst.coproduct(h2))
        report.record(f"multiplicative h1={h1}, h2={h2}", lhs - rhs)
    return report


def check_counit(inst: HopfAlgebroidInstance, probes: Optional[Sequence[Any]] = None) -> ResidualReport:
    report = ResidualReport("counit")
    for h in probes if probes is not None else inst.probes:
        delta = inst.coproduct(h)
        report.record(f"left h={h}", inst.counit_left(delta) - h)
        report.record(f"right h={h}", inst.counit_right(delta) - h)
    report.record("eps(1)", inst.counit(inst.unit) - inst.base_unit)
    return report


def check_cocommutativity(inst: HopfAlgebroidInstance, probes: Optional[Sequence[Any]] = None) -> ResidualReport:
    report = ResidualReport("cocommutativity")
    for h in probes if probes is not None else inst.probes:
        delta = inst.coproduct(h)
        report.record(f"h={h}", inst.flip(delta) - delta)
    return report


def check_source_target(inst: HopfAlgebroidInstance, base_probes: Optional[Sequence[Any]] = None) -> ResidualReport:
    """alpha homomorphism, beta anti-homomorphism, commuting images, eps alpha = eps beta = id."""
    report = ResidualReport("source-target")
    base_probes = inst.base_probes if base_probes is None else base_probes
    for a, b in itertools.product(base_probes, repeat=2):
        ab = inst.base_multiply(a, b)
        report.record(f"alpha a={a}, b={b}", inst.alpha(ab) - inst.multiply(inst.alpha(a), inst.alpha(b)))
        report.record(f"beta a={a}, b={b}", inst.beta(ab) - inst.multiply(inst.beta(b), inst.beta(a)))
        report.record(f"commute a={a}, b={b}",
                      inst.multiply(inst.alpha(a), inst.beta(b)) - inst.multiply(inst.beta(b), inst.alpha(a)))
    for a in base_probes:
        report.record(f"eps alpha a={a}", inst.counit(inst.alpha(a)) - a)
        report.record(f"eps beta a={a}", inst.counit(inst.beta(a)) - a)
    return report


def definition_suite(inst: HopfAlgebroidInstance) -> Dict[str, ResidualReport]:
    """Every axiom of a (cocommutative) Hopf algebroid on the instance probes."""
    logger.info("running Hopf algebroid axioms on %s", inst.name)
    reports = {
        "source-target": check_source_target(inst),
        "coassociativity": check_coassociativity(inst),
        "compatibility": check_compatibility(inst),
        "counit": check_counit(inst),
        "cocommutativity": check_cocommutativity(inst),
    }
    for name, report in reports.items():
        logger.info("  %s", report.summary())
    return reports
