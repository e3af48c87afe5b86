"""
Twists, Star Products and the Deformed Hopf Algebroid

A twist is a series phi = 1 (x) 1 + hbar B_1 + ... of bidifferential
operators; f * g = phi(f, g). The deformed Hopf algebroid keeps D(P)[[hbar]]
as total algebra and conjugates the coproduct by phi.

Storage convention: an element v of the deformed tensor square is kept as its
image Phi(v), a bidifferential series. Delta_hbar(x) is therefore stored as
Delta(x) . phi, and representatives are only recovered (canonical_lift) where
the counit needs them.

Product shapes used below:
- left factor a coproduct image: canonical product (postcomposition)
- right factor a raw tensor (1 (x) phi, beta(a) (x) 1 - 1 (x) alpha(a)):
  slotwise_product (precomposition)
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.rings import PolyElement, PolyRing

from .algebra_core import (
    HbarSeries,
    as_series,
    base_ring,
    monomials_up_to,
    series_invert,
    series_mul,
    to_rational,
)
from .diffop import (
    PolyDiffOp,
    RawTensor,
    apply,
    compose,
    contract,
    coproduct_in_slot,
    embed_right,
    extend,
    leibniz_coproduct,
    lift,
    multiplication_operator,
    normalize,
    partial_operator,
    slotwise_product,
    tensor,
)
from .hopf_classical import ProbeBounds, differential_operator_probes
from ..data.structures import ResidualReport
from ..utils.exceptions import PreconditionError, StructureError

logger = logging.getLogger(__name__)

SeriesLike = Union[PolyElement, HbarSeries]


# =========================
# Twists
# =========================


@dataclass(frozen=True)
class Twist:
    """phi truncated at order N; coefficient k is an arity-2 PolyDiffOp."""
    series: HbarSeries
    name: str = "twist"

    def __post_init__(self):
        leading = self.series[0]
        if not isinstance(leading, PolyDiffOp) or leading.arity != 2:
            raise StructureError("a twist is a series of bidifferential operators")
        if leading != PolyDiffOp.identity(leading.ring, 2):
            raise StructureError(f"{self.name}: leading term must be 1 ⊗ 1, got {leading}")

    @property
    def ring(self) -> PolyRing:
        return self.series[0].ring

    @property
    def order(self) -> int:
        return self.series.order

    @property
    def b1(self) -> PolyDiffOp:
        if self.order < 1:
            return PolyDiffOp.zero(self.ring, 2)
        return self.series[1]

    def truncate(self, order: int) -> "Twist":
        return Twist(self.series.truncate(order), self.name)

    def inverse(self) -> HbarSeries:
        return series_invert(self.series, slotwise_product, PolyDiffOp.identity(self.ring, 2))

    def __str__(self) -> str:
        return f"{self.name}: {self.series}"


def _exponential(ring: PolyRing, exponent: RawTensor, order: int, name: str) -> Twist:
    """exp(hbar * B) from a raw B, powers taken by slotwise composition."""
    coefficients = [PolyDiffOp.identity(ring, 2)]
    identity = PolyDiffOp.identity(ring)
    power = [(identity, identity)]
    for k in range(1, order + 1):
        power = [tuple(compose(p, q) for p, q in zip(s, t)) for s in power for t in exponent.summands]
        coefficients.append(normalize(RawTensor(ring, 2, power)) * QQ(1, factorial(k)))
        logger.debug("%s: hbar^%d coefficient has %d terms", name, k, coefficients[-1].size())
    return Twist(HbarSeries(tuple(coefficients)), name)


def _check_antisymmetric(c: Sequence[Sequence[Any]], size: int) -> List[List[Any]]:
    if len(c) != size or any(len(row) != size for row in c):
        raise StructureError(f"matrix must be {size}x{size}")
    matrix = [[to_rational(v) for v in row] for row in c]
    bad = [(i, j) for i in range(size) for j in range(size) if matrix[i][j] + matrix[j][i]]
    if bad:
        raise PreconditionError(f"matrix is not antisymmetric at {bad[:3]}", residual=bad)
    return matrix


def commuting_frame_twist(frame: Sequence[PolyDiffOp], c: Sequence[Sequence[Any]], order: int,
                          name: str = "commuting-frame") -> Twist:
    """phi = exp((hbar/2) sum c^{ij} X_i (x) X_j) for pairwise commuting first-order X_i."""
    if not frame:
        raise StructureError("a frame needs at least one vector field")
    ring = frame[0].ring
    for X in frame:
        if X.arity != 1 or X.order() > 1 or (ring.zero_monom,) in X.terms:
            raise StructureError(f"frame element {X} is not a vector field")
    for i, j in itertools.combinations(range(len(frame)), 2):
        commutator = compose(frame[i], frame[j]) - compose(frame[j], frame[i])
        if not commutator.is_zero():
            raise PreconditionError(f"frame fields {i} and {j} do not commute: [X_i, X_j] = {commutator}",
                                    residual=commutator)
    matrix = _check_antisymmetric(c, len(frame))
    summands = []
    for i, j in itertools.product(range(len(frame)), repeat=2):
        if matrix[i][j]:
            summands.append((frame[i] * (matrix[i][j] / 2), frame[j]))
    twist = _exponential(ring, RawTensor(ring, 2, summands), order, name)
    logger.info("built %s twist through hbar^%d", name, order)
    return twist


def moyal_twist(pi: Sequence[Sequence[Any]], order: int,
                coordinates: Optional[Sequence[str]] = None) -> Twist:
    """exp((hbar/2) pi^{ij} d_i (x) d_j) for a constant antisymmetric pi."""
    n = len(pi)
    if coordinates is None:
        coordinates = ("x", "p") if n == 2 else tuple(f"x{k + 1}" for k in range(n))
    ring = base_ring(tuple(coordinates))
    if ring.ngens != n:
        raise StructureError(f"{n}x{n} matrix over {ring.ngens} coordinates")
    frame = [partial_operator(ring, k) for k in range(n)]
    return commuting_frame_twist(frame, pi, order, name="moyal")


def explicit_twist(ring: PolyRing, terms: Sequence[Tuple[int, Any, Sequence[int], Sequence[int]]],
                   order: int, name: str = "explicit") -> Twist:
    """1 (x) 1 plus the listed terms (k, c, I, J) meaning hbar^k c d^I (x) d^J, k >= 1."""
    buckets: Dict[int, Dict[Tuple, Any]] = {}
    for k, coeff, first, second in terms:
        if not 1 <= k <= order:
            raise StructureError(f"explicit twist term at hbar^{k} outside 1..{order}")
        if not isinstance(coeff, PolyElement):
            coeff = ring(to_rational(coeff))
        key = (tuple(first), tuple(second))
        bucket = buckets.setdefault(k, {})
        bucket[key] = bucket[key] + coeff if key in bucket else coeff
    coefficients = [PolyDiffOp.identity(ring, 2)]
    coefficients += [PolyDiffOp(ring, 2, buckets.get(k, {})) for k in range(1, order + 1)]
    return Twist(HbarSeries(tuple(coefficients)), name)


def broken_twist(order: int, coordinates: Sequence[str] = ("x",)) -> Twist:
    """1 (x) 1 + hbar x d_x (x) d_x: associative at hbar^1, not at hbar^2."""
    ring = base_ring(tuple(coordinates))
    dx = tuple(1 if k == 0 else 0 for k in range(ring.ngens))
    return explicit_twist(ring, [(1, ring.gens[0], dx, dx)], order, name="broken")


# =========================
# Star algebra
# =========================


@dataclass
class StarAlgebra:
    twist: Twist
    order: Optional[int] = None

    def __post_init__(self):
        if self.order is None or self.order > self.twist.order:
            self.order = self.twist.order

    @property
    def ring(self) -> PolyRing:
        return self.twist.ring

    def series(self, f: SeriesLike) -> HbarSeries:
        if isinstance(f, HbarSeries):
            return f.truncate(self.order) if f.order > self.order else f
        if not isinstance(f, PolyElement):
            f = self.ring(to_rational(f))
        return HbarSeries.constant(f, self.order, self.ring.zero)

    def star(self, f: SeriesLike, g: SeriesLike) -> HbarSeries:
        return star_apply(self, f, g)


def star_apply(S: StarAlgebra, f: SeriesLike, g: SeriesLike) -> HbarSeries:
    """(f * g)_k = sum_{i+j+l=k} phi_i(f_j, g_l)."""
    fs, gs = S.series(f), S.series(g)
    n = min(S.order, fs.order, gs.order)
    out = []
    for k in range(n + 1):
        acc = S.ring.zero
        for i in range(k + 1):
            phi = S.twist.series[i]
            if phi.is_zero():
                continue
            for j in range(k - i + 1):
                acc += apply(phi, (fs[j], gs[k - i - j]))
        out.append(acc)
    return HbarSeries(tuple(out))


def _operator_series(S: StarAlgebra, f: SeriesLike, slot: int) -> HbarSeries:
    fs = S.series(f)
    n = min(S.order, fs.order)
    out = []
    for k in range(n + 1):
        acc = PolyDiffOp.zero(S.ring, 1)
        for i in range(k + 1):
            acc = acc + contract(S.twist.series[i], fs[k - i], slot)
        out.append(acc)
    return HbarSeries(tuple(out))


def alpha_h(S: StarAlgebra, f: SeriesLike) -> HbarSeries:
    """Operator series g -> f * g."""
    return _operator_series(S, f, 0)


def beta_h(S: StarAlgebra, f: SeriesLike) -> HbarSeries:
    """Operator series g -> g * f."""
    return _operator_series(S, f, 1)


def counit_h(D: HbarSeries) -> HbarSeries:
    """epsilon_hbar(D) = D(1), coefficientwise."""
    return D.map(lambda op: apply(op, (op.ring.one,)))


# =========================
# Residuals
# =========================


def twistor_residual(phi: Twist) -> HbarSeries:
    """(Delta (x) id)(phi) phi^{12} - (id (x) Delta)(phi) phi^{23}, tridifferential."""
    lhs = series_mul(phi.series.map(lambda b: coproduct_in_slot(b, 0)), phi.series.map(extend), slotwise_product)
    rhs = series_mul(phi.series.map(lambda b: coproduct_in_slot(b, 1)), phi.series.map(embed_right),
                     slotwise_product)
    residual = lhs - rhs
    logger.debug("%s: twistor residual leading order %d", phi.name, residual.leading_order())
    return residual


def assoc_residual(S: StarAlgebra, f: SeriesLike, g: SeriesLike, h: SeriesLike) -> HbarSeries:
    return star_apply(S, star_apply(S, f, g), h) - star_apply(S, f, star_apply(S, g, h))


def poisson_from_twist(phi: Twist) -> List[List[PolyElement]]:
    """pi^{ij} = B_1(x_i, x_j) - B_1(x_j, x_i)."""
    ring = phi.ring
    b1 = phi.b1
    gens = ring.gens
    return [[apply(b1, (gens[i], gens[j])) - apply(b1, (gens[j], gens[i])) for j in range(ring.ngens)]
            for i in range(ring.ngens)]


def bracket_jacobi_residual(pi: Sequence[Sequence[PolyElement]], ring: PolyRing) -> Dict[Tuple[int, int, int], PolyElement]:
    """{x_i,{x_j,x_k}} + cyclic for {f, g} = sum pi^{ab} d_a f d_b g."""

    def bracket(f, g):
        total = ring.zero
        for a in range(ring.ngens):
            df = f.diff(ring.gens[a])
            if not df:
                continue
            for b in range(ring.ngens):
                if pi[a][b]:
                    total += pi[a][b] * df * g.diff(ring.gens[b])
        return total

    found = {}
    gens = ring.gens
    for i, j, k in itertools.combinations(range(ring.ngens), 3):
        value = (bracket(gens[i], pi[j][k]) + bracket(gens[j], pi[k][i]) + bracket(gens[k], pi[i][j]))
        if value:
            found[(i, j, k)] = value
    return found


def check_poisson(phi: Twist) -> ResidualReport:
    report = ResidualReport("poisson")
    pi = poisson_from_twist(phi)
    n = phi.ring.ngens
    for i in range(n):
        for j in range(i, n):
            report.record(f"antisymmetry ({i},{j})", pi[i][j] + pi[j][i])
    jacobi = bracket_jacobi_residual(pi, phi.ring)
    for (i, j, k) in itertools.combinations(range(n), 3):
        report.record(f"jacobi ({i},{j},{k})", jacobi.get((i, j, k), phi.ring.zero))
    return report


def eq11_residual(S: StarAlgebra, f: SeriesLike) -> HbarSeries:
    """phi . (beta_hbar(f) (x) 1 - 1 (x) alpha_hbar(f))."""
    beta = beta_h(S, f)
    alpha = alpha_h(S, f)
    identity = PolyDiffOp.identity(S.ring)
    raw = HbarSeries(tuple(tensor(b, identity) - tensor(identity, a)
                           for b, a in zip(beta.coefficients, alpha.coefficients)))
    return series_mul(S.twist.series.truncate(S.order), raw, slotwise_product)


def check_eq11(S: StarAlgebra, probes: Sequence[SeriesLike]) -> ResidualReport:
    report = ResidualReport("eq11")
    for f in probes:
        report.record(f"f={f}", eq11_residual(S, f))
    return report


# =========================
# Deformed coproduct in stored form
# =========================


def stored_coproduct(S: StarAlgebra, x: Union[PolyDiffOp, HbarSeries]) -> HbarSeries:
    """Phi(Delta_hbar(x)) = Delta(x) . phi."""
    xs = as_series(x, S.order) if isinstance(x, HbarSeries) else HbarSeries.constant(x, S.order, x - x)
    return series_mul(xs.map(leibniz_coproduct), S.twist.series.truncate(S.order), slotwise_product)


@dataclass
class LiftedPair:
    """One summand (a, d^J) of a representative; a is an arity-1 operator series."""
    first: HbarSeries
    second: PolyDiffOp

    def raw(self, k: int, swapped: bool = False) -> RawTensor:
        a = self.first[k]
        return tensor(self.second, a) if swapped else tensor(a, self.second)


def lift_series(S: StarAlgebra, W: HbarSeries) -> HbarSeries:
    """T with phi . lift(T) = W, solved order by order."""
    phi = S.twist.series
    n = min(S.order, W.order)
    out: List[PolyDiffOp] = []
    for k in range(n + 1):
        acc = W[k]
        for i in range(1, k + 1):
            if phi[i].is_zero() or out[k - i].is_zero():
                continue
            acc = acc - slotwise_product(phi[i], lift(out[k - i]))
        out.append(acc)
    return HbarSeries(tuple(out))


def canonical_lift(S: StarAlgebra, W: HbarSeries) -> List[LiftedPair]:
    """Phi^{-1}: split T = phi^{-1} . W into pairs grouped by the slot-2 derivative."""
    terms = lift_series(S, W).coefficients
    ring = S.ring
    grouped: Dict[Tuple[int, ...], Dict[int, Dict]] = {}
    for k, t in enumerate(terms):
        for (k0, k1), c in t.terms.items():
            grouped.setdefault(k1, {}).setdefault(k, {})[(k0,)] = c
    pairs = []
    for index in sorted(grouped, reverse=True):
        by_order = grouped[index]
        first = HbarSeries(tuple(PolyDiffOp(ring, 1, by_order.get(k, {})) for k in range(len(terms))))
        pairs.append(LiftedPair(first, PolyDiffOp(ring, 1, {(index,): ring.one})))
    return pairs


def reapply_lift(S: StarAlgebra, pairs: Sequence[LiftedPair], swapped: bool = False) -> HbarSeries:
    """Phi of a representative: phi . sum (a (x) d^J)."""
    ring = S.ring
    order = S.order if not pairs else min(S.order, pairs[0].first.order)
    raw = []
    for k in range(order + 1):
        acc = RawTensor(ring, 2)
        for pair in pairs:
            acc = acc + pair.raw(k, swapped)
        raw.append(acc)
    return series_mul(S.twist.series.truncate(order), HbarSeries(tuple(raw)), slotwise_product)


def flip_stored(S: StarAlgebra, W: HbarSeries) -> HbarSeries:
    """Phi^{-1} o sigma o Phi on stored forms."""
    return reapply_lift(S, canonical_lift(S, W), swapped=True)


# =========================
# Deformed instance and axiom suite
# =========================


@dataclass
class DeformedInstance:
    """D_hbar(P): total algebra D(P)[[hbar]], base algebra (R[[hbar]], *)."""
    star: StarAlgebra
    probes: List[PolyDiffOp] = field(default_factory=list)
    base_probes: List[PolyElement] = field(default_factory=list)
    generators: List[PolyDiffOp] = field(default_factory=list)
    max_exhaustive_pairs: int = 1500
    name: str = "deformed"

    @property
    def ring(self) -> PolyRing:
        return self.star.ring

    @property
    def order(self) -> int:
        return self.star.order

    @property
    def twist(self) -> Twist:
        return self.star.twist

    def series_base_probes(self) -> List[HbarSeries]:
        """Series-valued base probes a_0 + hbar a_1 built from consecutive coordinates."""
        gens = self.ring.gens
        zero = self.ring.zero
        out = []
        for k in range(len(gens)):
            tail = gens[(k + 1) % len(gens)]
            out.append(HbarSeries((gens[k], tail) + (zero,) * (self.order - 1)) if self.order >= 1
                       else HbarSeries((gens[k],)))
        return out

    def probe_pairs(self) -> List[Tuple[PolyDiffOp, PolyDiffOp]]:
        if len(self.probes) ** 2 <= self.max_exhaustive_pairs:
            return list(itertools.product(self.probes, self.probes))
        logger.warning("%s: %d probes exceed the exhaustive pair budget; pairing with generators",
                       self.name, len(self.probes))
        pairs = [(h, g) for h in self.probes for g in self.generators]
        pairs += [(g, h) for g in self.generators for h in self.probes]
        return pairs


def deformed_instance(twist: Twist, bounds: Optional[ProbeBounds] = None, order: Optional[int] = None) -> DeformedInstance:
    bounds = bounds or ProbeBounds()
    ring = twist.ring
    star = StarAlgebra(twist, order)
    generators = [PolyDiffOp.identity(ring)]
    generators += [multiplication_operator(g) for g in ring.gens]
    generators += [partial_operator(ring, k) for k in range(ring.ngens)]
    instance = DeformedInstance(
        star=star,
        probes=differential_operator_probes(ring, bounds.max_coefficient_degree, bounds.max_operator_order),
        base_probes=monomials_up_to(ring, bounds.max_coefficient_degree),
        generators=generators,
        max_exhaustive_pairs=bounds.max_exhaustive_pairs,
        name=f"D_hbar[{twist.name}]",
    )
    logger.info("built %s through hbar^%d with %d probes", instance.name, star.order, len(instance.probes))
    return instance


def _twistor_products(inst: DeformedInstance) -> Tuple[HbarSeries, HbarSeries]:
    phi = inst.twist.series.truncate(inst.order)
    left = series_mul(phi.map(lambda b: coproduct_in_slot(b, 0)), phi.map(extend), slotwise_product)
    right = series_mul(phi.map(lambda b: coproduct_in_slot(b, 1)), phi.map(embed_right), slotwise_product)
    return left, right


def _iterated_coproducts(inst: DeformedInstance, h: PolyDiffOp) -> Tuple[HbarSeries, HbarSeries]:
    once = leibniz_coproduct(h)
    outer = coproduct_in_slot(once, 0)
    inner = coproduct_in_slot(once, 1)
    zero = outer - outer
    return HbarSeries.constant(outer, inst.order, zero), HbarSeries.constant(inner, inst.order, zero)


def transported_coassociativity(inst: DeformedInstance, h: PolyDiffOp, grouping: str = "inner") -> HbarSeries:
    """(Delta (x) id)Delta(h) . ((Delta (x) id) phi . phi^12) minus the (id (x) Delta) side.

    ``grouping="outer"`` multiplies the iterated coproduct into the coproduct factor first.
    """
    phi = inst.twist.series.truncate(inst.order)
    outer_h, inner_h = _iterated_coproducts(inst, h)
    if grouping == "inner":
        left, right = _twistor_products(inst)
        return (series_mul(outer_h, left, slotwise_product)
                - series_mul(inner_h, right, slotwise_product))
    if grouping != "outer":
        raise ValueError(f"unknown grouping {grouping!r}")
    left = series_mul(series_mul(outer_h, phi.map(lambda b: coproduct_in_slot(b, 0)), slotwise_product),
                      phi.map(extend), slotwise_product)
    right = series_mul(series_mul(inner_h, phi.map(lambda b: coproduct_in_slot(b, 1)), slotwise_product),
                       phi.map(embed_right), slotwise_product)
    return left - right


def check_deformed_coassociativity(inst: DeformedInstance) -> ResidualReport:
    report = ResidualReport("coassociativity")
    left, right = _twistor_products(inst)
    for h in inst.probes:
        outer_h, inner_h = _iterated_coproducts(inst, h)
        report.record(f"h={h}", series_mul(outer_h, left, slotwise_product)
                      - series_mul(inner_h, right, slotwise_product))
    return report


def check_deformed_compatibility(inst: DeformedInstance) -> ResidualReport:
    """(Delta(h) . phi) . (beta_hbar(a) (x) 1 - 1 (x) alpha_hbar(a)) for constant and series a."""
    report = ResidualReport("compatibility")
    S = inst.star
    identity = PolyDiffOp.identity(inst.ring)
    raws = []
    for a in list(inst.base_probes) + inst.series_base_probes():
        beta, alpha = beta_h(S, a), alpha_h(S, a)
        raws.append((a, HbarSeries(tuple(tensor(b, identity) - tensor(identity, al)
                                         for b, al in zip(beta.coefficients, alpha.coefficients)))))
    for h in inst.probes:
        stored = stored_coproduct(S, h)
        for a, raw in raws:
            report.record(f"h={h}, a={a}", series_mul(stored, raw, slotwise_product))
    return report


def check_deformed_multiplicativity(inst: DeformedInstance) -> ResidualReport:
    """Delta(h1 h2) . phi against Delta(h1) . (Delta(h2) . phi)."""
    report = ResidualReport("multiplicativity")
    S = inst.star
    stored = {}
    for h1, h2 in inst.probe_pairs():
        key = id(h2)
        if key not in stored:
            stored[key] = stored_coproduct(S, h2)
        delta1 = leibniz_coproduct(h1)
        nested = stored[key].map(lambda w: slotwise_product(delta1, w))
        report.record(f"h1={h1}, h2={h2}", stored_coproduct(S, compose(h1, h2)) - nested)
    return report


def check_deformed_counit(inst: DeformedInstance) -> ResidualReport:
    """sum alpha_hbar(eps(a_J)) o d^J = x and sum beta_hbar(eps(d^J)) o a_J = x."""
    report = ResidualReport("counit")
    S = inst.star
    for h in inst.probes:
        target = HbarSeries.constant(h, S.order, h - h)
        pairs = canonical_lift(S, stored_coproduct(S, h))
        left = HbarSeries.constant(h - h, S.order)
        right = HbarSeries.constant(h - h, S.order)
        for pair in pairs:
            second = HbarSeries.constant(pair.second, S.order, pair.second - pair.second)
            left = left + series_mul(alpha_h(S, counit_h(pair.first)), second, compose)
            right = right + series_mul(beta_h(S, counit_h(second)), pair.first, compose)
        report.record(f"left h={h}", left - target)
        report.record(f"right h={h}", right - target)
    report.extend(check_unital(inst.twist))
    return report


def check_unital(phi: Twist) -> ResidualReport:
    """phi_k(1, .) = phi_k(., 1) = 0 for k >= 1; the counit identities rely on it."""
    report = ResidualReport("unital")
    one = phi.ring.one
    for k in range(1, phi.order + 1):
        report.record(f"phi_{k}(1, .)", contract(phi.series[k], one, 0))
        report.record(f"phi_{k}(., 1)", contract(phi.series[k], one, 1))
    return report


def check_deformed_source_target(inst: DeformedInstance) -> ResidualReport:
    """alpha_hbar homomorphism, beta_hbar anti-homomorphism for *, commuting images, eps alpha = id."""
    report = ResidualReport("source-target")
    S = inst.star
    alphas = {id(a): alpha_h(S, a) for a in inst.base_probes}
    betas = {id(a): beta_h(S, a) for a in inst.base_probes}
    for a, b in itertools.product(inst.base_probes, repeat=2):
        ab = star_apply(S, a, b)
        report.record(f"alpha a={a}, b={b}",
                      alpha_h(S, ab) - series_mul(alphas[id(a)], alphas[id(b)], compose))
        report.record(f"beta a={a}, b={b}",
                      beta_h(S, ab) - series_mul(betas[id(b)], betas[id(a)], compose))
        report.record(f"commute a={a}, b={b}",
                      series_mul(alphas[id(a)], betas[id(b)], compose)
                      - series_mul(betas[id(b)], alphas[id(a)], compose))
    for a in inst.base_probes:
        report.record(f"eps alpha a={a}", counit_h(alphas[id(a)]) - S.series(a))
        report.record(f"eps beta a={a}", counit_h(betas[id(a)]) - S.series(a))
    return report


def check_mod_hbar(inst: DeformedInstance) -> ResidualReport:
    """At hbar^0 every structure map is the classical one."""
    report = ResidualReport("mod-hbar")
    S = inst.star
    for h in inst.probes:
        report.record(f"Delta h={h}", stored_coproduct(S, h)[0] - leibniz_coproduct(h))
    for a in inst.base_probes:
        report.record(f"alpha a={a}", alpha_h(S, a)[0] - multiplication_operator(a))
        report.record(f"beta a={a}", beta_h(S, a)[0] - multiplication_operator(a))
        report.record(f"star a={a}", star_apply(S, a, a)[0] - a * a)
    return report


def deformed_axiom_suite(inst: DeformedInstance) -> Dict[str, ResidualReport]:
    logger.info("running deformed Hopf algebroid axioms on %s through hbar^%d", inst.name, inst.order)
    reports = {
        "twistor": _report_series("twistor", twistor_residual(inst.twist.truncate(inst.order))),
        "source-target": check_deformed_source_target(inst),
        "coassociativity": check_deformed_coassociativity(inst),
        "eq11": check_eq11(inst.star, inst.base_probes),
        "compatibility": check_deformed_compatibility(inst),
        "multiplicativity": check_deformed_multiplicativity(inst),
        "counit": check_deformed_counit(inst),
        "mod-hbar": check_mod_hbar(inst),
    }
    for report in reports.values():
        logger.info("  %s", report.summary())
    return reports


def _report_series(name: str, residual: HbarSeries) -> ResidualReport:
    report = ResidualReport(name)
    for k, c in enumerate(residual.coefficients):
        report.record(f"hbar^{k}", c)
    return report


def check_twistor(phi: Twist) -> ResidualReport:
    return _report_series("twistor", twistor_residual(phi))


def check_associativity(S: StarAlgebra, degree: int = 3) -> ResidualReport:
    """assoc_residual on all monomial triples of degree <= degree."""
    report = ResidualReport("associativity")
    monomials = monomials_up_to(S.ring, degree)
    for f, g, h in itertools.product(monomials, repeat=3):
        report.record(f"({f}, {g}, {h})", assoc_residual(S, f, g, h))
    return report
