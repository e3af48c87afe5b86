"""
Classical Limit of a Twisted Quantum Groupoid

The first-order data of a deformed instance assemble into a Lie bialgebroid
(T P, T* P):
- {f, g}   = [hbar^1] (f * g - g * f)
- d f      = [hbar^1] (alpha_hbar(f) - beta_hbar(f))
- Delta^1X = [hbar^1] (Delta_hbar(X) - (X (x) 1 + 1 (x) X)), both in stored form
- d X      = Delta^1 X - flip(Delta^1 X)

Bidifferential operators translate to bivectors through
P^{ij} e_i ^ e_j  <->  P^{ij} (d_i (x) d_j - d_j (x) d_i).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from sympy.polys.rings import PolyElement

from .algebra_core import HbarSeries, coordinate_names, monomials_up_to, series_mul
from .diffop import (
    PolyDiffOp,
    flip,
    partial_operator,
    normalize,
    slotwise_product,
    tensor,
)
from .hopf_classical import ProbeBounds
from .lie_algebroid import (
    LieAlgebroidData,
    LieBialgebroidData,
    Multivector,
    RankReport,
    base_poisson,
    bialgebroid_compat_check,
    bivector_from_matrix,
    poisson_jacobi_residual,
    regularity_rank,
    tangent_algebroid,
    triangular_differential,
    wedge,
)
from .star_twist import (
    DeformedInstance,
    Twist,
    alpha_h,
    beta_h,
    commuting_frame_twist,
    deformed_axiom_suite,
    deformed_instance,
    flip_stored,
    lift_series,
    stored_coproduct,
    star_apply,
)
from ..data.structures import ResidualReport
from ..utils.config_loader import get_config_loader
from ..utils.exceptions import ClassicalLimitError, PreconditionError

logger = logging.getLogger(__name__)

CONVENTIONS = ("stored", "plain-sum")


def default_convention() -> str:
    return get_config_loader().get_value('classical_limit', 'TENSOR_CONVENTION', 'stored')


def tangent_of(inst: DeformedInstance) -> LieAlgebroidData:
    return tangent_algebroid(coordinate_names(inst.ring))


# =========================
# Operator <-> multivector translation
# =========================


def vector_field_defect(op: PolyDiffOp) -> PolyDiffOp:
    """Terms of an arity-1 operator that are not first order."""
    return PolyDiffOp(op.ring, 1, {k: c for k, c in op.terms.items() if sum(k[0]) != 1})


def operator_to_section(A: LieAlgebroidData, op: PolyDiffOp) -> Multivector:
    defect = vector_field_defect(op)
    if not defect.is_zero():
        raise ClassicalLimitError(f"not a vector field: {defect}")
    out = A.zero(1)
    for (index,), c in op.terms.items():
        out = out + A.section(index.index(1), c)
    return out


def bivector_defect(op: PolyDiffOp) -> PolyDiffOp:
    """Terms outside d_i (x) d_j plus the symmetric part of those inside."""
    ring = op.ring
    symmetric = op + flip(op)
    out: Dict = {}
    for key, c in op.terms.items():
        if sum(key[0]) != 1 or sum(key[1]) != 1:
            out[key] = c
    for key, c in symmetric.terms.items():
        if sum(key[0]) == 1 and sum(key[1]) == 1 and key[0] <= key[1]:
            out[key] = c
    return PolyDiffOp(ring, 2, out)


def operator_to_bivector(A: LieAlgebroidData, op: PolyDiffOp) -> Multivector:
    defect = bivector_defect(op)
    if not defect.is_zero():
        raise ClassicalLimitError(f"not a bivector: {defect}")
    r = A.rank
    matrix = [[A.domain.zero] * r for _ in range(r)]
    for (first, second), c in op.terms.items():
        matrix[first.index(1)][second.index(1)] = c
    return bivector_from_matrix(A, matrix)


def bivector_to_operator(P: Multivector) -> PolyDiffOp:
    A = P.algebroid
    ring = A.domain
    n = A.base_dim
    unit = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    terms = {}
    for (i, j), c in P.terms.items():
        terms[(unit[i], unit[j])] = c
        terms[(unit[j], unit[i])] = -c
    return PolyDiffOp(ring, 2, terms)


# =========================
# First-order extraction
# =========================


def hbar1_bracket(inst: DeformedInstance) -> List[List[PolyElement]]:
    """{x_i, x_j} = [hbar^1](x_i * x_j - x_j * x_i)."""
    if inst.order < 1:
        raise ClassicalLimitError("the classical limit needs truncation order >= 1")
    gens = inst.ring.gens
    n = len(gens)
    return [[(star_apply(inst.star, gens[i], gens[j]) - star_apply(inst.star, gens[j], gens[i]))[1]
             for j in range(n)] for i in range(n)]


def poisson_bracket(inst: DeformedInstance, f: PolyElement, g: PolyElement) -> PolyElement:
    return (star_apply(inst.star, f, g) - star_apply(inst.star, g, f))[1]


def delta_f_operator(inst: DeformedInstance, f: PolyElement) -> PolyDiffOp:
    if inst.order < 1:
        raise ClassicalLimitError("the classical limit needs truncation order >= 1")
    return (alpha_h(inst.star, f) - beta_h(inst.star, f))[1]


def delta_f(inst: DeformedInstance, f: PolyElement, A: Optional[LieAlgebroidData] = None) -> Multivector:
    """d f as a section of T P."""
    return operator_to_section(A or tangent_of(inst), delta_f_operator(inst, f))


def stored_difference(inst: DeformedInstance, X: PolyDiffOp, convention: str = "stored") -> HbarSeries:
    """Delta(X) . phi - phi . (X (x) 1 + 1 (x) X), or minus the plain sum for ``"plain-sum"``."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown tensor convention {convention!r}")
    S = inst.star
    phi = S.twist.series.truncate(S.order)
    identity = PolyDiffOp.identity(inst.ring)
    primitive = tensor(X, identity) + tensor(identity, X)
    deformed = stored_coproduct(S, X)
    trivial = HbarSeries.constant(primitive, S.order, primitive - primitive)
    if convention == "stored":
        trivial = series_mul(phi, trivial, slotwise_product)
    else:
        trivial = HbarSeries(tuple(normalize(c) for c in trivial.coefficients))
    return deformed - trivial


def coproduct_correction(inst: DeformedInstance, X: PolyDiffOp, convention: Optional[str] = None) -> PolyDiffOp:
    """Delta^1 X with the primitive part read as phi . (X (x) 1 + 1 (x) X) or as the plain sum."""
    convention = convention or default_convention()
    if inst.order < 1:
        raise ClassicalLimitError("the classical limit needs truncation order >= 1")
    return stored_difference(inst, X, convention)[1]


def delta_X_operator(inst: DeformedInstance, X: PolyDiffOp, convention: Optional[str] = None) -> PolyDiffOp:
    d1 = coproduct_correction(inst, X, convention)
    return d1 - flip(d1)


def delta_X(inst: DeformedInstance, X: PolyDiffOp, convention: Optional[str] = None,
            A: Optional[LieAlgebroidData] = None) -> Multivector:
    """d X as a bivector."""
    return operator_to_bivector(A or tangent_of(inst), delta_X_operator(inst, X, convention))


def assemble_bialgebroid(inst: DeformedInstance, convention: Optional[str] = None) -> LieBialgebroidData:
    """Tables d x_l and d(d_l) from the first-order data."""
    A = tangent_of(inst)
    ring = inst.ring
    delta_functions = [delta_f(inst, x, A) for x in ring.gens]
    delta_frame = [delta_X(inst, partial_operator(ring, l), convention, A) for l in range(ring.ngens)]
    logger.info("assembled classical limit of %s", inst.name)
    return LieBialgebroidData(A, delta_functions, delta_frame, name=f"limit of {inst.name}")


# =========================
# Report
# =========================


@dataclass
class ClassicalLimitReport:
    bracket: List[List[Any]]
    bialgebroid: Optional[LieBialgebroidData]
    reports: Dict[str, ResidualReport] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.bialgebroid is not None and all(r.passed for r in self.reports.values())

    def summary(self) -> str:
        return "; ".join(r.summary() for r in self.reports.values())


def classical_limit_report(inst: DeformedInstance, convention: Optional[str] = None,
                           degree: int = 1) -> ClassicalLimitReport:
    """Run every first-order check and assemble the bialgebroid when the types allow it."""
    convention = convention or default_convention()
    ring = inst.ring
    A = tangent_of(inst)
    probes = monomials_up_to(ring, degree)
    frame = [partial_operator(ring, l) for l in range(ring.ngens)]
    reports: Dict[str, ResidualReport] = {}

    bracket = hbar1_bracket(inst)
    bracket_report = ResidualReport("poisson-bracket")
    for i, j in itertools.combinations_with_replacement(range(ring.ngens), 2):
        bracket_report.record(f"antisymmetry ({i},{j})", bracket[i][j] + bracket[j][i])
    bracket_report.record("jacobi", poisson_jacobi_residual(bracket, A.coordinates))
    reports["poisson-bracket"] = bracket_report

    types = ResidualReport("types")
    for f in probes:
        types.record(f"d f, f={f}", vector_field_defect(delta_f_operator(inst, f)))
    for l, X in enumerate(frame):
        types.record(f"d X, X={X}", bivector_defect(delta_X_operator(inst, X, convention)))
        types.record(f"d X, X={X * ring.gens[l]}",
                     bivector_defect(delta_X_operator(inst, X * ring.gens[l], convention)))
    reports["types"] = types
    if not types.passed:
        logger.warning("%s: first-order data are not of vector-field/bivector type", inst.name)
        return ClassicalLimitReport(bracket, None, reports)

    functions = ResidualReport("derivation-functions")
    for f, g in itertools.product(probes, repeat=2):
        lhs = delta_f(inst, f * g, A)
        rhs = delta_f(inst, g, A) * f + delta_f(inst, f, A) * g
        functions.record(f"d({f}*{g})", lhs - rhs)
    reports["derivation-functions"] = functions

    sections = ResidualReport("derivation-sections")
    for f in probes:
        df = delta_f(inst, f, A)
        for l, X in enumerate(frame):
            lhs = delta_X(inst, X * f, convention, A)
            rhs = delta_X(inst, X, convention, A) * f + wedge(df, A.section(l))
            sections.record(f"d({f}*{X})", lhs - rhs)
    reports["derivation-sections"] = sections

    anchor = ResidualReport("anchor")
    for f, g in itertools.product(probes, repeat=2):
        df = delta_f(inst, f, A)
        rho = sum((c * g.diff(ring.gens[i]) for (i,), c in df.terms.items()), ring.zero)
        anchor.record(f"rho(d {f}) {g}", rho - poisson_bracket(inst, f, g))
    reports["anchor"] = anchor

    conventions = ResidualReport("conventions")
    for X in frame + [X * ring.gens[l] for l, X in enumerate(frame)]:
        stored = coproduct_correction(inst, X, "stored")
        lifted = lift_series(inst.star, stored_difference(inst, X))[1]
        conventions.record(f"stored vs lifted X={X}", stored - lifted)
        transported = (stored_difference(inst, X) - flip_stored(inst.star, stored_difference(inst, X)))[1]
        conventions.record(f"flip transport X={X}", transported - (stored - flip(stored)))
    reports["conventions"] = conventions

    B = assemble_bialgebroid(inst, convention)
    reports["bialgebroid"] = bialgebroid_compat_check(B, degree)
    poisson = ResidualReport("base-poisson")
    induced = base_poisson(B, check=False)
    for i, j in itertools.product(range(ring.ngens), repeat=2):
        poisson.record(f"({i},{j})", induced[i][j] - bracket[i][j])
    reports["base-poisson"] = poisson
    for report in reports.values():
        logger.info("  %s", report.summary())
    return ClassicalLimitReport(bracket, B, reports)


# =========================
# Flat triangular quantization
# =========================


def _is_tangent(A: LieAlgebroidData) -> bool:
    n = A.base_dim
    if A.rank != n:
        return False
    for i in range(n):
        for l in range(n):
            if A.anchor[i, l] != (A.domain.one if i == l else A.domain.zero):
                return False
    return not any(A.structure.flat) if A.structure.size else True


def quantize_flat_triangular(A: LieAlgebroidData, Lam: Multivector, order: int) -> Twist:
    """Commuting-frame twist exp((hbar/2) Lambda^{ij} d_i (x) d_j) for constant Lambda on T R^n."""
    if not _is_tangent(A) or A.coefficient_field != "poly":
        raise PreconditionError("flat quantization needs the tangent algebroid in its coordinate frame")
    matrix = Lam.to_matrix()
    constants = []
    for row in matrix:
        if any(not c.is_ground for c in row):
            raise PreconditionError(f"Lambda = {Lam} does not have constant coefficients", residual=Lam)
        constants.append([c.LC if c else 0 for c in row])
    ring = A.domain
    frame = [partial_operator(ring, l) for l in range(A.base_dim)]
    twist = commuting_frame_twist(frame, constants, order, name="flat-triangular")
    logger.info("quantized Lambda = %s through hbar^%d", Lam, order)
    return twist


@dataclass
class RoundTripReport:
    rank: RankReport
    reports: Dict[str, ResidualReport] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.rank.regular and all(r.passed for r in self.reports.values())


def round_trip_report(A: LieAlgebroidData, Lam: Multivector, order: int,
                      bounds: Optional[ProbeBounds] = None, convention: Optional[str] = None) -> RoundTripReport:
    """Quantize, run the deformed suite, take the classical limit and compare with (Lambda, d_Lambda)."""
    rank = regularity_rank(Lam)
    expected = triangular_differential(A, Lam)
    inst = deformed_instance(quantize_flat_triangular(A, Lam, order), bounds)
    reports = dict(deformed_axiom_suite(inst))
    limit = classical_limit_report(inst, convention)
    reports.update(limit.reports)
    recovered = ResidualReport("round-trip")
    if limit.bialgebroid is not None:
        B = limit.bialgebroid
        for l in range(A.base_dim):
            recovered.record(f"d x{l}", B.delta_functions[l] - expected.delta_functions[l])
        for i in range(A.rank):
            recovered.record(f"d e{i}", B.delta_frame[i] - expected.delta_frame[i])
        induced = bivector_from_matrix(A, base_poisson(B))
        recovered.record("Lambda", induced - Lam)
    else:
        recovered.notes.append("classical limit could not be assembled")
        recovered.record("Lambda", Lam)
    reports["round-trip"] = recovered
    logger.info("round trip: %s; %s", rank.summary(), recovered.summary())
    return RoundTripReport(rank, reports)
