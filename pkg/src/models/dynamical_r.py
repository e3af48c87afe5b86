"""
Classical Dynamical r-Matrices

An h*-dependent element r(lam) = sum r^{ab}(lam) e_a (x) e_b of g (x) g with
rational coefficients in the coordinates lam_alpha dual to the Cartan basis.

The classical dynamical Yang-Baxter residual is
    sign * Alt(dr) + [r12, r13] + [r12, r23] + [r13, r23]
where Alt(dr) = sum_alpha h_alpha in one slot and d r / d lam_alpha in the
other two. The slot placement and the global sign are fixed by calibration
against the rational sl2 family and read from the ``dynamical`` config section.

A solution that is zero-weight and has a constant ad-invariant symmetric part
gives the bivector Lambda = sum xi_alpha ^ h_alpha + skew(r) on the product
algebroid T h* x g, with xi_alpha = d / d lam_alpha.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy import QQ
from sympy.polys.fields import FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .algebra_core import parse_coefficient, partial, rational_field, to_rational
from .lie_algebroid import (
    LieAlgebroidData,
    LieBialgebroidData,
    Multivector,
    bialgebroid_compat_check,
    bivector_from_matrix,
    schouten,
    triangular_differential,
)
from ..data.structures import LieAlgebraData, ResidualReport, StandardAlgebras
from ..utils.config_loader import get_config_loader
from ..utils.exceptions import NotInvertibleError, PreconditionError, StructureError

logger = logging.getLogger(__name__)

ALT_PLACEMENTS = ("cyclic", "leading", "trailing")


@dataclass(frozen=True)
class AltConvention:
    """Sign and slot placement of Alt(dr).

    cyclic:   h^(1) dr^{23} + h^(2) dr^{31} + h^(3) dr^{12}
    leading:  h^(1) dr^{23} + h^(2) dr^{13} + h^(3) dr^{12}
    trailing: h^(1) dr^{32} + h^(2) dr^{31} + h^(3) dr^{21}
    """
    sign: int = -1
    placement: str = "cyclic"

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("Alt sign must be 1 or -1")
        if self.placement not in ALT_PLACEMENTS:
            raise ValueError(f"Alt placement must be one of {ALT_PLACEMENTS}")

    @classmethod
    def from_config(cls, params: Optional[Mapping[str, Any]] = None) -> "AltConvention":
        if params is None:
            params = get_config_loader().get_dynamical_parameters()
        return cls(sign=int(params.get('ALT_SIGN', -1)), placement=params.get('ALT_PLACEMENT', 'cyclic'))

    @property
    def label(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}{self.placement}"


def lambda_coordinates(g: LieAlgebraData) -> Tuple[str, ...]:
    return tuple(f"lam_{g.basis[i]}" for i in g.cartan_indices)


def lambda_field(g: LieAlgebraData) -> FracField:
    if not g.cartan_indices:
        raise StructureError(f"{g.name} has no Cartan indices")
    return rational_field(lambda_coordinates(g))


def _constants_in(g: LieAlgebraData, domain: FracField) -> np.ndarray:
    return np.vectorize(lambda c: domain(to_rational(c)), otypes=[object])(g.structure_constants)


# =========================
# Dynamical r
# =========================


@dataclass
class DynamicalR:
    """m x m matrix of rational functions of lam; entries[a, b] = r^{ab}."""
    algebra: LieAlgebraData
    entries: np.ndarray
    name: str = "r"

    def __post_init__(self):
        m = self.algebra.dim
        if self.entries.shape != (m, m):
            raise StructureError(f"r must be {m}x{m}, got {self.entries.shape}")
        domain = self.field
        self.entries = np.vectorize(lambda v: parse_coefficient(domain, v), otypes=[object])(self.entries)

    @classmethod
    def from_entries(cls, g: LieAlgebraData, values: Mapping[Tuple[str, str], Any], name: str = "r") -> "DynamicalR":
        """Sparse constructor keyed by basis names; values may be expression strings in lam_*."""
        domain = lambda_field(g)
        entries = np.empty((g.dim, g.dim), dtype=object)
        entries.fill(domain.zero)
        for (a, b), value in values.items():
            entries[g.index(a), g.index(b)] = parse_coefficient(domain, value)
        return cls(g, entries, name)

    @classmethod
    def zero(cls, g: LieAlgebraData) -> "DynamicalR":
        return cls.from_entries(g, {}, name="0")

    @property
    def field(self) -> FracField:
        return lambda_field(self.algebra)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def derivative(self, alpha: int) -> np.ndarray:
        """d r / d lam_alpha, alpha indexing the Cartan list."""
        return np.vectorize(lambda c: partial(c, alpha), otypes=[object])(self.entries)

    def flip(self) -> "DynamicalR":
        return DynamicalR(self.algebra, self.entries.T.copy(), f"{self.name}^21")

    def skew(self) -> np.ndarray:
        return (self.entries - self.entries.T) * self.field(QQ(1, 2))

    def __add__(self, other: "DynamicalR") -> "DynamicalR":
        return DynamicalR(self.algebra, self.entries + other.entries, f"{self.name}+{other.name}")

    def scale(self, factor: Any) -> "DynamicalR":
        return DynamicalR(self.algebra, self.entries * self.field(to_rational(factor)), f"{factor}*{self.name}")

    def __str__(self) -> str:
        basis = self.algebra.basis
        parts = [f"({self.entries[a, b]})*{basis[a]}⊗{basis[b]}"
                 for a, b in itertools.product(range(self.dim), repeat=2) if self.entries[a, b]]
        return " + ".join(parts) if parts else "0"


def constant_r(g: LieAlgebraData, values: Mapping[Tuple[str, str], Any], name: str = "r") -> DynamicalR:
    return DynamicalR.from_entries(g, values, name)


def rational_sl2_fixture(shift: Any = 0) -> DynamicalR:
    """r_c = -1/(lam - c) (e (x) f - f (x) e) on sl2."""
    g = StandardAlgebras.sl2()
    domain = lambda_field(g)
    lam = domain.gens[0]
    value = -1 / (lam - domain(to_rational(shift)))
    return DynamicalR.from_entries(g, {("e", "f"): value, ("f", "e"): -value}, name=f"rational sl2 (c={shift})")


def perturbed_sl2_fixture() -> DynamicalR:
    """The rational fixture with r^{ef} scaled by 2."""
    r = rational_sl2_fixture()
    entries = r.entries.copy()
    g = r.algebra
    entries[g.index("e"), g.index("f")] = entries[g.index("e"), g.index("f")] * 2
    return DynamicalR(g, entries, name="perturbed rational sl2")


# =========================
# CDYBE
# =========================


def _zero_cube(domain: FracField, m: int) -> np.ndarray:
    out = np.empty((m, m, m), dtype=object)
    out.fill(domain.zero)
    return out


def bracket_terms(g: LieAlgebraData, r: DynamicalR) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """[r12, r13], [r12, r23], [r13, r23] as m^3 arrays."""
    f = _constants_in(g, r.field)
    R = r.entries
    t12_13 = np.tensordot(np.tensordot(f, R, axes=([0], [0])), R, axes=([0], [0]))  # (x, b, d)
    t12_23 = np.tensordot(np.tensordot(R, f, axes=([1], [0])), R, axes=([1], [0]))  # (a, x, d)
    t13_23 = np.transpose(np.tensordot(np.tensordot(R, f, axes=([1], [0])), R, axes=([1], [1])), (0, 2, 1))
    return t12_13, t12_23, t13_23


def alt_dr(g: LieAlgebraData, r: DynamicalR, convention: Optional[AltConvention] = None) -> np.ndarray:
    """Alt(dr) with the convention's placement, unsigned."""
    convention = convention or AltConvention.from_config()
    out = _zero_cube(r.field, g.dim)
    for alpha, h in enumerate(g.cartan_indices):
        D = r.derivative(alpha)
        if convention.placement == "cyclic":
            first, second, third = D, D.T, D
        elif convention.placement == "leading":
            first, second, third = D, D, D
        else:
            first, second, third = D.T, D.T, D.T
        out[h, :, :] += first
        out[:, h, :] += second
        out[:, :, h] += third
    return out


def cdybe_residual(g: LieAlgebraData, r: DynamicalR, convention: Optional[AltConvention] = None) -> np.ndarray:
    convention = convention or AltConvention.from_config()
    if r.algebra.basis != g.basis:
        raise StructureError(f"r lives on {r.algebra.name}, not {g.name}")
    t12_13, t12_23, t13_23 = bracket_terms(g, r)
    residual = alt_dr(g, r, convention) * r.field(convention.sign) + t12_13 + t12_23 + t13_23
    logger.debug("%s: CDYBE residual has %d nonzero entries", r.name, sum(1 for v in residual.flat if v))
    return residual


def cybe_residual_oracle(g: LieAlgebraData, r: DynamicalR) -> np.ndarray:
    """[r12, r13] + [r12, r23] + [r13, r23] by direct summation over pairs of terms."""
    m = g.dim
    out = _zero_cube(r.field, m)
    unit = [[QQ.one if k == a else QQ.zero for k in range(m)] for a in range(m)]
    terms = [(a, b, r.entries[a, b]) for a, b in itertools.product(range(m), repeat=2) if r.entries[a, b]]
    for (a, b, u), (c, d, v) in itertools.product(terms, repeat=2):
        uv = u * v
        for x, coeff in enumerate(g.bracket(unit[a], unit[c])):
            if coeff:
                out[x, b, d] += uv * coeff
        for x, coeff in enumerate(g.bracket(unit[b], unit[c])):
            if coeff:
                out[a, x, d] += uv * coeff
        for x, coeff in enumerate(g.bracket(unit[b], unit[d])):
            if coeff:
                out[a, c, x] += uv * coeff
    return out


def _report_array(name: str, basis: Sequence[str], residual: np.ndarray) -> ResidualReport:
    report = ResidualReport(name)
    for index in itertools.product(*(range(k) for k in residual.shape)):
        report.record("(" + ",".join(basis[i] for i in index) + ")", residual[index])
    return report


def check_cdybe(g: LieAlgebraData, r: DynamicalR, convention: Optional[AltConvention] = None) -> ResidualReport:
    convention = convention or AltConvention.from_config()
    report = _report_array("cdybe", g.basis, cdybe_residual(g, r, convention))
    report.notes.append(f"Alt convention {convention.label}")
    return report


# =========================
# Equivariance and symmetric part
# =========================


def ad_action(g: LieAlgebraData, x: int, T: np.ndarray) -> np.ndarray:
    """[e_x (x) 1 + 1 (x) e_x, T] for T in g (x) g."""
    f = _constants_in(g, lambda_field(g)) if g.cartan_indices else g.structure_constants
    ad = f[x, :, :].T  # ad[a, c] = f^a_{xc}
    return ad.dot(T) + T.dot(ad.T)


def equivariance_residual(g: LieAlgebraData, r: DynamicalR) -> np.ndarray:
    """Stack over Cartan generators of [h (x) 1 + 1 (x) h, r]."""
    if not g.cartan_indices:
        return np.empty((0, g.dim, g.dim), dtype=object)
    return np.stack([ad_action(g, h, r.entries) for h in g.cartan_indices])


def check_equivariance(g: LieAlgebraData, r: DynamicalR) -> ResidualReport:
    report = ResidualReport("equivariance")
    residual = equivariance_residual(g, r)
    for k, h in enumerate(g.cartan_indices):
        for a, b in itertools.product(range(g.dim), repeat=2):
            report.record(f"{g.basis[h]}: ({g.basis[a]},{g.basis[b]})", residual[k, a, b])
    return report


def symmetric_part_check(r: DynamicalR) -> ResidualReport:
    """r + r^21 must be lam-independent and ad-invariant."""
    g = r.algebra
    report = ResidualReport("symmetric-part")
    symmetric = r.entries + r.entries.T
    names = lambda_coordinates(g)
    for a, b in itertools.combinations_with_replacement(range(g.dim), 2):
        for alpha, lam in enumerate(names):
            report.record(f"d/d{lam} S({g.basis[a]},{g.basis[b]})", partial(symmetric[a, b], alpha))
    for x in range(g.dim):
        invariance = ad_action(g, x, symmetric)
        for a, b in itertools.product(range(g.dim), repeat=2):
            report.record(f"ad {g.basis[x]}: ({g.basis[a]},{g.basis[b]})", invariance[a, b])
    return report


def killing_form(g: LieAlgebraData) -> List[List[Any]]:
    """K(a, b) = tr(ad e_a ad e_b)."""
    f = g.structure_constants
    m = g.dim
    return [[sum((f[a, c, d] * f[b, d, c] for c in range(m) for d in range(m)), QQ.zero)
             for b in range(m)] for a in range(m)]


def casimir_tensor(g: LieAlgebraData) -> DynamicalR:
    """Omega = sum K^{ab} e_a (x) e_b, the inverse Killing form as a constant r."""
    m = g.dim
    try:
        inverse = DomainMatrix(killing_form(g), (m, m), QQ).inv().to_Matrix()
    except DMNonInvertibleMatrixError as exc:
        raise NotInvertibleError(f"Killing form of {g.name} is degenerate") from exc
    domain = lambda_field(g)
    entries = np.empty((m, m), dtype=object)
    for a, b in itertools.product(range(m), repeat=2):
        entries[a, b] = domain(QQ.from_sympy(inverse[a, b]))
    return DynamicalR(g, entries, name="Omega")


def weight_rescale(r: DynamicalR, weights: Mapping[str, int], t: Any = 2) -> Tuple[DynamicalR, np.ndarray]:
    """Conjugate r by the automorphism e_a -> t^{w_a} e_a; returns the new r and the scale vector.

    The weights must define a grading of g that vanishes on the Cartan part.
    """
    g = r.algebra
    t = to_rational(t)
    scales = np.array([t ** int(weights.get(name, 0)) for name in g.basis], dtype=object)
    f = g.structure_constants
    for a, b, c in itertools.product(range(g.dim), repeat=3):
        if f[a, b, c] and scales[a] * scales[b] != scales[c]:
            raise PreconditionError(f"weights do not grade [{g.basis[a]}, {g.basis[b]}]", residual=(a, b, c))
    if any(scales[h] != QQ.one for h in g.cartan_indices):
        raise PreconditionError("weights must vanish on the Cartan subalgebra")
    domain = r.field
    factor = np.outer(scales, scales)
    entries = np.vectorize(lambda c: domain(c), otypes=[object])(factor) * r.entries
    return DynamicalR(g, entries, name=f"{r.name} rescaled"), scales


# =========================
# Calibration
# =========================


@dataclass
class CalibrationResult:
    outcomes: Dict[str, bool]
    passing: List[AltConvention]

    @property
    def unique(self) -> bool:
        return len(self.passing) == 1

    @property
    def convention(self) -> AltConvention:
        if not self.unique:
            raise PreconditionError(f"calibration is ambiguous: {[c.label for c in self.passing]}")
        return self.passing[0]


def calibrate_alt_convention(fixtures: Optional[Sequence[DynamicalR]] = None) -> CalibrationResult:
    """Try every sign and placement on known solutions; the passing set should be a singleton."""
    fixtures = list(fixtures) if fixtures else [rational_sl2_fixture(0), rational_sl2_fixture(1)]
    outcomes: Dict[str, bool] = {}
    passing = []
    for sign, placement in itertools.product((-1, 1), ALT_PLACEMENTS):
        candidate = AltConvention(sign, placement)
        ok = all(not any(cdybe_residual(r.algebra, r, candidate).flat) for r in fixtures)
        outcomes[candidate.label] = ok
        if ok:
            passing.append(candidate)
    logger.info("Alt calibration: %s", outcomes)
    return CalibrationResult(outcomes, passing)


# =========================
# Product algebroid and Lambda
# =========================


def product_algebroid(g: LieAlgebraData) -> LieAlgebroidData:
    """T h* x g over h*: frame (xi_alpha, e_a), anchor projecting onto T h*."""
    coordinates = lambda_coordinates(g)
    k, m = len(coordinates), g.dim
    frame = tuple(f"xi_{g.basis[h]}" for h in g.cartan_indices) + g.basis
    anchor = np.empty((k + m, k), dtype=object)
    anchor.fill(QQ.zero)
    for alpha in range(k):
        anchor[alpha, alpha] = QQ.one
    structure = np.empty((k + m,) * 3, dtype=object)
    structure.fill(QQ.zero)
    structure[k:, k:, k:] = g.structure_constants
    return LieAlgebroidData(f"T h* x {g.name}", coordinates, frame, anchor, structure, "ratfun")


@dataclass
class Example41Result:
    algebroid: LieAlgebroidData
    bivector: Multivector
    residual: Multivector
    bialgebroid: Optional[LieBialgebroidData] = None
    reports: Dict[str, ResidualReport] = field(default_factory=dict)

    @property
    def triangular(self) -> bool:
        return self.residual.is_zero()


def example41_lambda(g: LieAlgebraData, r: DynamicalR, convention: Optional[AltConvention] = None,
                     require_preconditions: bool = True, compatibility_degree: int = 0) -> Example41Result:
    """Lambda = sum xi_alpha ^ h_alpha + skew(r) and its Schouten square.

    With ``require_preconditions`` the CDYBE, equivariance and symmetric-part
    checks must pass first. When [Lambda, Lambda] = 0 the triangular
    differential is built and its compatibility checked on the frame.
    """
    reports = {
        "cdybe": check_cdybe(g, r, convention),
        "equivariance": check_equivariance(g, r),
        "symmetric-part": symmetric_part_check(r),
    }
    failed = [name for name, report in reports.items() if not report.passed]
    if failed and require_preconditions:
        worst = reports[failed[0]]
        raise PreconditionError(f"{r.name} fails {failed}: {worst.max_residual}", residual=worst.failures)
    A = product_algebroid(g)
    k = len(g.cartan_indices)
    size = A.rank
    matrix = [[A.domain.zero] * size for _ in range(size)]
    for alpha, h in enumerate(g.cartan_indices):
        matrix[alpha][k + h] = A.domain.one
        matrix[k + h][alpha] = -A.domain.one
    skew = r.skew()
    for a, b in itertools.product(range(g.dim), repeat=2):
        if a != b:
            matrix[k + a][k + b] = skew[a, b]
    Lam = bivector_from_matrix(A, matrix)
    residual = schouten(Lam, Lam)
    result = Example41Result(A, Lam, residual, reports=reports)
    square = ResidualReport("lambda-square")
    square.record("[Lambda, Lambda]", residual)
    result.reports["lambda-square"] = square
    if result.triangular:
        result.bialgebroid = triangular_differential(A, Lam)
        result.reports["compatibility"] = bialgebroid_compat_check(result.bialgebroid, compatibility_degree)
    logger.info("Lambda for %s: [Lambda, Lambda] %s", r.name, "= 0" if result.triangular else f"= {residual}")
    return result
