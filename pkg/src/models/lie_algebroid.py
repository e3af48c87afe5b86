"""
Lie Algebroids, Schouten Calculus and Lie Bialgebroids

A Lie algebroid over a polynomial (or rational-function) base is given in a
frame e_1..e_r by its anchor rho(e_i) = sum_l anchor[i, l] d_l and structure
functions [e_i, e_j] = sum_k c^k_ij e_k. Multivector sections are sparse maps
from sorted frame-index tuples to coefficients.

Schouten convention:
- [X, f] = rho(X) f on degree-1 / degree-0 pairs
- [P, Q] = -(-1)^{(p-1)(q-1)} [Q, P]
- [P, Q ^ R] = [P, Q] ^ R + (-1)^{(p-1)q} Q ^ [P, R]
The triangular differential is d_Lambda = -[Lambda, .], which makes
rho(d f) g = Lambda(df, dg).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import QQ, Poly, groebner, real_roots
from sympy.polys.fields import FracElement
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from .algebra_core import base_ring, monomials_up_to, partial, rational_field, to_rational
from ..data.structures import ResidualReport
from ..utils.exceptions import PoissonJacobiError, PreconditionError, StructureError

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]


# =========================
# Algebroid data
# =========================


@dataclass
class LieAlgebroidData:
    """Anchor (rank x n) and structure functions (rank x rank x rank) over a base."""
    name: str
    coordinates: Tuple[str, ...]
    frame: Tuple[str, ...]
    anchor: np.ndarray
    structure: np.ndarray  # structure[i, j, k] = c^k_ij
    coefficient_field: str = "poly"

    def __post_init__(self):
        if self.coefficient_field not in ("poly", "ratfun"):
            raise StructureError(f"unknown coefficient field {self.coefficient_field!r}")
        r, n = len(self.frame), len(self.coordinates)
        if self.anchor.shape != (r, n):
            raise StructureError(f"anchor must have shape {(r, n)}, got {self.anchor.shape}")
        if self.structure.shape != (r, r, r):
            raise StructureError(f"structure functions must have shape {(r, r, r)}")
        coerce = np.vectorize(self.coerce, otypes=[object])
        self.anchor = coerce(self.anchor) if self.anchor.size else self.anchor
        self.structure = coerce(self.structure) if self.structure.size else self.structure

    @property
    def domain(self):
        if self.coefficient_field == "ratfun":
            return rational_field(self.coordinates)
        return base_ring(self.coordinates)

    @property
    def base_dim(self) -> int:
        return len(self.coordinates)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def coerce(self, value: Any):
        domain = self.domain
        if isinstance(value, (PolyElement, FracElement)):
            return domain(value) if getattr(value, "ring", getattr(value, "field", None)) != domain else value
        return domain(to_rational(value))

    def coordinate(self, l: int):
        return self.domain.gens[l]

    def anchor_action(self, i: int, f) -> Any:
        """rho(e_i) f."""
        total = self.domain.zero
        for l in range(self.base_dim):
            a = self.anchor[i, l]
            if a:
                total += a * partial(f, l)
        return total

    # --- multivector constructors ---

    def zero(self, degree: int) -> "Multivector":
        return Multivector(self, degree)

    def function(self, f: Any) -> "Multivector":
        return Multivector(self, 0, {(): self.coerce(f)})

    def section(self, i: int, coeff: Any = 1) -> "Multivector":
        return Multivector(self, 1, {(i,): self.coerce(coeff)})

    def basis(self, indices: Index) -> "Multivector":
        return Multivector(self, len(indices), {tuple(indices): self.domain.one})

    def frame_bracket(self, i: int, j: int) -> "Multivector":
        return Multivector(self, 1, {(k,): self.structure[i, j, k] for k in range(self.rank)})


def tangent_algebroid(coordinates: Union[int, Sequence[str]], coefficient_field: str = "poly") -> LieAlgebroidData:
    """TP in the coordinate frame: identity anchor, zero structure functions."""
    if isinstance(coordinates, int):
        if coordinates < 1:
            raise StructureError("dimension must be at least 1")
        coordinates = tuple(f"x{k + 1}" for k in range(coordinates))
    coordinates = tuple(coordinates)
    n = len(coordinates)
    anchor = np.empty((n, n), dtype=object)
    for i in range(n):
        for l in range(n):
            anchor[i, l] = QQ.one if i == l else QQ.zero
    structure = np.empty((n, n, n), dtype=object)
    structure.fill(QQ.zero)
    return LieAlgebroidData(f"T R^{n}", coordinates, tuple(f"d{c}" for c in coordinates),
                            anchor, structure, coefficient_field)


# =========================
# Multivectors
# =========================


def _sort_sign(indices: Sequence[int]) -> Tuple[int, Index]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    if len(set(indices)) != len(indices):
        return 0, ()
    inversions = sum(1 for a, b in itertools.combinations(indices, 2) if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


class Multivector:
    """Section of the p-th exterior power of A."""

    __slots__ = ("algebroid", "degree", "terms")

    def __init__(self, algebroid: LieAlgebroidData, degree: int, terms: Optional[Dict[Index, Any]] = None):
        self.algebroid = algebroid
        self.degree = degree
        clean: Dict[Index, Any] = {}
        for key, coeff in (terms or {}).items():
            if len(key) != degree:
                raise StructureError(f"index tuple {key} in a degree-{degree} multivector")
            sign, ordered = _sort_sign(key)
            if not sign or not coeff:
                continue
            value = coeff if sign > 0 else -coeff
            total = clean[ordered] + value if ordered in clean else value
            if total:
                clean[ordered] = total
            else:
                clean.pop(ordered, None)
        self.terms = clean

    def _check(self, other: "Multivector"):
        if not isinstance(other, Multivector):
            raise StructureError(f"expected a Multivector, got {type(other).__name__}")
        if other.algebroid is not self.algebroid and other.algebroid.domain != self.algebroid.domain:
            raise StructureError("multivectors over different algebroids")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise StructureError(f"adding degrees {self.degree} and {other.degree}")
        merged = dict(self.terms)
        for key, c in other.terms.items():
            merged[key] = merged[key] + c if key in merged else c
        return Multivector(self.algebroid, self.degree, merged)

    def __neg__(self) -> "Multivector":
        return Multivector(self.algebroid, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def __mul__(self, factor: Any) -> "Multivector":
        """Multiply every coefficient by a function or scalar."""
        factor = self.algebroid.coerce(factor)
        return Multivector(self.algebroid, self.degree, {k: c * factor for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def size(self) -> int:
        return len(self.terms)

    def component(self, *indices: int) -> Any:
        sign, ordered = _sort_sign(indices)
        value = self.terms.get(ordered, self.algebroid.domain.zero) if sign else self.algebroid.domain.zero
        return value if sign >= 0 else -value

    def to_matrix(self) -> List[List[Any]]:
        """Antisymmetric coefficient matrix of a bivector."""
        if self.degree != 2:
            raise StructureError("to_matrix needs a bivector")
        r = self.algebroid.rank
        return [[self.component(i, j) if i != j else self.algebroid.domain.zero for j in range(r)]
                for i in range(r)]

    def __repr__(self) -> str:
        return f"Multivector(degree={self.degree}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.algebroid.frame
        parts = []
        for key in sorted(self.terms):
            coeff = self.terms[key]
            wedge_text = "∧".join(names[i] for i in key) if key else "1"
            text = str(coeff)
            if " " in text:
                text = f"({text})"
            parts.append(f"{text}*{wedge_text}")
        return " + ".join(parts)


def wedge(P: Multivector, Q: Multivector) -> Multivector:
    P._check(Q)
    out: Dict[Index, Any] = {}
    for I, a in P.terms.items():
        for J, b in Q.terms.items():
            sign, ordered = _sort_sign(I + J)
            if not sign:
                continue
            value = a * b if sign > 0 else -(a * b)
            out[ordered] = out[ordered] + value if ordered in out else value
    return Multivector(P.algebroid, P.degree + Q.degree, out)


def bivector_from_matrix(A: LieAlgebroidData, matrix: Sequence[Sequence[Any]]) -> Multivector:
    """P^{ij} e_i ^ e_j summed over i < j; the matrix must be antisymmetric."""
    r = A.rank
    if len(matrix) != r or any(len(row) != r for row in matrix):
        raise StructureError(f"bivector matrix must be {r}x{r}")
    entries = [[A.coerce(v) for v in row] for row in matrix]
    bad = [(i, j) for i in range(r) for j in range(r) if entries[i][j] + entries[j][i]]
    if bad:
        raise PreconditionError(f"bivector matrix is not antisymmetric at {bad[:3]}", residual=bad)
    return Multivector(A, 2, {(i, j): entries[i][j] for i in range(r) for j in range(i + 1, r)})


# =========================
# Schouten bracket
# =========================


def _atom_bracket(A: LieAlgebroidData, atom: Tuple[str, Any], P: Multivector) -> Multivector:
    """[a, P] for an atom a = ("function", h) or ("section", k)."""
    kind, value = atom
    atom_degree = 0 if kind == "function" else 1
    out = A.zero(P.degree + atom_degree - 1)
    for J, g in P.terms.items():
        if kind == "section":
            out = out + Multivector(A, len(J), {J: A.anchor_action(value, g)})
        for m, j in enumerate(J):
            prefix, suffix = A.basis(J[:m]), A.basis(J[m + 1:])
            if kind == "function":
                middle = A.function(-A.anchor_action(j, value))
                sign = -1 if m % 2 else 1
            else:
                middle = A.frame_bracket(value, j)
                sign = 1
            piece = wedge(wedge(prefix, middle), suffix) * g
            out = out + (piece if sign > 0 else -piece)
    return out


def _bracket_function(P: Multivector, f) -> Multivector:
    """[P, f] = -(-1)^{p-1} [f, P]."""
    value = _atom_bracket(P.algebroid, ("function", f), P)
    return -value if (P.degree - 1) % 2 == 0 else value


def _bracket_section(P: Multivector, i: int) -> Multivector:
    """[P, e_i] = -[e_i, P]."""
    return -_atom_bracket(P.algebroid, ("section", i), P)


def schouten(P: Multivector, Q: Multivector) -> Multivector:
    """Schouten bracket, degree p + q - 1."""
    P._check(Q)
    A = P.algebroid
    if P.degree + Q.degree == 0:
        return A.zero(0)
    out = A.zero(P.degree + Q.degree - 1)
    section_cache: Dict[int, Multivector] = {}
    for I, f in Q.terms.items():
        out = out + wedge(_bracket_function(P, f), A.basis(I))
        for m, i in enumerate(I):
            if i not in section_cache:
                section_cache[i] = _bracket_section(P, i)
            piece = wedge(wedge(A.basis(I[:m]), section_cache[i]), A.basis(I[m + 1:])) * f
            out = out + (-piece if ((P.degree - 1) * m) % 2 else piece)
    return out


def algebroid_axiom_check(A: LieAlgebroidData, degree: int = 1) -> ResidualReport:
    """Antisymmetry, Leibniz, Jacobi and anchor morphism on frame probes."""
    report = ResidualReport("algebroid-axioms")
    coefficient_probes = [A.coerce(m) for m in monomials_up_to(base_ring(A.coordinates), degree)]
    r = A.rank
    for i, j in itertools.product(range(r), repeat=2):
        report.record(f"antisymmetry ({i},{j})", A.frame_bracket(i, j) + A.frame_bracket(j, i))
    for i, j in itertools.product(range(r), repeat=2):
        for f in coefficient_probes:
            lhs = schouten(A.section(i), A.section(j, f))
            rhs = A.frame_bracket(i, j) * f + A.section(j, A.anchor_action(i, f))
            report.record(f"leibniz ({i},{j}) f={f}", lhs - rhs)
    for i, j, k in itertools.combinations_with_replacement(range(r), 3):
        for f in coefficient_probes:
            X, Y, Z = A.section(i, f), A.section(j), A.section(k)
            cyclic = (schouten(schouten(X, Y), Z) + schouten(schouten(Y, Z), X)
                      + schouten(schouten(Z, X), Y))
            report.record(f"jacobi ({i},{j},{k}) f={f}", cyclic)
    for i, j in itertools.combinations(range(r), 2):
        bracket = A.frame_bracket(i, j)
        for l in range(A.base_dim):
            x = A.coordinate(l)
            lhs = A.domain.zero
            for (k,), c in bracket.terms.items():
                lhs += c * A.anchor_action(k, x)
            rhs = A.anchor_action(i, A.anchor_action(j, x)) - A.anchor_action(j, A.anchor_action(i, x))
            report.record(f"anchor ({i},{j}) x{l}", lhs - rhs)
    return report


# =========================
# Lie bialgebroids
# =========================


@dataclass
class LieBialgebroidData:
    """A together with d on generators: d x_l (degree 1) and d e_i (degree 2)."""
    algebroid: LieAlgebroidData
    delta_functions: List[Multivector]
    delta_frame: List[Multivector]
    bivector: Optional[Multivector] = None
    name: str = "bialgebroid"

    def __post_init__(self):
        A = self.algebroid
        if len(self.delta_functions) != A.base_dim or len(self.delta_frame) != A.rank:
            raise StructureError("one differential entry per coordinate and per frame element is required")
        for value in self.delta_functions:
            if not value.is_zero() and value.degree != 1:
                raise StructureError("d of a function must be a section")
        for value in self.delta_frame:
            if not value.is_zero() and value.degree != 2:
                raise StructureError("d of a section must be a bivector")

    @classmethod
    def zero(cls, A: LieAlgebroidData) -> "LieBialgebroidData":
        return cls(A, [A.zero(1) for _ in range(A.base_dim)], [A.zero(2) for _ in range(A.rank)], name="zero")

    def delta_function(self, f) -> Multivector:
        """d f = sum_l (d_l f) d x_l."""
        A = self.algebroid
        f = A.coerce(f)
        out = A.zero(1)
        for l, dx in enumerate(self.delta_functions):
            df = partial(f, l)
            if df:
                out = out + dx * df
        return out

    def delta(self, P: Multivector) -> Multivector:
        """Degree-1 derivation: d(f e_I) = d f ^ e_I + f sum_m (-1)^{m} e_<m ^ d e_m ^ e_>m."""
        A = self.algebroid
        out = A.zero(P.degree + 1)
        for I, f in P.terms.items():
            out = out + wedge(self.delta_function(f), A.basis(I))
            for m, i in enumerate(I):
                piece = wedge(wedge(A.basis(I[:m]), self.delta_frame[i]), A.basis(I[m + 1:])) * f
                out = out + (-piece if m % 2 else piece)
        return out


def triangular_differential(A: LieAlgebroidData, Lam: Multivector) -> LieBialgebroidData:
    """d = -[Lambda, .] for [Lambda, Lambda] = 0."""
    if Lam.degree != 2 and not Lam.is_zero():
        raise StructureError("Lambda must be a bivector")
    residual = schouten(Lam, Lam)
    if not residual.is_zero():
        raise PreconditionError(f"[Lambda, Lambda] = {residual}", residual=residual)
    delta_functions = [-schouten(Lam, A.function(A.coordinate(l))) for l in range(A.base_dim)]
    delta_frame = [-schouten(Lam, A.section(i)) for i in range(A.rank)]
    logger.info("triangular differential on %s from Lambda = %s", A.name, Lam)
    return LieBialgebroidData(A, delta_functions, delta_frame, bivector=Lam, name="triangular")


def bialgebroid_compat_check(B: LieBialgebroidData, degree: int = 1) -> ResidualReport:
    """d[X, Y] = [dX, Y] + [X, dY] on frame and (section, function) pairs, plus d^2 = 0."""
    report = ResidualReport("compatibility")
    A = B.algebroid
    coefficient_probes = [A.coerce(m) for m in monomials_up_to(base_ring(A.coordinates), degree)]
    sections = [A.section(i, f) for i in range(A.rank) for f in coefficient_probes]
    for X, Y in itertools.product(sections, [A.section(j) for j in range(A.rank)]):
        lhs = B.delta(schouten(X, Y))
        rhs = schouten(B.delta(X), Y) + schouten(X, B.delta(Y))
        report.record(f"[{X}, {Y}]", lhs - rhs)
    for i in range(A.rank):
        X = A.section(i)
        for f in coefficient_probes:
            F = A.function(f)
            lhs = B.delta(schouten(X, F))
            rhs = schouten(B.delta(X), F) + schouten(X, B.delta(F))
            report.record(f"[{X}, {f}]", lhs - rhs)
    for l, dx in enumerate(B.delta_functions):
        report.record(f"d^2 x{l}", B.delta(dx))
    for i, de in enumerate(B.delta_frame):
        report.record(f"d^2 e{i}", B.delta(de))
    return report


def base_poisson(B: LieBialgebroidData, check: bool = True) -> List[List[Any]]:
    """pi^{ij} = rho(d x_i) x_j; Jacobi is verified unless ``check`` is off."""
    A = B.algebroid
    n = A.base_dim
    pi = []
    for i in range(n):
        row = []
        for j in range(n):
            value = A.domain.zero
            for (k,), c in B.delta_functions[i].terms.items():
                value += c * A.anchor[k, j]
            row.append(value)
        pi.append(row)
    if check:
        residual = poisson_jacobi_residual(pi, A.coordinates, A.coefficient_field)
        if not residual.is_zero():
            raise PoissonJacobiError(f"base bracket fails Jacobi: {residual}", residual=residual)
    return pi


def poisson_jacobi_residual(pi: Sequence[Sequence[Any]], coordinates: Sequence[str],
                            coefficient_field: str = "poly") -> Multivector:
    """[pi, pi] on the tangent algebroid; zero iff the bracket satisfies Jacobi."""
    T = tangent_algebroid(tuple(coordinates), coefficient_field)
    P = bivector_from_matrix(T, pi)
    return schouten(P, P)


# =========================
# Regularity
# =========================


@dataclass
class RankReport:
    rank: int
    regular: bool
    drop_minors: List[str] = field(default_factory=list)
    note: str = ""

    def summary(self) -> str:
        verdict = "regular" if self.regular else "not regular"
        text = f"rank {self.rank}, {verdict}"
        if self.drop_minors:
            text += f"; rank drops where all of {self.drop_minors[:3]} vanish"
        if self.note:
            text += f" ({self.note})"
        return text


def common_real_zero(polys: Sequence[Any], gens: Sequence[Any]) -> Optional[bool]:
    """Whether the polynomials vanish together at some real point; None when undecided.

    A lex Groebner basis of [1] rules out complex zeros. Otherwise a basis element
    in a single variable is solved for its real roots and each rational root is
    substituted back; an irrational root or a basis with no univariate element
    leaves the question open.
    """
    polys = [p for p in polys if p != 0]
    if not polys:
        return True
    if not gens:
        return False
    basis = groebner(polys, *gens, order="lex")
    if list(basis.exprs) == [sympy.S.One]:
        return False
    for v in reversed(gens):
        univariate = [g for g in basis.exprs if g.free_symbols <= {v}]
        if not univariate:
            continue
        roots = set(real_roots(Poly(sympy.gcd_list(univariate), v)))
        if not roots:
            return False
        rest = [g for g in gens if g != v]
        undecided = False
        for root in roots:
            if not root.is_Rational:
                undecided = True
                continue
            found = common_real_zero([g.subs(v, root) for g in basis.exprs], rest)
            if found:
                return True
            undecided = undecided or found is None
        return None if undecided else False
    return None


def regularity_rank(Lam: Multivector) -> RankReport:
    """Generic rank over the fraction field and a constant-rank verdict.

    The rank drops exactly where every maximal minor vanishes, so Lambda is
    regular iff the minor numerators have no common real zero.
    """
    A = Lam.algebroid
    r = A.rank
    fraction_field = rational_field(A.coordinates)
    rows = [[fraction_field(v) for v in row] for row in Lam.to_matrix()]
    if Lam.is_zero() or r == 0:
        return RankReport(0, True)
    matrix = DomainMatrix(rows, (r, r), fraction_field.to_domain())
    rank = matrix.rank()
    minors = []
    for rows_pick in itertools.combinations(range(r), rank):
        for cols_pick in itertools.combinations(range(r), rank):
            minor = matrix.extract(list(rows_pick), list(cols_pick)).det()
            if not minor:
                continue
            if minor.numer.is_ground:
                logger.debug("constant minor %s on rows %s cols %s", minor, rows_pick, cols_pick)
                return RankReport(rank, True)
            minors.append(minor)
    numerators = sorted({str(m.numer.as_expr()): m.numer.as_expr() for m in minors}.items())
    found = common_real_zero([expr for _, expr in numerators], fraction_field.symbols)
    if found is False:
        return RankReport(rank, True)
    drop = sorted(set(str(m) for m in minors))
    if found is None:
        logger.warning("could not decide whether the minors %s share a real zero", drop[:3])
        return RankReport(rank, False, drop, note="real drop locus not decided")
    return RankReport(rank, False, drop)
