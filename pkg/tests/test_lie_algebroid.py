import numpy as np
import pytest
import sympy
from hypothesis import given, settings

from src.models.algebra_core import base_ring
from src.models.lie_algebroid import (
    LieAlgebroidData,
    LieBialgebroidData,
    Multivector,
    algebroid_axiom_check,
    base_poisson,
    bialgebroid_compat_check,
    bivector_from_matrix,
    common_real_zero,
    poisson_jacobi_residual,
    regularity_rank,
    schouten,
    tangent_algebroid,
    triangular_differential,
    wedge,
)
from src.utils.exceptions import PoissonJacobiError, PreconditionError, StructureError
from tests.conftest import polynomials

PLANE = ("x", "y")


@pytest.fixture
def phase():
    return tangent_algebroid(("x", "p"))


@pytest.fixture
def space():
    return tangent_algebroid(("x", "y", "z"))


class TestMultivectors:
    def test_wedge_is_graded(self, phase):
        e0, e1 = phase.section(0), phase.section(1)
        assert wedge(e0, e1) == -wedge(e1, e0)
        assert wedge(e0, e0).is_zero()

    def test_component_signs(self, phase):
        P = bivector_from_matrix(phase, [[0, 3], [-3, 0]])
        assert P.component(1, 0) == -P.component(0, 1)
        assert P.to_matrix()[0][1] == phase.domain(3)

    def test_non_antisymmetric_matrix(self, phase):
        with pytest.raises(PreconditionError):
            bivector_from_matrix(phase, [[0, 1], [1, 0]])

    def test_wrong_index_length(self, phase):
        with pytest.raises(StructureError):
            Multivector(phase, 2, {(0,): phase.domain.one})

    def test_anchor_shape_checked(self):
        with pytest.raises(StructureError):
            LieAlgebroidData("bad", ("x",), ("e",), np.empty((1, 2), dtype=object),
                             np.zeros((1, 1, 1), dtype=object))


class TestSchouten:
    def test_section_on_function_is_anchor(self, phase):
        x, _ = phase.domain.gens
        assert schouten(phase.section(0), phase.function(x * x)) == phase.function(2 * x)

    def test_lie_derivative_of_bivector(self, phase):
        x, _ = phase.domain.gens
        Lam = phase.basis((0, 1))
        X = phase.section(0, x)
        assert schouten(Lam, X) == Lam

    @settings(max_examples=25, deadline=None)
    @given(polynomials(PLANE, 2, 2), polynomials(PLANE, 2, 2), polynomials(PLANE, 2, 2))
    def test_graded_antisymmetry(self, a, b, c):
        A = tangent_algebroid(PLANE)
        P = A.basis((0, 1)) * a
        X = A.section(0, b) + A.section(1, c)
        assert schouten(P, X) == -schouten(X, P)
        assert schouten(X, X).is_zero()

    @settings(max_examples=15, deadline=None)
    @given(polynomials(PLANE, 2, 2), polynomials(PLANE, 1, 2), polynomials(PLANE, 1, 2))
    def test_jacobi_on_vector_fields(self, a, b, c):
        A = tangent_algebroid(PLANE)
        X, Y, Z = A.section(0, a), A.section(1, b), A.section(0, c) + A.section(1)
        cyclic = schouten(schouten(X, Y), Z) + schouten(schouten(Y, Z), X) + schouten(schouten(Z, X), Y)
        assert cyclic.is_zero()

    def test_tangent_algebroid_axioms(self):
        assert algebroid_axiom_check(tangent_algebroid(PLANE), degree=1).passed


class TestTriangular:
    def test_differential_on_coordinates(self, phase):
        Lam = phase.basis((0, 1))
        B = triangular_differential(phase, Lam)
        assert B.delta_functions[0] == phase.section(1)
        assert B.delta_functions[1] == -phase.section(0)

    def test_differential_on_sections(self, phase):
        x, _ = phase.domain.gens
        B = triangular_differential(phase, phase.basis((0, 1)))
        assert B.delta(phase.section(0, x)) == -phase.basis((0, 1))
        assert B.delta(phase.section(0)).is_zero()

    def test_compatibility_and_base_bracket(self, phase):
        B = triangular_differential(phase, phase.basis((0, 1)))
        assert bialgebroid_compat_check(B).passed
        one = phase.domain.one
        assert base_poisson(B) == [[phase.domain.zero, one], [-one, phase.domain.zero]]

    def test_non_poisson_bivector(self, space):
        y = space.domain.gens[1]
        matrix = [[0, 1, 0], [-1, 0, y], [0, -y, 0]]
        assert not poisson_jacobi_residual(matrix, space.coordinates).is_zero()
        with pytest.raises(PreconditionError):
            triangular_differential(space, bivector_from_matrix(space, matrix))

    def test_base_poisson_jacobi_failure(self, space):
        y = space.domain.gens[1]
        bad = LieBialgebroidData(space, [space.section(1), -space.section(0) + space.section(2, y),
                                         space.section(1, -y)],
                                 [space.zero(2)] * 3)
        with pytest.raises(PoissonJacobiError):
            base_poisson(bad)
        assert base_poisson(bad, check=False)[1][2] == y

    def test_zero_bialgebroid(self, phase):
        assert bialgebroid_compat_check(LieBialgebroidData.zero(phase)).passed


class TestRegularity:
    def test_constant_bivector_is_regular(self, space):
        Lam = bivector_from_matrix(space, [[0, 2, 0], [-2, 0, 0], [0, 0, 0]])
        report = regularity_rank(Lam)
        assert report.rank == 2
        assert report.regular

    def test_rank_drop_is_reported(self, space):
        x = space.domain.gens[0]
        Lam = bivector_from_matrix(space, [[0, x, 0], [-x, 0, 0], [0, 0, 0]])
        report = regularity_rank(Lam)
        assert report.rank == 2
        assert not report.regular
        assert report.drop_minors == ["x**2"]

    def test_minors_without_common_zero_are_regular(self, space):
        x = space.domain.gens[0]
        Lam = bivector_from_matrix(space, [[0, x, x - 1], [-x, 0, 0], [-(x - 1), 0, 0]])
        report = regularity_rank(Lam)
        assert report.rank == 2
        assert report.regular
        assert report.drop_minors == []

    def test_complex_only_zeros_are_regular(self, space):
        x = space.domain.gens[0]
        Lam = bivector_from_matrix(space, [[0, x**2 + 1, 0], [-(x**2 + 1), 0, 0], [0, 0, 0]])
        assert regularity_rank(Lam).regular

    def test_rational_real_zeros_drop_the_rank(self, space):
        x = space.domain.gens[0]
        Lam = bivector_from_matrix(space, [[0, x**2 - 1, 0], [-(x**2 - 1), 0, 0], [0, 0, 0]])
        report = regularity_rank(Lam)
        assert not report.regular
        assert report.note == ""

    def test_undecided_locus_is_not_regular(self, space):
        x, y, _ = space.domain.gens
        Lam = bivector_from_matrix(space, [[0, x - y, 0], [-(x - y), 0, 0], [0, 0, 0]])
        report = regularity_rank(Lam)
        assert not report.regular
        assert "not decided" in report.summary()

    def test_common_real_zero_cases(self):
        x, y = sympy.symbols("x y")
        assert common_real_zero([x**2, y], (x, y)) is True
        assert common_real_zero([x**2 + 1, y], (x, y)) is False
        assert common_real_zero([x, x - 1], (x, y)) is False
        assert common_real_zero([x**2 - 2], (x, y)) is None

    def test_zero_bivector(self, space):
        assert regularity_rank(space.zero(2)).rank == 0
