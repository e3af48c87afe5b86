import pytest

from src.models.algebra_core import base_ring
from src.models.classical_limit import (
    assemble_bialgebroid,
    bivector_to_operator,
    classical_limit_report,
    coproduct_correction,
    delta_f,
    delta_X,
    hbar1_bracket,
    operator_to_bivector,
    operator_to_section,
    poisson_bracket,
    quantize_flat_triangular,
    round_trip_report,
)
from src.models.diffop import PolyDiffOp, leibniz_coproduct, partial_operator, slotwise_product, vector_field
from src.models.hopf_classical import ProbeBounds
from src.models.lie_algebroid import bivector_from_matrix, tangent_algebroid, triangular_differential, wedge
from src.models.star_twist import commuting_frame_twist, deformed_instance, moyal_twist
from src.utils.exceptions import ClassicalLimitError, PreconditionError

STANDARD = [[0, 1], [-1, 0]]
SMALL = ProbeBounds(max_coefficient_degree=1, max_operator_order=1)


@pytest.fixture(scope="module")
def moyal():
    return deformed_instance(moyal_twist(STANDARD, 2), SMALL)


@pytest.fixture(scope="module")
def phase():
    return tangent_algebroid(("x", "p"))


class TestFirstOrderData:
    def test_bracket_of_coordinates(self, moyal):
        x, p = moyal.ring.gens
        assert poisson_bracket(moyal, x, p) == moyal.ring.one
        assert hbar1_bracket(moyal)[1][0] == -moyal.ring.one

    def test_delta_of_x(self, moyal, phase):
        x, p = moyal.ring.gens
        assert delta_f(moyal, x, phase) == phase.section(1)
        assert delta_f(moyal, p, phase) == -phase.section(0)

    def test_delta_of_vector_fields(self, moyal, phase):
        x, _ = moyal.ring.gens
        dx = partial_operator(moyal.ring, 0)
        assert delta_X(moyal, dx, A=phase).is_zero()
        assert delta_X(moyal, dx * x, A=phase) == -phase.basis((0, 1))

    def test_stored_primitive_commutes_with_constant_twist(self, moyal):
        dx = partial_operator(moyal.ring, 0)
        assert coproduct_correction(moyal, dx, "stored").is_zero()

    def test_plain_sum_keeps_the_bare_product(self, moyal):
        dx = partial_operator(moyal.ring, 0)
        expected = slotwise_product(leibniz_coproduct(dx), moyal.star.twist.b1)
        assert not expected.is_zero()
        assert coproduct_correction(moyal, dx, "plain-sum") == expected

    def test_unknown_convention(self, moyal):
        with pytest.raises(ValueError):
            coproduct_correction(moyal, partial_operator(moyal.ring, 0), "sideways")

    def test_leibniz_rule_for_sections(self, moyal, phase):
        x, p = moyal.ring.gens
        dx = partial_operator(moyal.ring, 0)
        lhs = delta_X(moyal, dx * x, A=phase)
        rhs = delta_X(moyal, dx, A=phase) * x + wedge(delta_f(moyal, x, phase), phase.section(0))
        assert lhs == rhs

    def test_order_zero_has_no_limit(self):
        inst = deformed_instance(moyal_twist(STANDARD, 0), SMALL)
        with pytest.raises(ClassicalLimitError):
            hbar1_bracket(inst)


class TestTranslation:
    def test_second_order_operator_is_not_a_section(self, phase):
        ring = phase.domain
        with pytest.raises(ClassicalLimitError):
            operator_to_section(phase, partial_operator(ring, (2, 0)))

    def test_symmetric_operator_is_not_a_bivector(self, phase):
        ring = phase.domain
        sym = PolyDiffOp(ring, 2, {((1, 0), (0, 1)): ring.one, ((0, 1), (1, 0)): ring.one})
        with pytest.raises(ClassicalLimitError):
            operator_to_bivector(phase, sym)

    def test_unmirrored_term_is_not_a_bivector(self, phase):
        ring = phase.domain
        with pytest.raises(ClassicalLimitError):
            operator_to_bivector(phase, PolyDiffOp(ring, 2, {((1, 0), (0, 1)): ring.one}))

    def test_bivector_round_trip(self, phase):
        x, _ = phase.domain.gens
        P = bivector_from_matrix(phase, [[0, x], [-x, 0]])
        assert operator_to_bivector(phase, bivector_to_operator(P)) == P


class TestLimitReport:
    def test_moyal_limit_is_the_triangular_bialgebroid(self, moyal, phase):
        report = classical_limit_report(moyal)
        assert report.passed, report.summary()
        expected = triangular_differential(phase, phase.basis((0, 1)))
        B = report.bialgebroid
        assert B.delta_functions == expected.delta_functions
        assert B.delta_frame == expected.delta_frame

    def test_plain_sum_report_fails_types(self, moyal):
        report = classical_limit_report(moyal, "plain-sum")
        assert not report.passed
        assert report.bialgebroid is None
        assert not report.reports["types"].passed
        assert report.reports["poisson-bracket"].passed

    @pytest.mark.slow
    def test_nonconstant_commuting_frame(self):
        ring = base_ring(("x", "y", "z"))
        z = ring.gens[2]
        frame = [partial_operator(ring, 0), vector_field(ring, [0, z, 0])]
        inst = deformed_instance(commuting_frame_twist(frame, STANDARD, 2), SMALL)
        report = classical_limit_report(inst)
        assert report.passed, report.summary()
        B = assemble_bialgebroid(inst)
        A = B.algebroid
        assert B.delta_functions[0] == A.section(1, z)


class TestFlatTriangular:
    def test_requires_constant_coefficients(self):
        A = tangent_algebroid(("x", "y"))
        x, _ = A.domain.gens
        with pytest.raises(PreconditionError):
            quantize_flat_triangular(A, bivector_from_matrix(A, [[0, x], [-x, 0]]), 2)

    def test_quantization_matches_moyal(self, phase):
        twist = quantize_flat_triangular(phase, phase.basis((0, 1)), 3)
        assert twist.series == moyal_twist(STANDARD, 3).series

    @pytest.mark.slow
    def test_round_trip_in_three_dimensions(self):
        A = tangent_algebroid(("x", "y", "z"))
        Lam = bivector_from_matrix(A, [[0, 2, 0], [-2, 0, 0], [0, 0, 0]])
        result = round_trip_report(A, Lam, 2, SMALL)
        assert result.rank.regular
        assert result.passed, {k: r.summary() for k, r in result.reports.items() if not r.passed}
