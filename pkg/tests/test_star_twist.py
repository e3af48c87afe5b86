import pytest
from hypothesis import given, settings
from sympy import QQ

from src.models.algebra_core import HbarSeries, base_ring, series_invert, series_mul
from src.models import star_twist
from src.models.diffop import (
    PolyDiffOp,
    leibniz_coproduct,
    multiplication_operator,
    partial_operator,
    slotwise_product,
    vector_field,
)
from src.models.hopf_classical import ProbeBounds
from src.models.star_twist import (
    StarAlgebra,
    alpha_h,
    assoc_residual,
    beta_h,
    broken_twist,
    canonical_lift,
    check_associativity,
    check_deformed_coassociativity,
    check_deformed_counit,
    check_eq11,
    check_poisson,
    check_twistor,
    check_unital,
    commuting_frame_twist,
    deformed_axiom_suite,
    deformed_instance,
    eq11_residual,
    explicit_twist,
    flip_stored,
    moyal_twist,
    poisson_from_twist,
    reapply_lift,
    star_apply,
    stored_coproduct,
    transported_coassociativity,
    twistor_residual,
)
from src.utils.exceptions import NotInvertibleError, PreconditionError, StructureError
from tests.conftest import polynomials

STANDARD = [[0, 1], [-1, 0]]
PHASE = ("x", "p")


@pytest.fixture(scope="module")
def moyal3():
    return moyal_twist(STANDARD, 3)


class TestMoyal:
    def test_commutator_is_hbar(self, moyal3):
        ring = moyal3.ring
        x, p = ring.gens
        S = StarAlgebra(moyal3)
        commutator = star_apply(S, x, p) - star_apply(S, p, x)
        assert commutator == HbarSeries((ring.zero, ring.one, ring.zero, ring.zero))

    def test_first_order_coefficient(self, moyal3):
        ring = moyal3.ring
        half = QQ(1, 2)
        expected = PolyDiffOp(ring, 2, {((1, 0), (0, 1)): ring(half), ((0, 1), (1, 0)): ring(-half)})
        assert moyal3.b1 == expected

    def test_alpha_and_beta_of_x(self, moyal3):
        ring = moyal3.ring
        x, _ = ring.gens
        S = StarAlgebra(moyal3)
        zero = PolyDiffOp.zero(ring)
        half_dp = partial_operator(ring, 1) * QQ(1, 2)
        assert alpha_h(S, x) == HbarSeries((multiplication_operator(x), half_dp, zero, zero))
        assert beta_h(S, x) == HbarSeries((multiplication_operator(x), -half_dp, zero, zero))

    def test_poisson_tensor_recovered(self, moyal3):
        ring = moyal3.ring
        assert poisson_from_twist(moyal3) == [[ring.zero, ring.one], [-ring.one, ring.zero]]
        assert check_poisson(moyal3).passed

    def test_cocycle_through_order_four(self):
        assert check_twistor(moyal_twist(STANDARD, 4)).passed

    def test_associativity(self, moyal3):
        assert check_associativity(StarAlgebra(moyal3), degree=2).passed

    @settings(max_examples=15, deadline=None)
    @given(polynomials(PHASE, 2, 2), polynomials(PHASE, 2, 2), polynomials(PHASE, 2, 2))
    def test_associativity_on_random_polynomials(self, f, g, h):
        S = StarAlgebra(moyal_twist(STANDARD, 2))
        left = star_apply(S, star_apply(S, f, g), h)
        right = star_apply(S, f, star_apply(S, g, h))
        assert left == right

    def test_eq11_vanishes(self, moyal3):
        S = StarAlgebra(moyal3)
        x, p = moyal3.ring.gens
        assert eq11_residual(S, x).is_zero()
        assert eq11_residual(S, x * p).is_zero()
        assert check_eq11(S, [x, p, x**2, x * p]).passed

    def test_inverse_round_trip(self, moyal3):
        product = series_mul(moyal3.inverse(), moyal3.series, slotwise_product)
        ring = moyal3.ring
        assert product == HbarSeries.constant(PolyDiffOp.identity(ring, 2), 3)

    def test_unital(self, moyal3):
        assert check_unital(moyal3).passed

    def test_rejects_non_antisymmetric_matrix(self):
        with pytest.raises(PreconditionError):
            moyal_twist([[0, 1], [1, 0]], 2)


class TestTwistConstruction:
    def test_coordinate_frame_matches_moyal(self, moyal3):
        ring = moyal3.ring
        frame = [partial_operator(ring, 0), partial_operator(ring, 1)]
        assert commuting_frame_twist(frame, STANDARD, 3).series == moyal3.series

    def test_noncommuting_frame_rejected(self):
        ring = base_ring(("x", "y"))
        x, y = ring.gens
        frame = [partial_operator(ring, 0), vector_field(ring, [0, x])]
        with pytest.raises(PreconditionError):
            commuting_frame_twist(frame, STANDARD, 2)

    def test_frame_must_be_vector_fields(self):
        ring = base_ring(("x", "y"))
        with pytest.raises(StructureError):
            commuting_frame_twist([PolyDiffOp.identity(ring), partial_operator(ring, 1)], STANDARD, 2)

    def test_nonconstant_frame_is_a_twist(self):
        ring = base_ring(("x", "y", "z"))
        z = ring.gens[2]
        frame = [partial_operator(ring, 0), vector_field(ring, [0, z, 0])]
        phi = commuting_frame_twist(frame, STANDARD, 3)
        assert check_twistor(phi).passed
        assert check_poisson(phi).passed

    def test_explicit_terms_outside_order(self):
        ring = base_ring(("x",))
        with pytest.raises(StructureError):
            explicit_twist(ring, [(3, 1, (1,), (1,))], 2)

    def test_unital_detects_derivative_of_one(self):
        ring = base_ring(("x",))
        twist = explicit_twist(ring, [(1, 1, (1,), (0,))], 1)
        assert not check_unital(twist).passed


class TestBrokenTwist:
    def test_fails_first_at_second_order(self):
        residual = twistor_residual(broken_twist(2))
        assert residual.leading_order() == 2

    def test_associativity_fails(self):
        S = StarAlgebra(broken_twist(2))
        assert not check_associativity(S, degree=3).passed
        x = S.ring.gens[0]
        residual = assoc_residual(S, x**2, x, x)
        assert residual[1] == S.ring.zero
        assert residual[2] == 2 * x**2


class TestDeformedInstance:
    @pytest.fixture(scope="class")
    def small(self):
        bounds = ProbeBounds(max_coefficient_degree=1, max_operator_order=1)
        return deformed_instance(moyal_twist(STANDARD, 2), bounds)

    def test_stored_coproduct_of_dx(self, small):
        S = small.star
        ring = small.ring
        dx = partial_operator(ring, 0)
        stored = stored_coproduct(S, dx)
        expected = slotwise_product(PolyDiffOp(ring, 2, {((1, 0), (0, 0)): ring.one, ((0, 0), (1, 0)): ring.one}),
                                    S.twist.b1)
        assert stored[1] == expected

    def test_lift_then_reapply_is_identity(self, small):
        S = small.star
        x, p = small.ring.gens
        h = PolyDiffOp(small.ring, 1, {((0, 1),): x})
        W = stored_coproduct(S, h)
        assert reapply_lift(S, canonical_lift(S, W)) == W

    def test_transported_flip_is_involution(self, small):
        S = small.star
        x, _ = small.ring.gens
        W = stored_coproduct(S, PolyDiffOp(small.ring, 1, {((1, 0),): x}))
        assert flip_stored(S, flip_stored(S, W)) == W

    def test_coassociativity_groupings_agree(self, small):
        x, p = small.ring.gens
        h = PolyDiffOp(small.ring, 1, {((1, 0),): p})
        assert transported_coassociativity(small, h, "inner").is_zero()
        assert transported_coassociativity(small, h, "outer").is_zero()
        with pytest.raises(ValueError):
            transported_coassociativity(small, h, "sideways")

    def test_coassociativity_holds_on_second_order_operators(self):
        bounds = ProbeBounds(max_coefficient_degree=0, max_operator_order=2)
        inst = deformed_instance(moyal_twist(STANDARD, 2), bounds)
        assert check_deformed_coassociativity(inst).passed

    def test_non_coassociative_coproduct_is_caught(self, monkeypatch):
        bounds = ProbeBounds(max_coefficient_degree=0, max_operator_order=2)
        inst = deformed_instance(moyal_twist(STANDARD, 2), bounds)

        def doubled_mixed_terms(op):
            terms = leibniz_coproduct(op).terms
            return PolyDiffOp(op.ring, 2, {k: (c * 2 if any(k[0]) and any(k[1]) else c) for k, c in terms.items()})

        monkeypatch.setattr(star_twist, "leibniz_coproduct", doubled_mixed_terms)
        report = check_deformed_coassociativity(inst)
        assert not report.passed
        ring = inst.ring
        dx2 = PolyDiffOp(ring, 1, {((2, 0),): ring.one})
        assert not transported_coassociativity(inst, dx2)[0].is_zero()

    def test_counit(self, small):
        assert check_deformed_counit(small).passed

    @pytest.mark.slow
    def test_full_suite_on_moyal(self, small):
        reports = deformed_axiom_suite(small)
        failed = {name: r.summary() for name, r in reports.items() if not r.passed}
        assert not failed

    def test_inverse_needs_unit(self):
        ring = base_ring(("x",))
        series = HbarSeries((PolyDiffOp.identity(ring, 2) * 2, PolyDiffOp.zero(ring, 2)))
        with pytest.raises(NotInvertibleError):
            series_invert(series, slotwise_product, PolyDiffOp.identity(ring, 2))
