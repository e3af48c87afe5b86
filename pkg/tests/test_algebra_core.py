from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from sympy import QQ

from src.models.algebra_core import (
    HbarSeries,
    base_ring,
    derivative,
    is_constant,
    make_ratfun,
    monomials_up_to,
    parse_coefficient,
    partial,
    poly_mul,
    poly_partial,
    rational_field,
    ratfun_arith,
    ratfun_equal,
    ratfun_partial,
    series_invert,
    series_mul,
    to_rational,
    total_degree,
)
from src.models.diffop import partial_operator
from src.utils.exceptions import NotInvertibleError, StructureError, ZeroDenominatorError
from tests.conftest import polynomials


class TestRationals:
    def test_accepted_inputs(self):
        assert to_rational(3) == QQ(3)
        assert to_rational("-3/4") == QQ(-3, 4)
        assert to_rational(Fraction(2, 6)) == QQ(1, 3)
        assert to_rational(sympy.Rational(5, 7)) == QQ(5, 7)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            to_rational(0.5)
        with pytest.raises(TypeError):
            to_rational(sympy.sqrt(2))


class TestPolynomials:
    def test_monomials_up_to_counts(self, plane):
        assert len(monomials_up_to(plane, 2)) == 6
        assert monomials_up_to(plane, 0) == [plane.one]

    def test_rings_are_shared(self):
        assert base_ring(("x", "y")) is base_ring(("x", "y"))

    def test_mixing_rings_is_structural_error(self, plane):
        other = base_ring(("x", "z"))
        with pytest.raises(StructureError):
            poly_mul(plane.gens[0], other.gens[0])

    def test_derivative_multi_index(self, plane):
        x, y = plane.gens
        assert derivative(x**3 * y**2, (2, 1)) == 12 * x * y
        assert total_degree(x**3 * y**2 + y) == 5
        assert total_degree(plane.zero) == -1

    def test_poly_partial_bounds(self, plane):
        x, y = plane.gens
        assert poly_partial(x**2 * y, 1) == x**2
        with pytest.raises(StructureError):
            poly_partial(x, 2)

    @given(polynomials(), polynomials())
    def test_partial_is_a_derivation(self, f, g):
        assert partial(f * g, 0) == partial(f, 0) * g + f * partial(g, 0)


class TestRationalFunctions:
    def test_arith_and_equality(self):
        field = rational_field(("lam",))
        lam = field.gens[0]
        a = make_ratfun(field, lam.numer, (lam - 1).numer)
        assert ratfun_equal(ratfun_arith(a, a, "sub"), field.zero)
        assert ratfun_equal(ratfun_arith(a, field(2), "mul"), 2 * lam / (lam - 1))
        assert ratfun_partial(1 / (lam - 1), 0) == -1 / (lam - 1) ** 2
        assert ratfun_equal(ratfun_partial(lam**2 / (lam + 1), 0), (lam**2 + 2 * lam) / (lam + 1) ** 2)

    def test_zero_denominator(self):
        field = rational_field(("lam",))
        with pytest.raises(ZeroDenominatorError):
            ratfun_arith(field.one, field.zero, "div")
        with pytest.raises(ZeroDenominatorError):
            make_ratfun(field, field.ring.one, field.ring.zero)

    def test_is_constant(self):
        field = rational_field(("lam",))
        assert is_constant(field(3))
        assert not is_constant(1 / field.gens[0])


class TestParseCoefficient:
    def test_rational_function_string(self):
        field = rational_field(("lam_h",))
        lam = field.gens[0]
        assert parse_coefficient(field, "-1/(lam_h - 1)") == -1 / (lam - 1)

    def test_polynomial_string_and_scalars(self, plane):
        x, y = plane.gens
        assert parse_coefficient(plane, "x*y - 1/2") == x * y - QQ(1, 2)
        assert parse_coefficient(plane, 3) == plane(3)
        assert parse_coefficient(plane, x) == x

    def test_unknown_variable(self, plane):
        with pytest.raises(StructureError):
            parse_coefficient(plane, "x + z")

    def test_garbage(self, plane):
        with pytest.raises(StructureError):
            parse_coefficient(plane, "x +* (")

    def test_float_rejected(self, plane):
        with pytest.raises(TypeError):
            parse_coefficient(plane, "0.5*x")

    def test_zero_denominator(self):
        field = rational_field(("lam",))
        with pytest.raises(ZeroDenominatorError):
            parse_coefficient(field, "1/0")


class TestHbarSeries:
    def test_coefficient_beyond_order(self):
        s = HbarSeries((QQ(1), QQ(2)))
        assert s[1] == QQ(2)
        with pytest.raises(IndexError):
            s.coefficient(2)

    def test_shift_and_leading_order(self):
        s = HbarSeries((QQ(1), QQ(2), QQ(0)))
        shifted = s.shift()
        assert shifted.coefficients == (QQ(0), QQ(1), QQ(2))
        assert shifted.leading_order() == 1
        assert HbarSeries.constant(QQ(0), 3).leading_order() == -1

    def test_mixed_orders_truncate_to_minimum(self):
        a = HbarSeries((QQ(1), QQ(1), QQ(1)))
        b = HbarSeries((QQ(1), QQ(1)))
        assert (a + b).order == 1
        assert series_mul(a, b, lambda u, v: u * v).order == 1

    def test_invert_geometric_series(self):
        a = HbarSeries((QQ(1), QQ(-1), QQ(0), QQ(0)))
        inverse = series_invert(a, lambda u, v: u * v, QQ(1))
        assert inverse.coefficients == (QQ(1),) * 4

    @settings(max_examples=25)
    @given(polynomials(max_terms=2), polynomials(max_terms=2))
    def test_invert_round_trip(self, a1, a2):
        ring = a1.ring
        a = HbarSeries((ring.one, a1, a2, ring.zero))
        inverse = series_invert(a, lambda u, v: u * v, ring.one)
        assert series_mul(a, inverse, lambda u, v: u * v) == HbarSeries.constant(ring.one, 3)

    def test_hash_follows_coefficients(self):
        ring = base_ring(("x",))
        x = ring.gens[0]
        same = {HbarSeries((ring.one, x)), HbarSeries((ring.one, x)), HbarSeries((ring.one, 2 * x - x))}
        assert len(same) == 1
        distinct = {HbarSeries((ring.one, x * k)) for k in range(1, 6)}
        assert len(distinct) == 5
        assert len({hash(s) for s in distinct}) == 5

    def test_hash_of_operator_series(self):
        ring = base_ring(("x",))
        dx = partial_operator(ring, 0)
        first = HbarSeries((dx, dx * 2))
        second = HbarSeries((dx, dx + dx))
        assert first == second
        assert hash(first) == hash(second)
        assert hash(first) != hash(HbarSeries((dx, dx)))

    def test_invert_requires_unit(self):
        with pytest.raises(NotInvertibleError):
            series_invert(HbarSeries((QQ(2), QQ(1))), lambda u, v: u * v, QQ(1))
