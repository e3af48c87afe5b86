import pytest
from hypothesis import given, settings, strategies as st
from sympy import QQ

from src.data.structures import LieAlgebraData, StandardAlgebras
from src.models.hopf_classical import (
    PBWElement,
    ProbeBounds,
    UniversalEnvelopingAlgebra,
    check_coassociativity,
    check_compatibility,
    check_counit,
    corrupted_dp_instance,
    definition_suite,
    dp_instance,
    pbw_monomials,
    ug_instance,
)
from src.utils.exceptions import InvalidStructureError, StructureError

SMALL = ProbeBounds(max_coefficient_degree=1, max_operator_order=2, pbw_degree=2)


class TestDifferentialOperators:
    def test_plane_passes_every_axiom(self):
        reports = definition_suite(dp_instance(("x", "y"), SMALL))
        failed = {name: r.summary() for name, r in reports.items() if not r.passed}
        assert not failed

    def test_probe_count(self):
        inst = dp_instance(("x", "y"), ProbeBounds(max_coefficient_degree=2, max_operator_order=2))
        assert len(inst.probes) == 36
        assert len(inst.probe_pairs()) == 36 * 36

    def test_dimension_shorthand(self):
        assert dp_instance(1, SMALL).name == "D(R^1)"
        with pytest.raises(StructureError):
            dp_instance(0, SMALL)

    def test_compatibility_on_chosen_pairs(self):
        inst = dp_instance(("x",), SMALL)
        h1, h2 = inst.probes[1], inst.probes[-1]
        report = check_compatibility(inst, pairs=[(h1, h2), (h2, h1)])
        assert report.passed
        assert len(report.entries) == len(inst.probes) * len(inst.base_probes) + 2

    def test_pair_budget_falls_back_to_generators(self):
        bounds = ProbeBounds(max_coefficient_degree=1, max_operator_order=1, max_exhaustive_pairs=10)
        inst = dp_instance(("x",), bounds)
        pairs = inst.probe_pairs()
        assert len(pairs) == 2 * len(inst.probes) * len(inst.generators)

    def test_corrupted_coproduct_breaks_counit(self):
        report = check_counit(corrupted_dp_instance(("x", "y"), SMALL))
        assert not report.passed
        assert report.max_residual != "0"


class TestEnvelopingAlgebra:
    @pytest.fixture
    def u_sl2(self):
        return UniversalEnvelopingAlgebra(StandardAlgebras.sl2())

    def test_straightening_commutator(self, u_sl2):
        e, f, h = (u_sl2.generator(a) for a in range(3))
        assert f * e == e * f - h
        assert h * e - e * h == e * 2

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.sampled_from(pbw_monomials(3, 2)), min_size=3, max_size=3))
    def test_product_is_associative(self, monomials):
        algebra = UniversalEnvelopingAlgebra(StandardAlgebras.sl2())
        a, b, c = (PBWElement(algebra, {m: QQ.one}) for m in monomials)
        assert (a * b) * c == a * (b * c)

    def test_pbw_monomials_graded(self):
        monomials = pbw_monomials(3, 2)
        assert monomials[0] == (0, 0, 0)
        assert len(monomials) == 10
        assert len(pbw_monomials(3, 3)) == 20

    def test_jacobi_violation_rejected(self):
        broken = LieAlgebraData.from_brackets(
            "broken", ("a", "b", "c"),
            {("a", "b"): {"c": 1}, ("b", "c"): {"a": 1}, ("c", "a"): {"c": 1}})
        assert "jacobi" in broken.validate()
        with pytest.raises(InvalidStructureError):
            UniversalEnvelopingAlgebra(broken)

    def test_ug_sl2_passes_every_axiom(self):
        reports = definition_suite(ug_instance(StandardAlgebras.sl2(), SMALL))
        assert all(r.passed for r in reports.values())

    def test_abelian_coassociativity(self):
        inst = ug_instance(StandardAlgebras.by_name("abelian2"), SMALL)
        assert check_coassociativity(inst).passed
