import itertools

import numpy as np
import pytest
from sympy import QQ

from src.data.structures import StandardAlgebras
from src.models.dynamical_r import (
    AltConvention,
    DynamicalR,
    calibrate_alt_convention,
    casimir_tensor,
    cdybe_residual,
    check_cdybe,
    check_equivariance,
    equivariance_residual,
    constant_r,
    cybe_residual_oracle,
    bracket_terms,
    example41_lambda,
    killing_form,
    lambda_coordinates,
    perturbed_sl2_fixture,
    product_algebroid,
    rational_sl2_fixture,
    symmetric_part_check,
    weight_rescale,
)
from src.utils.exceptions import NotInvertibleError, PreconditionError

CALIBRATED = AltConvention(-1, "cyclic")


@pytest.fixture(scope="module")
def sl2():
    return StandardAlgebras.sl2()


class TestConvention:
    def test_calibration_is_unique(self):
        result = calibrate_alt_convention()
        assert result.unique
        assert result.convention == CALIBRATED
        assert sum(result.outcomes.values()) == 1

    def test_invalid_convention(self):
        with pytest.raises(ValueError):
            AltConvention(2, "cyclic")
        with pytest.raises(ValueError):
            AltConvention(-1, "diagonal")

    def test_config_default(self):
        assert AltConvention.from_config({}) == CALIBRATED
        assert AltConvention.from_config({"ALT_SIGN": 1, "ALT_PLACEMENT": "leading"}).label == "+leading"

    def test_ambiguous_calibration(self, sl2):
        result = calibrate_alt_convention([DynamicalR.zero(sl2)])
        assert not result.unique
        with pytest.raises(PreconditionError):
            result.convention


class TestCDYBE:
    @pytest.mark.parametrize("shift", [0, 1, "-3/2"])
    def test_rational_family_solves(self, sl2, shift):
        assert check_cdybe(sl2, rational_sl2_fixture(shift), CALIBRATED).passed

    def test_perturbed_fixture_fails(self, sl2):
        report = check_cdybe(sl2, perturbed_sl2_fixture(), CALIBRATED)
        assert not report.passed
        assert "Alt convention -cyclic" in report.notes

    def test_constant_r_reduces_to_cybe(self, sl2):
        r = constant_r(sl2, {("e", "f"): 1, ("h", "h"): "1/4", ("e", "h"): 3})
        residual = cdybe_residual(sl2, r, CALIBRATED)
        assert all(a == b for a, b in zip(residual.flat, cybe_residual_oracle(sl2, r).flat))

    def test_standard_r_matrix_solves_cybe(self, sl2):
        r = constant_r(sl2, {("e", "f"): 1, ("h", "h"): "1/4"})
        assert not any(cdybe_residual(sl2, r, CALIBRATED).flat)

    def test_bracket_terms_match_oracle_for_dynamical_r(self, sl2):
        r = DynamicalR.from_entries(sl2, {("e", "f"): "1/lam_h", ("h", "e"): "lam_h", ("f", "f"): 2})
        total = sum(bracket_terms(sl2, r))
        assert all(a == b for a, b in zip(total.flat, cybe_residual_oracle(sl2, r).flat))

    def test_weight_rescaling_scales_residual(self, sl2):
        r = DynamicalR.from_entries(sl2, {("e", "f"): "-1/lam_h", ("f", "e"): "1/lam_h",
                                          ("e", "h"): 1, ("h", "e"): "lam_h"})
        rescaled, scales = weight_rescale(r, {"e": 1, "f": -1}, t=2)
        before = cdybe_residual(sl2, r, CALIBRATED)
        after = cdybe_residual(sl2, rescaled, CALIBRATED)
        assert any(before.flat)
        for a, b, c in itertools.product(range(3), repeat=3):
            assert after[a, b, c] == before[a, b, c] * r.field(scales[a] * scales[b] * scales[c])

    def test_weights_must_grade(self, sl2):
        with pytest.raises(PreconditionError):
            weight_rescale(rational_sl2_fixture(), {"e": 1})


class TestEquivarianceAndSymmetricPart:
    def test_fixture_is_zero_weight(self, sl2):
        assert check_equivariance(sl2, rational_sl2_fixture()).passed

    def test_nonzero_weight_detected(self, sl2):
        r = DynamicalR.from_entries(sl2, {("e", "e"): 1})
        assert not check_equivariance(sl2, r).passed
        residual = equivariance_residual(sl2, r)
        assert residual.shape == (1, 3, 3)
        assert residual[0, 0, 0] != 0
        assert not any(residual[0, a, b] for a in range(3) for b in range(3) if (a, b) != (0, 0))
        assert not any(equivariance_residual(sl2, rational_sl2_fixture()).flat)

    def test_killing_form_and_casimir(self, sl2):
        K = killing_form(sl2)
        assert K[0][1] == QQ(4) and K[2][2] == QQ(8) and K[0][0] == QQ(0)
        omega = casimir_tensor(sl2)
        field = omega.field
        assert omega.entries[0, 1] == field(QQ(1, 4))
        assert omega.entries[2, 2] == field(QQ(1, 8))

    def test_casimir_part_is_allowed(self, sl2):
        r = rational_sl2_fixture(1) + casimir_tensor(sl2).scale("1/2")
        assert symmetric_part_check(r).passed
        assert check_equivariance(sl2, r).passed

    def test_dynamical_symmetric_part_rejected(self, sl2):
        r = DynamicalR.from_entries(sl2, {("e", "f"): "1/lam_h", ("f", "e"): "1/lam_h"})
        assert not symmetric_part_check(r).passed

    def test_non_invariant_symmetric_part_rejected(self, sl2):
        r = DynamicalR.from_entries(sl2, {("h", "h"): 1})
        assert not symmetric_part_check(r).passed

    def test_degenerate_killing_form(self):
        with pytest.raises(NotInvertibleError):
            casimir_tensor(StandardAlgebras.abelian(2))

    def test_entries_are_exact(self, sl2):
        with pytest.raises(TypeError):
            DynamicalR.from_entries(sl2, {("e", "f"): 0.5})
        with pytest.raises(KeyError):
            DynamicalR.from_entries(sl2, {("e", "g"): 1})


class TestLambda:
    def test_product_algebroid_shape(self, sl2):
        A = product_algebroid(sl2)
        assert A.coordinates == lambda_coordinates(sl2) == ("lam_h",)
        assert A.frame == ("xi_h", "e", "f", "h")
        assert A.anchor.shape == (4, 1)

    def test_fixture_gives_triangular_bialgebroid(self, sl2):
        result = example41_lambda(sl2, rational_sl2_fixture(), CALIBRATED)
        assert result.triangular
        assert result.reports["compatibility"].passed
        assert result.bivector.component(0, 3) == result.algebroid.domain.one

    def test_perturbed_fixture_is_not_triangular(self, sl2):
        result = example41_lambda(sl2, perturbed_sl2_fixture(), CALIBRATED, require_preconditions=False)
        assert not result.triangular
        assert result.bialgebroid is None
        with pytest.raises(PreconditionError):
            example41_lambda(sl2, perturbed_sl2_fixture(), CALIBRATED)

    def test_abelian_algebra(self):
        g = StandardAlgebras.abelian(2)
        result = example41_lambda(g, DynamicalR.zero(g), CALIBRATED)
        assert result.triangular
        assert np.shape(result.algebroid.anchor) == (4, 2)
