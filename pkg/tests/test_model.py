import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from welfarerank.errors import ConfigError, DomainError
from welfarerank.model import (
    OutcomeSpec,
    PreferenceParams,
    from_increments,
    to_increments,
    utility_delta,
    validate_outcomes,
    welfare_impact,
    welfare_weight,
)

LOG = OutcomeSpec("cons", transform="log", is_numeraire=True)
LIN = OutcomeSpec("days", transform="linear")


class TestUtilityDelta:
    def test_log_identity_case(self):
        assert utility_delta(LOG, 100.0, 100.0) == 0.0

    def test_linear_subtraction(self):
        assert utility_delta(LIN, 2.0, 3.5) == pytest.approx(1.5)

    def test_log_of_e(self):
        assert utility_delta(LOG, 1.0, math.e) == pytest.approx(1.0)

    @pytest.mark.parametrize("y0,y1", [(0.0, 1.0), (1.0, 0.0), (-2.0, 3.0)])
    def test_log_requires_positive(self, y0, y1):
        with pytest.raises(DomainError, match="cons"):
            utility_delta(LOG, y0, y1)


class TestWelfareWeight:
    def test_unit_weights(self):
        assert welfare_weight({"a": 1.0, "b": 1.0}, {"a": 3.0, "b": -2.0}) == 1.0

    def test_single_binary(self):
        assert welfare_weight({"a": 2.0}, {"a": 1.0}) == pytest.approx(2.0)

    def test_downweighting_in_increments(self):
        # 1.01**-12.4 corresponds to weighting the group ~11.7% lower
        w = welfare_weight({"indigenous": 1.01 ** (-12.4)}, {"indigenous": 1.0})
        assert w == pytest.approx(0.884, abs=5e-4)

    def test_missing_covariate(self):
        with pytest.raises(ConfigError, match="'a'"):
            welfare_weight({"a": 2.0}, {"b": 1.0})

    def test_zero_vector_normalization(self):
        assert welfare_weight({"a": 5.0, "b": 0.1}, {"a": 0.0, "b": 0.0}) == 1.0

    @given(
        st.dictionaries(
            st.sampled_from(["a", "b", "c"]),
            st.floats(0.2, 5.0),
            min_size=1,
            max_size=3,
        ),
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(-3, 3),
    )
    def test_multiplicative_in_x(self, omega, xa, xb, xc):
        x1 = {"a": xa, "b": xb, "c": xc}
        x2 = {"a": xc, "b": xa, "c": xb}
        x_sum = {k: x1[k] + x2[k] for k in x1}
        lhs = welfare_weight(omega, x_sum)
        rhs = welfare_weight(omega, x1) * welfare_weight(omega, x2)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestWelfareImpact:
    def test_pure_intrinsic_value(self):
        p = PreferenceParams(omega={}, lam={"s": -0.5}, C=0.5, sigma=1.0)
        assert welfare_impact(p, {"num": 0.0, "s": 0.0}, {}) == pytest.approx(0.5)

    def test_arithmetic(self):
        p = PreferenceParams(omega={}, lam={"s": -0.03}, C=0.0, sigma=1.0)
        assert welfare_impact(p, {"num": 0.1, "s": 1.0}, {}) == pytest.approx(0.07)

    def test_linear_in_mu(self):
        lam = {"s": 0.2}
        dv = {"num": 0.3, "s": -1.0}
        base = PreferenceParams(omega={"a": 1.0}, lam=lam, C=0.1, sigma=1.0)
        doubled = PreferenceParams(omega={"a": 2.0}, lam=lam, C=0.1, sigma=1.0)
        x = {"a": 1.0}
        assert welfare_impact(doubled, dv, x) == pytest.approx(2 * welfare_impact(base, dv, x))

    def test_linear_in_C_and_lambda(self):
        x = {"a": 0.7}
        dv = {"num": 0.2, "s": 1.5}
        def impact(C, lam_s):
            p = PreferenceParams(omega={"a": 1.3}, lam={"s": lam_s}, C=C, sigma=1.0)
            return welfare_impact(p, dv, x)
        # affine in C
        assert impact(2.0, 0.1) - impact(1.0, 0.1) == pytest.approx(impact(1.0, 0.1) - impact(0.0, 0.1))
        # affine in lambda_s
        assert impact(0.0, 2.0) - impact(0.0, 1.0) == pytest.approx(impact(0.0, 1.0) - impact(0.0, 0.0))

    def test_ambiguous_numeraire(self):
        p = PreferenceParams(omega={}, lam={"s": 0.1}, C=0.0, sigma=1.0)
        with pytest.raises(ConfigError):
            welfare_impact(p, {"num": 0.0, "other": 0.0, "s": 0.0}, {})


class TestIncrements:
    def test_unit_weight(self):
        assert to_increments(1.0) == 0.0

    def test_prioritized_47_percent_higher(self):
        assert to_increments(1.01 ** 38.57) == pytest.approx(38.57, abs=1e-9)
        assert 1.01 ** 38.6 == pytest.approx(1.468, abs=5e-4)

    def test_inverse_round_trip(self):
        assert to_increments(1.01 ** 5.6) == pytest.approx(5.6, abs=1e-9)

    def test_non_positive(self):
        with pytest.raises(DomainError):
            to_increments(0.0)
        with pytest.raises(DomainError):
            to_increments(-1.2)

    @given(st.floats(-500, 500))
    def test_round_trip_wide_range(self, v):
        assert to_increments(from_increments(v)) == pytest.approx(v, abs=1e-12 * max(1, abs(v)))


class TestSpecs:
    def test_exactly_one_numeraire(self):
        with pytest.raises(ConfigError):
            validate_outcomes([LIN])
        with pytest.raises(ConfigError):
            validate_outcomes([LOG, OutcomeSpec("x", transform="log", is_numeraire=True)])
        assert validate_outcomes([LIN, LOG]) == 1

    def test_params_validation(self):
        with pytest.raises(DomainError):
            PreferenceParams(omega={"a": 0.0}, lam={}, C=0.0, sigma=1.0)
        with pytest.raises(DomainError):
            PreferenceParams(omega={}, lam={}, C=0.0, sigma=0.0)

    def test_bad_transform(self):
        with pytest.raises(ConfigError):
            OutcomeSpec("x", transform="sqrt")

    def test_omega_increments(self):
        p = PreferenceParams(omega={"a": 1.01 ** 13.0}, lam={}, C=0.0, sigma=1.0)
        assert p.omega_increments()["a"] == pytest.approx(13.0)


def test_argmax_invariance_under_positive_scaling(rng):
    # multiplying every delta_S by a positive constant preserves the ranking
    scores = rng.normal(size=40)
    for k in (0.2, 1.0, 37.5):
        assert np.array_equal(np.argsort(-scores), np.argsort(-k * scores))
