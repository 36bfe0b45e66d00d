import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from rwdiff import DomainError, ExpansionModel, ParameterError

EPS = 1e-8  # stands in for t -> 0+

models = st.one_of(
    st.floats(0.1, 3.0).map(ExpansionModel.pure_exponential),
    st.tuples(st.floats(0.1, 3.0), st.floats(0.0, 4.0)).map(lambda hp: ExpansionModel.power_exponential(*hp)),
)


class TestAlpha:
    def test_near_zero_is_one(self, expo):
        assert expo.alpha(EPS) == pytest.approx(1.0, abs=1e-7)

    def test_closed_form(self, expo):
        assert expo.alpha(2.0) == pytest.approx(math.e**2, rel=1e-15)

    def test_power_exponential_value(self):
        assert ExpansionModel.power_exponential(1.0, 2.0).alpha(1.0) == pytest.approx(4 * math.e, rel=1e-15)

    def test_vectorised(self, power2):
        t = np.array([0.5, 1.0, 3.0])
        np.testing.assert_allclose(power2.alpha(t), np.exp(t) * (1 + t) ** 2, rtol=1e-14)

    @pytest.mark.parametrize("t", [0.0, -1.0, 1e-10])
    def test_domain_guard(self, expo, t):
        with pytest.raises(DomainError):
            expo.alpha(t)
        with pytest.raises(DomainError):
            expo.hubble(t)
        with pytest.raises(DomainError):
            expo.christoffel(t)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            ExpansionModel.pure_exponential(0.0)
        with pytest.raises(ParameterError):
            ExpansionModel.power_exponential(1.0, -1.0)
        with pytest.raises(ParameterError):
            ExpansionModel("logistic")


class TestHubble:
    def test_constant_for_exponential(self, expo):
        np.testing.assert_array_equal(expo.hubble(np.array([0.1, 1.0, 50.0])), 1.0)

    def test_power_exponential(self, power2):
        assert power2.hubble(1.0) == pytest.approx(2.0, rel=1e-15)

    def test_p_zero_reduces(self):
        assert ExpansionModel.power_exponential(1.0, 0.0).hubble(5.0) == 1.0

    @pytest.mark.parametrize("model, limit", [
        (ExpansionModel.pure_exponential(0.5), 0.5),
        (ExpansionModel.power_exponential(1.0, 3.0), 1.0),
        (ExpansionModel.power_exponential(2.0, 0.0), 2.0),
    ])
    def test_limit(self, model, limit):
        assert model.hubble_limit() == limit

    @given(models)
    def test_nonincreasing_to_positive_limit(self, model):
        t = np.logspace(-6, 4, 200)
        h = model.hubble(t)
        assert np.all(np.diff(h) <= 0)
        assert np.all(h >= model.hubble_limit()) and model.hubble_limit() > 0

    @given(models, st.floats(0.01, 20.0))
    def test_finite_difference(self, model, t):
        for step in (1e-3, 1e-4):
            fd = (model.alpha(t + step) - model.alpha(t - step)) / (2 * step)
            # third derivative of alpha is bounded by ~ (H + p)^3 alpha on this range
            bound = 2.0 * (model.h_infinity + model.p + 1) ** 3 * model.alpha(t + step) * step**2
            assert abs(fd - model.hubble(t) * model.alpha(t)) <= bound


class TestGeometry:
    def test_christoffel_at_origin(self, expo):
        g0, gi = expo.christoffel(EPS)
        assert g0 == pytest.approx(1.0, abs=1e-7) and gi == 1.0

    def test_christoffel_h2(self):
        g0, gi = ExpansionModel.pure_exponential(2.0).christoffel(1.0)
        assert g0 == pytest.approx(2 * math.e**4, rel=1e-14)
        assert gi == 2.0

    def test_christoffel_power(self):
        g0, gi = ExpansionModel.power_exponential(1.0, 1.0).christoffel(EPS)
        assert g0 == pytest.approx(2.0, rel=1e-7)
        assert gi == pytest.approx(2.0, rel=1e-7)

    @pytest.mark.parametrize("h", [0.3, 1.0, 2.5])
    def test_curvature_exponential(self, h):
        m = ExpansionModel.pure_exponential(h)
        np.testing.assert_allclose(m.scalar_curvature(np.array([0.1, 1.0, 10.0])), -12 * h * h, rtol=1e-14)

    def test_curvature_p_zero(self):
        assert ExpansionModel.power_exponential(1.0, 0.0).scalar_curvature(3.0) == pytest.approx(-12.0)

    @given(models, st.floats(0.05, 10.0))
    def test_against_finite_differences(self, model, t):
        # Richardson-extrapolated central differences of alpha(u)/alpha(t)
        step = 2e-3 / (model.h_infinity + model.p + 1)
        a = lambda u: math.exp(float(model.log_alpha(u)) - float(model.log_alpha(t)))  # noqa: E731
        d1 = lambda k: (a(t + k) - a(t - k)) / (2 * k)  # noqa: E731
        d2 = lambda k: (a(t + k) - 2 * a(t) + a(t - k)) / k**2  # noqa: E731
        a1 = (4 * d1(step / 2) - d1(step)) / 3
        a2 = (4 * d2(step / 2) - d2(step)) / 3
        alpha = model.alpha(t)
        g0, gi = model.christoffel(t)
        assert g0 == pytest.approx(alpha * alpha * a1, rel=1e-6)
        assert gi == pytest.approx(a1, rel=1e-6)
        assert model.scalar_curvature(t) == pytest.approx(-6 * (a2 + a1 * a1), rel=1e-6)


class TestTail:
    def test_unit_rate(self, expo):
        assert expo.inv_alpha_tail(EPS) == pytest.approx(1.0, abs=1e-7)

    def test_rate_two(self):
        assert ExpansionModel.pure_exponential(2.0).inv_alpha_tail(EPS) == pytest.approx(0.5, abs=1e-7)

    def test_infinity(self, power2):
        assert power2.inv_alpha_tail(math.inf) == 0.0
        assert power2.inv_alpha_tail(900.0) == 0.0
        assert math.isfinite(power2.log_inv_alpha_tail(900.0))

    @pytest.mark.parametrize("t", [0.1, 1.0, 4.0, 15.0])
    def test_power_against_direct_quadrature(self, power2, t):
        direct, _ = integrate.quad(lambda u: math.exp(-power2.log_alpha(u)), t, math.inf, epsabs=0, epsrel=1e-12)
        assert power2.inv_alpha_tail(t) == pytest.approx(direct, rel=1e-9)

    @given(models)
    def test_decreasing_and_bounded(self, model):
        t = np.logspace(-3, 2, 40)
        tail = model.inv_alpha_tail(t)
        assert np.all(np.diff(tail) <= 0)
        assert np.all(tail <= 1.0 / (model.alpha(t) * model.hubble_limit()) * (1 + 1e-12))
