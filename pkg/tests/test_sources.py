import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agedist import (
    DegenerateSourceError,
    IntegrationError,
    ParameterError,
    integrate,
    inverse_cdf_sample,
    make_source,
    make_truncated_exponential,
    make_truncated_gaussian,
    make_uniform_source,
)

mpmath.mp.dps = 40


def _exp_entropy_bits(rate, hi):
    # h = E[rate X] - ln(rate) + ln Z for the exponential truncated to [0, hi]
    rate, hi = mpmath.mpf(rate), mpmath.mpf(hi)
    z = 1 - mpmath.exp(-rate * hi)
    mean = 1 / rate - hi * mpmath.exp(-rate * hi) / z
    return float((rate * mean - mpmath.log(rate) + mpmath.log(z)) / mpmath.log(2))


def _gauss_entropy_bits(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    phi = lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi)
    z = (mpmath.erf(b / mpmath.sqrt(2)) - mpmath.erf(a / mpmath.sqrt(2))) / 2
    nats = mpmath.log(mpmath.sqrt(2 * mpmath.pi * mpmath.e) * z) + (a * phi(a) - b * phi(b)) / (2 * z)
    return float(nats / mpmath.log(2))


class TestIntegrate:
    def test_constant(self):
        assert integrate(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_polynomial_moments(self):
        for k in range(6):
            got = integrate(lambda x: x**k, 0.0, 1.0)
            assert abs(got - 1.0 / (k + 1)) <= 1e-10

    def test_gaussian_mass_matches_erf(self):
        expected = float(mpmath.erf(5 / mpmath.sqrt(2)))
        got = integrate(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -5.0, 5.0)
        assert abs(got - expected) <= 1e-10
        assert str(expected).startswith("0.9999994")

    def test_empty_interval_is_zero(self):
        assert integrate(lambda x: 1.0, 2.0, 2.0) == 0.0

    def test_reversed_interval(self):
        with pytest.raises(ParameterError):
            integrate(lambda x: 1.0, 1.0, 0.0)

    def test_bad_tolerance(self):
        with pytest.raises(ParameterError):
            integrate(lambda x: 1.0, 0.0, 1.0, abs_tol=0.0)

    def test_singular_integrand_raises_with_residual(self):
        with pytest.raises(IntegrationError) as info:
            integrate(lambda x: 1.0 / abs(x - 0.3) ** 1.2, 0.0, 1.0, abs_tol=1e-12)
        assert info.value.residual > 1e-12


class TestExponential:
    def test_max_density(self, exp_source):
        assert exp_source.max_density == pytest.approx(1.0 / (1.0 - math.exp(-15.0)), rel=1e-9)

    def test_entropy_against_closed_form(self, exp_source):
        expected = _exp_entropy_bits(1.0, 15.0)
        assert abs(exp_source.diff_entropy_bits - expected) < 1e-8
        assert abs(expected - math.log2(math.e)) < 1e-4

    def test_empty_interval_is_degenerate(self):
        with pytest.raises(DegenerateSourceError):
            make_truncated_exponential(1.0, 0.0, 0.0)

    def test_interval_without_mass(self):
        with pytest.raises(DegenerateSourceError):
            make_truncated_exponential(1.0, -3.0, -1.0)
        with pytest.raises(DegenerateSourceError):
            make_truncated_exponential(1.0, 100.0, 101.0)

    def test_nonpositive_rate(self):
        with pytest.raises(ParameterError):
            make_truncated_exponential(0.0)

    def test_inverse_cdf_analytic_point(self, exp_source):
        u = (1.0 - math.exp(-1.0)) / (1.0 - math.exp(-15.0))
        assert inverse_cdf_sample(exp_source, u) == pytest.approx(1.0, abs=1e-10)
        assert exp_source.inverse_cdf(np.array([u]))[0] == pytest.approx(1.0, abs=1e-10)


class TestGaussian:
    def test_max_density(self, gauss_source):
        mass = float(mpmath.erf(5 / mpmath.sqrt(2)))
        assert gauss_source.max_density == pytest.approx(1.0 / math.sqrt(2 * math.pi) / mass, rel=1e-9)
        assert abs(gauss_source.max_density - 0.39894) < 1e-5

    def test_entropy_against_closed_form(self, gauss_source):
        expected = _gauss_entropy_bits(-5.0, 5.0)
        assert abs(gauss_source.diff_entropy_bits - expected) < 1e-8
        assert abs(expected - 0.5 * math.log2(2 * math.pi * math.e)) < 1e-4

    def test_zero_std(self):
        with pytest.raises(ParameterError):
            make_truncated_gaussian(0.0, 0.0)

    def test_median_by_symmetry(self, gauss_source):
        assert abs(inverse_cdf_sample(gauss_source, 0.5)) < 1e-12
        assert abs(gauss_source.mean) < 1e-12


class TestUniform:
    def test_unit_interval(self, unit_source):
        assert unit_source.diff_entropy_bits == 0.0
        assert unit_source.max_density == 1.0
        assert inverse_cdf_sample(unit_source, 0.5) == pytest.approx(0.5, abs=1e-13)

    def test_width_two(self):
        src = make_uniform_source(0.0, 2.0)
        assert src.diff_entropy_bits == 1.0
        assert src.max_density == 0.5

    def test_reversed_interval(self):
        with pytest.raises(ParameterError):
            make_uniform_source(1.0, 0.0)

    def test_point_interval(self):
        with pytest.raises(DegenerateSourceError):
            make_uniform_source(1.0, 1.0)


class TestModelInvariants:
    @pytest.fixture(params=["exp", "gauss", "unit"])
    def model(self, request, exp_source, gauss_source, unit_source):
        return {"exp": exp_source, "gauss": gauss_source, "unit": unit_source}[request.param]

    def test_normalized(self, model):
        mass = integrate(model.pdf, model.support_lo, model.support_hi, abs_tol=1e-11)
        assert abs(mass - 1.0) <= 10 * model.abs_tol

    def test_density_bounded_by_max(self, model):
        x = np.linspace(model.support_lo, model.support_hi, 10_001)
        f = model.pdf(x)
        assert np.all(f >= 0.0)
        assert np.all(f <= model.max_density * (1 + 1e-12))

    def test_entropy_stable_at_doubled_precision(self, model):
        def integrand(x):
            f = float(model.pdf(x))
            return -f * math.log2(f) if f > 0 else 0.0

        h = integrate(integrand, model.support_lo, model.support_hi, abs_tol=model.abs_tol / 2)
        assert abs(h - model.diff_entropy_bits) <= 1e-6

    def test_inverse_cdf_monotone(self, model):
        u = np.linspace(0.0, 1.0, 1000)
        x = model.inverse_cdf(u)
        assert np.all(np.diff(x) >= 0.0)
        assert x[0] == model.support_lo and x[-1] == model.support_hi

    def test_vectorized_matches_scalar(self, model):
        u = np.linspace(0.01, 0.99, 25)
        scalar = np.array([inverse_cdf_sample(model, v) for v in u])
        np.testing.assert_allclose(model.inverse_cdf(u), scalar, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0))
def test_cdf_round_trip(u):
    src = make_truncated_gaussian(0.0, 1.0, -5.0, 5.0)
    x = inverse_cdf_sample(src, u)
    assert abs(float(src.cdf(x)) - u) < 1e-10


def test_inverse_cdf_rejects_out_of_range(unit_source):
    with pytest.raises(ParameterError):
        inverse_cdf_sample(unit_source, 1.5)


def test_custom_density_is_renormalized():
    src = make_source(lambda x: 3.0 * np.asarray(x) ** 2 * 5.0, 0.0, 1.0, name="cubic")
    assert src.pdf(np.array([1.0]))[0] == pytest.approx(3.0, rel=1e-9)
    assert src.mean == pytest.approx(0.75, abs=1e-9)
