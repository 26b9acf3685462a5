import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agedist import (
    CODE_KINDS,
    ParameterError,
    aoi_optimal_integer,
    aoi_optimal_real,
    brute_force_optimum,
    build_uniform,
    code_moments,
    constant_length,
    make_code,
    shannon_integer,
    shannon_real,
    zero_wait_objective,
)
from agedist._numerics import entropy_bits


def _objective(p, l):
    p, l = np.asarray(p), np.asarray(l)
    m = float(p @ l)
    return float(p @ (l * l)) / (2 * m) + m


prob_vectors = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8).map(
    lambda w: np.asarray(w) / np.sum(w)
)


class TestShannon:
    def test_even_pair(self):
        c = shannon_real([0.5, 0.5])
        np.testing.assert_allclose(c.lengths, [1, 1])
        assert (c.mean_len, c.second_moment) == (1.0, 1.0)

    def test_dyadic(self):
        c = shannon_real([0.5, 0.25, 0.25])
        np.testing.assert_allclose(c.lengths, [1, 2, 2])
        assert c.mean_len == pytest.approx(1.5) and c.second_moment == pytest.approx(2.5)

    def test_mean_equals_entropy_on_quantized_gaussian(self, gauss_source):
        q = build_uniform(gauss_source, 32)
        c = shannon_real(q.active_probs)
        assert abs(c.mean_len - q.entropy_bits) < 1e-12

    def test_integer_examples(self):
        np.testing.assert_array_equal(shannon_integer([0.6, 0.4]).lengths, [1, 2])
        np.testing.assert_array_equal(shannon_integer([0.5, 0.25, 0.25]).lengths, [1, 2, 2])

    def test_integer_never_zero_length(self):
        c = shannon_integer([0.999, 0.001])
        assert c.lengths[0] == 1.0

    @settings(max_examples=60, deadline=None)
    @given(prob_vectors)
    def test_integer_within_one_bit(self, p):
        real, integer = shannon_real(p), shannon_integer(p)
        diff = integer.lengths - real.lengths
        assert np.all(diff > -1e-9) and np.all(diff < 1.0)
        assert integer.kraft_sum <= 1 + 1e-9


class TestConstant:
    def test_power_of_two(self):
        np.testing.assert_allclose(constant_length(8).lengths, np.full(8, 3.0))

    def test_integer_rounds_up(self):
        np.testing.assert_array_equal(constant_length(5, integer_valued=True).lengths, np.full(5, 3.0))

    def test_real_log(self):
        assert constant_length(5).lengths[0] == pytest.approx(2.321928094887362)

    def test_probs_must_match(self):
        with pytest.raises(ParameterError):
            constant_length(3, probs=[0.5, 0.5])


class TestMoments:
    def test_single_symbol(self):
        assert code_moments([1.0], [0.0]) == (0.0, 0.0, 0.0)
        assert zero_wait_objective([1.0], [0.0]) == 0.0

    def test_pair(self):
        assert code_moments([0.5, 0.5], [1.0, 2.0]) == (1.5, 2.5, 1.0)

    def test_ess_inf_skips_zero_probability(self):
        assert code_moments([0.0, 1.0], [0.5, 3.0])[2] == 3.0

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            code_moments([0.5, 0.5], [1.0])

    def test_concentration_on_quantized_gaussian(self, gauss_source):
        c = shannon_real(build_uniform(gauss_source, 32).active_probs)
        assert 1.0 < c.moment_ratio < 1.2


class TestAoIOptimal:
    def test_even_pair_meets_bound(self):
        c = aoi_optimal_real([0.5, 0.5])
        np.testing.assert_allclose(c.lengths, [1, 1], atol=1e-6)
        assert c.objective == pytest.approx(1.5, abs=1e-9)

    def test_dyadic_triple_matches_grid(self):
        p = [0.5, 0.25, 0.25]
        _, oracle = brute_force_optimum(p)
        c = aoi_optimal_real(p)
        assert abs(c.objective - oracle) <= 1e-4
        assert c.objective <= oracle + 1e-12

    def test_single_cell(self):
        c = aoi_optimal_real([1.0])
        assert c.lengths.tolist() == [0.0] and c.objective == 0.0

    def test_extreme_skew(self):
        c = aoi_optimal_real([1 - 1e-12, 1e-12])
        assert c.kraft_sum == pytest.approx(1.0, abs=1e-9)
        assert c.objective <= shannon_real([1 - 1e-12, 1e-12]).objective

    @pytest.mark.parametrize("seed", range(6))
    def test_random_triples_match_grid(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = rng.dirichlet(np.ones(3))
        _, oracle = brute_force_optimum(p)
        assert abs(aoi_optimal_real(p).objective - oracle) <= 1e-3

    def test_gap_shrinks_on_quantized_exp(self, exp_source):
        def gap(n):
            p = build_uniform(exp_source, n).active_probs
            opt = aoi_optimal_real(p)
            assert opt.objective <= shannon_real(p).objective + 1e-12
            return shannon_real(p).objective - opt.objective

        assert gap(32) < gap(2)

    def test_integer_is_ceiling_of_real(self):
        p = [0.5, 0.25, 0.25]
        real, integer = aoi_optimal_real(p), aoi_optimal_integer(p)
        np.testing.assert_array_equal(integer.lengths, np.maximum(np.ceil(real.lengths - 1e-9), 1))
        assert integer.integer_valued

    @settings(max_examples=40, deadline=None)
    @given(prob_vectors)
    def test_sandwich(self, p):
        opt = aoi_optimal_real(p)
        assert 1.5 * entropy_bits(p) - 1e-9 <= opt.objective <= shannon_real(p).objective + 1e-9
        assert opt.kraft_sum == pytest.approx(1.0, abs=1e-9)
        assert opt.mean_len >= entropy_bits(p) - 1e-9

    @settings(max_examples=40, deadline=None)
    @given(prob_vectors)
    def test_integer_gap_below_five_halves(self, p):
        gap = aoi_optimal_integer(p).objective - aoi_optimal_real(p).objective
        assert gap < 2.5
        assert np.all(aoi_optimal_integer(p).lengths >= 1)

    @settings(max_examples=30, deadline=None)
    @given(prob_vectors, st.floats(1.001, 4.0))
    def test_scaling_up_hurts(self, p, c):
        opt = aoi_optimal_real(p)
        assert _objective(p, c * opt.lengths) > opt.objective

    def test_moments_recomputed(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        c = aoi_optimal_real(p)
        assert abs(c.mean_len - float(np.sum(p * c.lengths))) <= 1e-12
        assert abs(c.second_moment - float(np.sum(p * c.lengths**2))) <= 1e-12


class TestValidation:
    @pytest.mark.parametrize("p", [[0.5, 0.6], [1.2, -0.2], [], [0.5, float("nan")], [1.0, 0.0]])
    def test_rejects_bad_probs(self, p):
        with pytest.raises(ParameterError):
            aoi_optimal_real(p)

    def test_grid_oracle_limited_to_three(self):
        with pytest.raises(ParameterError):
            brute_force_optimum([0.25] * 4)

    def test_make_code_dispatch(self):
        p = [0.5, 0.3, 0.2]
        for kind in CODE_KINDS:
            c = make_code(kind, p)
            assert c.kind == kind
            assert c.kraft_sum <= 1 + 1e-9
            if c.integer_valued:
                assert np.all(c.lengths == np.round(c.lengths)) and np.all(c.lengths >= 1)

    def test_make_code_unknown(self):
        with pytest.raises(ParameterError):
            make_code("huffman", [0.5, 0.5])


def test_entropy_reference():
    assert entropy_bits([0.5, 0.25, 0.25, 0.0]) == 1.5
    assert math.isclose(entropy_bits([1.0]), 0.0, abs_tol=0.0)
