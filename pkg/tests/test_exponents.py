import math

import numpy as np
import pytest
from scipy.stats import norm

from soft_covering.errors import DomainError, RateTooLowError, ZeroDispersionError
from soft_covering.exponents import (
    alpha_from_t,
    beta_exponent,
    gamma_delta,
    good_set_thresholds,
    optimized_epsilon,
    qfunc,
    qfunc_inv,
    second_order_plan,
    t_from_alpha,
    theorem1_bound,
)
from soft_covering.info_measures import info_profile, joint_renyi, max_renyi
from soft_covering.probability import bsc, channel_from_rows, make_distribution


def test_noiseless_exponent_is_attained_at_boundary(uniform2, noiseless2):
    result = gamma_delta(uniform2, noiseless2, 1.5, 0.1)

    assert result.gamma_delta == pytest.approx(0.2, abs=1e-6)
    assert result.alpha_star == "boundary"
    assert result.beta == pytest.approx(result.gamma_delta, abs=1e-12)


def test_useless_channel_exponent(uniform2):
    result = gamma_delta(uniform2, bsc(0.5), 1.0, 0.2)
    assert result.gamma_delta == pytest.approx(0.4, abs=1e-6)


def test_rate_below_mutual_information_is_rejected(uniform2, bsc011):
    with pytest.raises(RateTooLowError) as excinfo:
        gamma_delta(uniform2, bsc011, 0.55, 0.1)
    assert "I(X;Y)" in excinfo.value.message
    assert excinfo.value.exit_code == 2


def test_delta_must_be_positive(uniform2, bsc011):
    with pytest.raises(DomainError):
        gamma_delta(uniform2, bsc011, 0.9, 0.0)


def _random_setup(rng):
    k_in, k_out = rng.integers(2, 4, size=2)
    qx = make_distribution(rng.dirichlet(np.ones(k_in)))
    ch = channel_from_rows(rng.dirichlet(np.ones(k_out), size=k_in))
    mi = info_profile(qx, ch).mutual_info_bits
    delta = float(rng.uniform(0.01, 0.5))
    rate = mi + delta + float(rng.uniform(0.05, 1.0))
    return qx, ch, rate, delta


@pytest.mark.parametrize("seed", range(40))
def test_forced_identities(seed):
    rng = np.random.default_rng(seed)
    qx, ch, rate, delta = _random_setup(rng)

    result = gamma_delta(qx, ch, rate, delta)
    mi = result.mutual_info_bits

    assert result.beta == pytest.approx(result.gamma_delta, abs=1e-9)
    assert rate - mi - result.epsilon_star - 2 * result.beta == pytest.approx(delta, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_supremum_dominates_dense_grid(seed):
    rng = np.random.default_rng(100 + seed)
    qx, ch, rate, delta = _random_setup(rng)
    gap = rate - delta

    ts = np.linspace(1e-4, 0.5 - 1e-4, 2000)
    oracle = max(t * (gap - joint_renyi(qx, ch, alpha_from_t(t))) for t in ts)
    oracle = max(oracle, 0.5 * (gap - max_renyi(qx, ch)))

    assert gamma_delta(qx, ch, rate, delta).gamma_delta >= oracle - 1e-9


@pytest.mark.parametrize("alpha", [1.01, 1.5, 2.0, 10.0])
def test_epsilon_and_beta_identity_for_any_alpha(uniform2, bsc011, alpha):
    mi = info_profile(uniform2, bsc011).mutual_info_bits
    rate, delta = 0.9, 0.1
    dalpha = joint_renyi(uniform2, bsc011, alpha)

    eps = optimized_epsilon(rate, delta, alpha, dalpha, mi)
    beta = beta_exponent(mi, dalpha, alpha, eps)

    assert beta == pytest.approx(t_from_alpha(alpha) * (rate - delta - dalpha), abs=1e-12)
    assert rate - mi - eps - 2 * beta == pytest.approx(delta, abs=1e-12)


def test_alpha_reparametrization_round_trip():
    assert alpha_from_t(t_from_alpha(3.7)) == pytest.approx(3.7)
    assert t_from_alpha(1.0) == 0.0


def test_beta_requires_alpha_above_one():
    with pytest.raises(DomainError):
        beta_exponent(0.5, 0.5, 1.0, 0.1)


def test_theorem1_bound_fields(uniform2, bsc02):
    n, rate, delta = 20, 0.9, 0.05
    bound = theorem1_bound(uniform2, bsc02, rate, delta, n)

    assert bound.tv_threshold == pytest.approx(3 * 2 ** (-n * bound.gamma_delta))
    assert bound.failure_prob_log == pytest.approx(math.log1p(2.0**n) - 2 ** (n * delta) / 3)
    assert bound.vacuous
    assert np.logaddexp(bound.atypical_term_log, bound.typical_term_log) <= bound.failure_prob_log + 1e-9
    assert (bound.p2_limit, bound.d1_limit) == pytest.approx(good_set_thresholds(bound, n))
    assert bound.p2_limit + (bound.d1_limit - 1) == pytest.approx(bound.tv_threshold, rel=1e-9)


def test_theorem1_bound_becomes_informative(uniform2, bsc02):
    bound = theorem1_bound(uniform2, bsc02, 0.9, 0.1, 300)
    assert not bound.vacuous
    assert bound.failure_prob_log < -1000


def test_exponent_result_with_blocklength(uniform2, noiseless2):
    result = gamma_delta(uniform2, noiseless2, 1.5, 0.1, n=10)
    assert result.tv_threshold == pytest.approx(3 * 2.0**-2, rel=1e-6)
    assert result.vacuous


def test_qfunc_and_inverse():
    assert qfunc(0.0) == pytest.approx(0.5)
    assert qfunc(1.3) == pytest.approx(norm.sf(1.3), rel=1e-12)
    assert qfunc_inv(qfunc(1.3)) == pytest.approx(1.3, abs=1e-10)
    assert qfunc_inv(0.1) == pytest.approx(norm.isf(0.1), abs=1e-10)
    for eps in (0.0, 1.0):
        with pytest.raises(DomainError):
            qfunc_inv(eps)


def test_second_order_rate_at_half(uniform2, bsc011):
    profile = info_profile(uniform2, bsc011)
    plan = second_order_plan(profile, 0.5, 64, 3.0, 1.0, output_size=2)
    assert plan.rate - profile.mutual_info_bits == pytest.approx(3.0 * 6 / 64, abs=1e-12)
    assert plan.r == pytest.approx(0.5)


def test_second_order_rate_matches_normal_quantile(uniform2, bsc011):
    profile = info_profile(uniform2, bsc011)
    n, eps, c = 1000, 0.1, 3.0
    plan = second_order_plan(profile, eps, n, c, 1.0, output_size=2)

    expected = norm.isf(eps) * math.sqrt(profile.dispersion) + c * math.log2(n) / math.sqrt(n)
    assert (plan.rate - profile.mutual_info_bits) * math.sqrt(n) == pytest.approx(expected, rel=1e-2)
    assert plan.slack == pytest.approx(plan.qinv * math.sqrt(profile.dispersion / n) + 0.5 * math.log2(n) / n)
    assert plan.tv_bound == pytest.approx(plan.p2_limit + 1 / math.sqrt(n))
    assert 0 < plan.mu_n


def test_second_order_failure_bound_decreases(uniform2, bsc011):
    profile = info_profile(uniform2, bsc011)
    small = second_order_plan(profile, 0.1, 100, 5.0, 1.0, output_size=2)
    large = second_order_plan(profile, 0.1, 2000, 5.0, 1.0, output_size=2)
    assert large.failure_log < small.failure_log


def test_second_order_requires_dispersion(uniform2):
    with pytest.raises(ZeroDispersionError):
        second_order_plan(info_profile(uniform2, bsc(0.5)), 0.1, 100, 3.0, 1.0, output_size=2)


@pytest.mark.parametrize(
    ("eps", "c", "d", "r"),
    [(0.0, 3.0, 1.0, None), (0.1, 2.0, 0.5, None), (0.1, 3.0, 2.5, None), (0.1, 3.0, 1.0, 1.5)],
)
def test_second_order_parameter_ranges(uniform2, bsc011, eps, c, d, r):
    with pytest.raises(DomainError):
        second_order_plan(info_profile(uniform2, bsc011), eps, 100, c, d, r, output_size=2)


@pytest.mark.parametrize("seed", range(20))
def test_exponent_at_most_half_the_rate_gap(seed):
    rng = np.random.default_rng(300 + seed)
    qx, ch, rate, delta = _random_setup(rng)
    result = gamma_delta(qx, ch, rate, delta)
    assert 0.0 <= result.gamma_delta <= 0.5 * (rate - delta - result.mutual_info_bits) + 1e-12


def test_exponent_is_monotone_in_delta_and_rate(uniform2, bsc011):
    by_delta = [gamma_delta(uniform2, bsc011, 1.0, d).gamma_delta for d in np.linspace(0.01, 0.45, 23)]
    by_rate = [gamma_delta(uniform2, bsc011, r, 0.05).gamma_delta for r in np.linspace(0.6, 1.6, 26)]
    assert np.all(np.diff(by_delta) <= 1e-9)
    assert np.all(np.diff(by_rate) >= -1e-9)


def test_exponent_matches_dense_grid_from_both_sides(uniform2, bsc02):
    rate, delta = 0.9, 0.05
    gap = rate - delta
    ts = np.linspace(0.0, 0.5, 20001)[1:-1]
    oracle = max(t * (gap - joint_renyi(uniform2, bsc02, alpha_from_t(t))) for t in ts)
    oracle = max(oracle, 0.5 * (gap - max_renyi(uniform2, bsc02)))

    result = gamma_delta(uniform2, bsc02, rate, delta)
    assert oracle - 1e-12 <= result.gamma_delta <= oracle + 1e-6


def test_mu_n_approaches_target_at_large_blocklength(uniform2, bsc011):
    plan = second_order_plan(info_profile(uniform2, bsc011), 0.25, 10**6, 3.0, 1.0, output_size=2)
    assert plan.mu_n == pytest.approx(0.25, abs=0.01)


def test_qfunc_round_trip_over_open_interval():
    tails = np.logspace(-6, math.log10(0.5), 25)
    for eps in np.concatenate([tails, 1.0 - tails]):
        assert qfunc(qfunc_inv(float(eps))) == pytest.approx(eps, rel=1e-10)
    for x in np.linspace(-4.5, 4.5, 37):
        assert qfunc_inv(qfunc(float(x))) == pytest.approx(x, abs=1e-9)


def test_second_order_rate_converges_to_normal_approximation(uniform2, bsc011):
    profile = info_profile(uniform2, bsc011)
    n, eps = 10**8, 0.1
    plan = second_order_plan(profile, eps, n, 3.0, 1.0, output_size=2)
    ratio = (plan.rate - profile.mutual_info_bits) * math.sqrt(n) / (qfunc_inv(eps) * math.sqrt(profile.dispersion))
    assert ratio == pytest.approx(1.0, rel=0.01)
