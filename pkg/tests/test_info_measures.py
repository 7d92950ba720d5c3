import math

import numpy as np
import pytest

from soft_covering.errors import DomainError, SupportViolationError, UndefinedDensityError
from soft_covering.info_measures import (
    density_matrix,
    info_profile,
    information_density,
    joint_renyi,
    max_renyi,
    renyi_divergence,
    renyi_limit_check,
)
from soft_covering.probability import bsc, channel_from_rows, make_distribution, uniform


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.mark.parametrize("p", [0.05, 0.11, 0.2, 0.3])
def test_bsc_profile_closed_form(uniform2, p):
    profile = info_profile(uniform2, bsc(p))
    d = math.log2((1 - p) / p)

    assert profile.mutual_info_bits == pytest.approx(1 - binary_entropy(p), abs=1e-12)
    assert profile.dispersion == pytest.approx(p * (1 - p) * d**2, rel=1e-10)
    assert profile.third_abs_moment == pytest.approx(p * (1 - p) * (p**2 + (1 - p) ** 2) * d**3, rel=1e-10)


def test_noiseless_profile_has_zero_dispersion(uniform2, noiseless2):
    profile = info_profile(uniform2, noiseless2)
    assert profile.mutual_info_bits == pytest.approx(1.0)
    assert profile.dispersion == pytest.approx(0.0, abs=1e-15)


def test_bec_mutual_information(uniform2, bec02):
    assert info_profile(uniform2, bec02).mutual_info_bits == pytest.approx(0.8, abs=1e-12)


def test_information_density_values(uniform2, bsc02):
    assert information_density(uniform2, bsc02, 0, 0) == pytest.approx(math.log2(1.6))
    assert information_density(uniform2, bsc02, 0, 1) == pytest.approx(math.log2(0.4))


def test_information_density_undefined_off_output_support(noiseless2):
    qx = make_distribution([1.0, 0.0])
    with pytest.raises(UndefinedDensityError):
        information_density(qx, noiseless2, 0, 1)
    assert information_density(qx, noiseless2, 1, 0) == -math.inf


def test_density_matrix_marks_impossible_pairs(uniform2, bec02):
    dens = density_matrix(uniform2, bec02)
    assert dens[0, 2] == -math.inf
    assert dens[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_renyi_order_two_of_bsc(uniform2, bsc02):
    assert joint_renyi(uniform2, bsc02, 2.0) == pytest.approx(math.log2(1.36), rel=1e-12)


def test_renyi_tends_to_kl_near_one():
    p, q = np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.5, 0.3])
    kl = renyi_limit_check(p, q)
    assert renyi_divergence(p, q, 1.0 + 1e-6) == pytest.approx(kl, abs=1e-5)
    assert renyi_divergence(p, q, 1.0 - 1e-6) == pytest.approx(kl, abs=1e-5)


def test_renyi_is_nondecreasing_in_order():
    ch = bsc(0.15)
    qx = uniform(2)
    orders = [0.25, 0.5, 0.9, 1.5, 2.0, 5.0, 50.0]
    values = [joint_renyi(qx, ch, a) for a in orders]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] <= max_renyi(qx, ch) + 1e-12


def test_renyi_support_rules():
    p, q = np.array([0.5, 0.5]), np.array([1.0, 0.0])
    with pytest.raises(SupportViolationError):
        renyi_divergence(p, q, 2.0)
    assert renyi_divergence(p, q, 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [0.0, -1.0, 1.0])
def test_renyi_rejects_bad_orders(alpha):
    with pytest.raises(DomainError):
        renyi_divergence(np.array([0.5, 0.5]), np.array([0.5, 0.5]), alpha)


def test_max_renyi_is_infinite_order_limit(uniform2, bsc02):
    assert max_renyi(uniform2, bsc02) == pytest.approx(math.log2(1.6))
    assert joint_renyi(uniform2, bsc02, math.inf) == max_renyi(uniform2, bsc02)
    assert joint_renyi(uniform2, bsc02, 2000.0) == pytest.approx(math.log2(1.6), abs=1e-3)


def _random_channel(seed):
    rng = np.random.default_rng(seed)
    k_in, k_out = rng.integers(2, 5, size=2)
    return make_distribution(rng.dirichlet(np.ones(k_in))), channel_from_rows(rng.dirichlet(np.ones(k_out), size=k_in))


@pytest.mark.parametrize("seed", range(8))
def test_joint_renyi_near_one_is_mutual_information(seed):
    qx, ch = _random_channel(seed)
    mi = info_profile(qx, ch).mutual_info_bits
    assert joint_renyi(qx, ch, 1.0 + 1e-6) == pytest.approx(mi, abs=1e-5)


@pytest.mark.parametrize("seed", range(8))
def test_joint_renyi_is_nondecreasing_on_random_channels(seed):
    qx, ch = _random_channel(20 + seed)
    values = np.array([joint_renyi(qx, ch, a) for a in np.geomspace(1.01, 50.0, 40)])
    assert np.all(np.diff(values) >= -1e-12)
    assert values[-1] <= max_renyi(qx, ch) + 1e-12
