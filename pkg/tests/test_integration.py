"""Desk-scale acceptance runs; minutes of CPU, so opt in with SOFTCOVER_ACCEPTANCE=1."""

import itertools
import math
import os

import numpy as np
import pytest

from soft_covering.codebook import (
    atypical_probability,
    berry_esseen_check,
    codebook_from_symbols,
    sample_codebook,
    soft_cover_report,
    typical_split,
)
from soft_covering.exponents import gamma_delta
from soft_covering.gaussian import (
    gaussian_mutual_information,
    mixture_tv,
    optimize_codewords,
    quantile_codewords,
    sample_gaussian_codebook,
)
from soft_covering.info_measures import info_profile
from soft_covering.models.config import FixedRate, GaussianSetup, TrialConfig
from soft_covering.montecarlo import run_sweep, trial_seed
from soft_covering.probability import bsc, channel_from_rows, make_distribution, positive_part_tv, uniform

pytestmark = [
    pytest.mark.acceptance,
    pytest.mark.skipif(
        not os.getenv("SOFTCOVER_ACCEPTANCE"),
        reason="SOFTCOVER_ACCEPTANCE not set, skipping desk-scale acceptance runs",
    ),
]


def test_forced_identities_on_random_channels():
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        k_in, k_out = rng.integers(2, 5, size=2)
        qx = make_distribution(rng.dirichlet(np.ones(k_in)))
        ch = channel_from_rows(rng.dirichlet(np.ones(k_out), size=k_in))
        mi = info_profile(qx, ch).mutual_info_bits
        delta = float(rng.uniform(0.01, 0.5))
        rate = mi + delta + float(rng.uniform(0.01, 2.0))

        result = gamma_delta(qx, ch, rate, delta)

        assert abs(result.beta - result.gamma_delta) <= 1e-9
        assert abs(rate - mi - result.epsilon_star - 2 * result.beta - delta) <= 1e-9


def _median_tv(setup, seeds=50):
    return float(
        np.median(
            [mixture_tv(sample_gaussian_codebook(setup.model_copy(update={"seed": s})), setup) for s in range(seeds)]
        )
    )


def test_gaussian_orderings():
    assert gaussian_mutual_information(15.0) == 2.0
    assert math.log2(5) > 2 and 5 > 2

    b5 = GaussianSetup(snr=15.0, dim=1, b=5)
    b32 = GaussianSetup(snr=15.0, dim=1, b=32)
    b32_2d = GaussianSetup(snr=15.0, dim=2, b=32)

    tv5, tv32, tv32_2d = _median_tv(b5), _median_tv(b32), _median_tv(b32_2d)
    assert tv5 > tv32 > tv32_2d

    optimized = optimize_codewords(quantile_codewords(b5), b5, max_iters=500, tol=1e-4)
    assert mixture_tv(optimized, b5) <= 1.25 * tv32


def test_exponential_decay_of_median_tv():
    qx, ch = uniform(2), bsc(0.2)
    cfg = TrialConfig(
        qx=qx,
        ch=ch,
        n_list=tuple(range(4, 15)),
        rate=FixedRate(rate_bits=0.9),
        trials=200,
        master_seed=1,
        delta=0.05,
    )
    result = run_sweep(cfg)

    gamma = gamma_delta(qx, ch, 0.9, 0.05).gamma_delta
    assert result.fit is not None
    assert result.fit.slope > 0
    assert result.fit.slope >= gamma - 2 * result.fit.stderr
    assert result.consistency_violations() == []

    medians = [s.median_tv for s in result.per_n]
    inversions = sum(b >= a for a, b in zip(medians, medians[1:]))
    assert inversions <= 1


def test_berry_esseen_grid():
    qx, ch = uniform(2), bsc(0.11)
    profile = info_profile(qx, ch)
    for n, eps in itertools.product((10, 20, 50, 100), (0.02, 0.05, 0.1)):
        exact = atypical_probability(qx, ch, n, eps).exact_prob
        assert exact <= berry_esseen_check(profile, n, eps)


def test_brute_force_codebook_distribution():
    qx, ch = uniform(2), bsc(0.3)
    words = [list(w) for w in itertools.product([0, 1], repeat=2)]
    exact = np.array(
        [
            soft_cover_report(codebook_from_symbols([a, b], 2), qx, ch, epsilon=0.1).tv
            for a, b in itertools.product(words, repeat=2)
        ]
    )

    trials = 100_000
    sampled = np.array(
        [
            soft_cover_report(sample_codebook(qx, 2, 0.5, trial_seed(99, 2, t)), qx, ch, 0.1).tv
            for t in range(trials)
        ]
    )
    levels = np.unique(np.round(exact, 12))
    for threshold in (levels[:-1] + levels[1:]) / 2:
        p = float(np.mean(exact > threshold))
        assert abs(float(np.mean(sampled > threshold)) - p) <= 3 * math.sqrt(p * (1 - p) / trials) + 1e-12


def test_identity_battery():
    qx, ch = uniform(2), bsc(0.2)
    rng = np.random.default_rng(7)
    for index in range(500):
        n = int(rng.integers(1, 9))
        cb = sample_codebook(qx, n, 0.9, seed=index)
        epsilon = float(rng.uniform(0.0, 0.6))
        split = typical_split(cb, qx, ch, epsilon)
        report = soft_cover_report(cb, qx, ch, epsilon)

        assert np.max(np.abs(split.typical + split.atypical - split.induced)) <= 1e-12
        assert abs(report.tv - positive_part_tv(split.induced, split.target)) <= 1e-12
        assert report.tv <= report.pos_part_d1 + report.p2_mass + 1e-12
