"""Random codebooks, their exact induced output distribution, and the typical-set split.

Output sequences are never materialized as symbol lists. Per-codeword output
pmfs factor over a left and right half of the block, so the induced
distribution is a sum of outer products and is computed as one matrix
product per chunk of distinct codewords.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from .errors import (
    BoundViolationError,
    DecompositionMismatchError,
    DomainError,
    RateTooLowError,
    SizeOverflowError,
    SpaceTooLargeError,
    ZeroDispersionError,
    ZeroTargetMassError,
)
from .exponents import MIN_DISPERSION, beta_exponent, gamma_delta, qfunc
from .info_measures import density_matrix, info_profile, joint_renyi
from .models.base import Channel, FiniteDistribution
from .models.results import AtypicalityResult, Codebook, InfoProfile, SoftCoverReport
from .probability import output_distribution, product_pmf, total_variation

logger = logging.getLogger(__name__)

DEFAULT_MAX_CODEWORDS = 2**26
DEFAULT_MAX_OUTPUTS = 2**24
# Sums of information densities within this distance of n(I + eps) count as typical.
TIE_TOLERANCE = 1e-12
SUPPORT_MERGE_TOLERANCE = 1e-12
DECOMPOSITION_TOLERANCE = 1e-12
CHUNK_ELEMENTS = 2**21
CHERNOFF_ALPHAS = 1.0 + np.logspace(-4, 3, 300)


class TypicalSplit(NamedTuple):
    """Dense vectors over Y^n: induced pmf, its typical and atypical parts, and Q_{Y^n}."""

    induced: np.ndarray
    typical: np.ndarray
    atypical: np.ndarray
    target: np.ndarray


def sample_codebook(
    qx: FiniteDistribution,
    n: int,
    rate_bits: float,
    seed: int | None,
    *,
    max_codewords: int = DEFAULT_MAX_CODEWORDS,
) -> Codebook:
    """Draw round(2^(n R)) codewords with i.i.d. Q_X symbols.

    Raises:
        DomainError: If ``rate_bits`` or ``n`` is not positive.
        SizeOverflowError: If the codebook would exceed ``max_codewords``.
    """
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    if not rate_bits > 0:
        raise DomainError(f"rate must be positive, got {rate_bits}")
    log2_size = n * rate_bits
    if log2_size > math.log2(max_codewords) + 1:
        raise SizeOverflowError(f"2^{log2_size:.4g} codewords exceed the cap {max_codewords}", n=n)
    num_codewords = max(1, round(2.0**log2_size))
    if num_codewords > max_codewords:
        raise SizeOverflowError(f"{num_codewords} codewords exceed the cap {max_codewords}", n=n)
    rng = np.random.default_rng(seed)
    symbols = rng.choice(qx.size, size=(num_codewords, n), p=qx.probs)
    return Codebook(n=n, rate_bits=rate_bits, input_size=qx.size, symbols=symbols, seed=seed)


def codebook_from_symbols(symbols: np.ndarray, input_size: int, seed: int | None = None) -> Codebook:
    """Wrap an explicit M x n symbol matrix; the rate is log2(M) / n."""
    matrix = np.atleast_2d(np.asarray(symbols, dtype=np.int64))
    if np.any(matrix < 0) or np.any(matrix >= input_size):
        raise DomainError(f"codeword symbols must lie in [0, {input_size})")
    num_codewords, n = matrix.shape
    return Codebook(
        n=n,
        rate_bits=math.log2(num_codewords) / n,
        input_size=input_size,
        symbols=matrix,
        seed=seed,
    )


def _check_space(output_size: int, n: int, max_outputs: int) -> int:
    space = output_size**n
    if space > max_outputs:
        raise SpaceTooLargeError(
            f"|Y|^n = {output_size}^{n} = {space} exceeds the cap {max_outputs}", n=n
        )
    return space


def _kron_rows(table: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Row m is the Kronecker product of ``table[symbols[m, i]]`` over i."""
    out = np.ones((symbols.shape[0], 1), dtype=table.dtype)
    for column in symbols.T:
        out = (out[:, :, None] * table[column][:, None, :]).reshape(symbols.shape[0], -1)
    return out


def _chunks(size: int, width: int):
    step = max(1, CHUNK_ELEMENTS // max(width, 1))
    for start in range(0, size, step):
        yield slice(start, min(start + step, size))


def induced_distribution(
    cb: Codebook, ch: Channel, *, max_outputs: int = DEFAULT_MAX_OUTPUTS
) -> np.ndarray:
    """P_{Y^n|C}(y^n) = (1/M) sum_m prod_i Q_{Y|X}(y_i | x_i(m)) as a dense vector.

    Raises:
        SpaceTooLargeError: If |Y|^n exceeds ``max_outputs``.
    """
    _check_space(ch.output.size, cb.n, max_outputs)
    words, counts = cb.distinct_words
    half = cb.n // 2
    weights = counts / cb.num_codewords
    left_size, right_size = ch.output.size**half, ch.output.size ** (cb.n - half)
    induced = np.zeros((left_size, right_size))
    for part in _chunks(words.shape[0], max(left_size, right_size)):
        left = _kron_rows(ch.rows, words[part, :half]) * weights[part, None]
        right = _kron_rows(ch.rows, words[part, half:])
        induced += left.T @ right
    return induced.ravel()


def typical_split(
    cb: Codebook,
    qx: FiniteDistribution,
    ch: Channel,
    epsilon: float,
    *,
    max_outputs: int = DEFAULT_MAX_OUTPUTS,
) -> TypicalSplit:
    """Split P_{Y^n|C} by joint typicality of (codeword, y^n).

    A pair is typical when the summed information density is at most
    n (I(X;Y) + epsilon). The typical part is P_{C,1}, the rest P_{C,2}.
    """
    n = cb.n
    space = _check_space(ch.output.size, n, max_outputs)
    mi = info_profile(qx, ch).mutual_info_bits
    threshold = n * (mi + epsilon) + TIE_TOLERANCE
    qy = output_distribution(qx, ch)
    target = product_pmf(qy, n)
    # hand-built codebooks may use symbols outside supp(Q_X); keep their densities defined
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(ch.rows > 0, np.log2(ch.rows) - np.log2(qy.probs)[None, :], -np.inf)

    words, counts = cb.distinct_words
    weights = counts / cb.num_codewords
    half = n // 2
    typical = np.zeros(space)
    atypical = np.zeros(space)
    for part in _chunks(words.shape[0], space):
        left_w = _kron_rows(ch.rows, words[part, :half])
        right_w = _kron_rows(ch.rows, words[part, half:])
        likelihood = (left_w[:, :, None] * right_w[:, None, :]).reshape(left_w.shape[0], space)
        left_i = _sum_rows(dens, words[part, :half])
        right_i = _sum_rows(dens, words[part, half:])
        with np.errstate(invalid="ignore"):
            density_sum = (left_i[:, :, None] + right_i[:, None, :]).reshape(left_w.shape[0], space)
        inside = density_sum <= threshold
        typical += weights[part] @ np.where(inside, likelihood, 0.0)
        atypical += weights[part] @ np.where(inside, 0.0, likelihood)

    induced = induced_distribution(cb, ch, max_outputs=max_outputs)
    mismatch = np.max(np.abs(typical + atypical - induced))
    if mismatch > DECOMPOSITION_TOLERANCE:
        raise DecompositionMismatchError(f"P_C1 + P_C2 deviates from P by {mismatch:.3g}")
    if np.any((target <= 0) & (induced > 0)):
        raise ZeroTargetMassError("induced distribution charges an output sequence with Q_{Y^n} = 0")
    return TypicalSplit(induced=induced, typical=typical, atypical=atypical, target=target)


def _sum_rows(table: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Row m is the outer sum of ``table[symbols[m, i]]`` over i (log-domain Kronecker)."""
    out = np.zeros((symbols.shape[0], 1), dtype=table.dtype)
    for column in symbols.T:
        out = (out[:, :, None] + table[column][:, None, :]).reshape(symbols.shape[0], -1)
    return out


def default_typicality_slack(
    qx: FiniteDistribution, ch: Channel, rate: float, delta: float | None = None
) -> float:
    """The slack eps_{alpha*, delta} the exponent optimizer selects.

    ``delta`` defaults to half the gap R - I(X;Y).
    """
    mi = info_profile(qx, ch).mutual_info_bits
    if rate <= mi:
        raise RateTooLowError(f"rate {rate:.6g} does not exceed I(X;Y) = {mi:.6g} bits", mi)
    if delta is None:
        delta = 0.5 * (rate - mi)
    return gamma_delta(qx, ch, rate, delta).epsilon_star


def soft_cover_report(
    cb: Codebook,
    qx: FiniteDistribution,
    ch: Channel,
    epsilon: float | None = None,
    *,
    delta: float | None = None,
    max_outputs: int = DEFAULT_MAX_OUTPUTS,
) -> SoftCoverReport:
    """Total variation to Q_{Y^n} and the typical-set decomposition terms of one codebook."""
    if epsilon is None:
        epsilon = default_typicality_slack(qx, ch, cb.rate_bits, delta)
    split = typical_split(cb, qx, ch, epsilon, max_outputs=max_outputs)
    positive = split.target > 0
    d1 = np.zeros_like(split.typical)
    d1[positive] = split.typical[positive] / split.target[positive]
    return SoftCoverReport(
        tv=total_variation(split.induced, split.target),
        p2_mass=float(np.clip(split.atypical.sum(), 0.0, 1.0)),
        d1_max=float(d1.max()),
        pos_part_d1=float(np.maximum(split.typical - split.target, 0.0).sum()),
        epsilon_used=epsilon,
    )


def in_good_set(report: SoftCoverReport, p2_limit: float, d1_limit: float) -> bool:
    """Whether a codebook lies in the set the union-bound argument keeps."""
    return report.p2_mass < p2_limit and report.d1_max < d1_limit


def _merge_support(values: np.ndarray, probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(values, kind="stable")
    values, probs = values[order], probs[order]
    starts = np.concatenate(([0], np.nonzero(np.diff(values) > SUPPORT_MERGE_TOLERANCE)[0] + 1))
    return values[starts], np.add.reduceat(probs, starts)


def density_sum_distribution(
    qx: FiniteDistribution, ch: Channel, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Support and pmf of sum_i iota(X_i; Y_i) under Q_{X,Y}^n, by repeated convolution."""
    joint = qx.probs[:, None] * ch.rows
    support = joint > 0
    base_values, base_probs = _merge_support(density_matrix(qx, ch)[support], joint[support])
    values, probs = base_values, base_probs
    for _ in range(n - 1):
        values, probs = _merge_support(
            (values[:, None] + base_values[None, :]).ravel(),
            (probs[:, None] * base_probs[None, :]).ravel(),
        )
    return values, probs


def atypical_probability(
    qx: FiniteDistribution, ch: Channel, n: int, epsilon: float
) -> AtypicalityResult:
    """Exact P_Q(sum iota > n(I + eps)) and the best Chernoff exponent on an alpha grid."""
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    mi = info_profile(qx, ch).mutual_info_bits
    values, probs = density_sum_distribution(qx, ch, n)
    exact = float(np.clip(probs[values > n * (mi + epsilon) + TIE_TOLERANCE].sum(), 0.0, 1.0))

    betas = np.array(
        [beta_exponent(mi, joint_renyi(qx, ch, a), a, epsilon) for a in CHERNOFF_ALPHAS]
    )
    best = int(np.argmax(betas))
    if betas[best] > 0:
        chernoff_log2, alpha = -n * float(betas[best]), float(CHERNOFF_ALPHAS[best])
    else:
        chernoff_log2, alpha = 0.0, None
    return AtypicalityResult(
        n=n, epsilon=epsilon, exact_prob=exact, chernoff_log2=chernoff_log2, chernoff_alpha=alpha
    )


def berry_esseen_check(
    profile: InfoProfile,
    n: int,
    epsilon: float,
    *,
    qx: FiniteDistribution | None = None,
    ch: Channel | None = None,
    exact_prob: float | None = None,
) -> float:
    """Q(eps sqrt(n) / sqrt(V)) + rho / (V^1.5 sqrt(n)).

    With ``qx`` and ``ch`` the exact atypicality probability is computed by
    :func:`atypical_probability` and checked against the bound; a precomputed
    ``exact_prob`` is checked the same way.

    Raises:
        ZeroDispersionError: If V <= 1e-12.
        DomainError: If only one of ``qx`` and ``ch`` is given.
        BoundViolationError: If the exact probability exceeds the bound.
    """
    if (qx is None) != (ch is None):
        raise DomainError("qx and ch must be given together")
    V = profile.dispersion
    if V <= MIN_DISPERSION:
        raise ZeroDispersionError(f"dispersion V = {V:.3g}; Berry-Esseen bound undefined")
    root_n = math.sqrt(n)
    bound = qfunc(epsilon * root_n / math.sqrt(V)) + profile.third_abs_moment / (V**1.5 * root_n)
    if exact_prob is None and qx is not None and ch is not None:
        exact_prob = atypical_probability(qx, ch, n, epsilon).exact_prob
    if exact_prob is not None and exact_prob > bound + DECOMPOSITION_TOLERANCE:
        raise BoundViolationError(
            f"atypicality probability {exact_prob:.6g} exceeds Berry-Esseen bound {bound:.6g}"
        )
    return bound
