"""Finite-alphabet distributions, channels, memoryless extensions and total variation."""

from collections.abc import Sequence
from functools import reduce

import numpy as np

from .errors import (
    AlphabetMismatchError,
    DomainError,
    LengthMismatchError,
    NegativeWeightError,
    ZeroMassError,
)
from .models.base import Alphabet, Channel, FiniteDistribution, SequenceIndex


def make_distribution(weights: Sequence[float] | np.ndarray) -> FiniteDistribution:
    """Normalize nonnegative weights into a distribution.

    Raises:
        NegativeWeightError: If any weight is negative.
        ZeroMassError: If all weights are zero.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise LengthMismatchError("weights must be a nonempty vector")
    if np.any(w < 0):
        raise NegativeWeightError(f"negative weight in {w.tolist()}")
    total = w.sum()
    if total <= 0:
        raise ZeroMassError("all weights are zero")
    return FiniteDistribution.from_probs(w / total)


def uniform(k: int) -> FiniteDistribution:
    return FiniteDistribution.from_probs(np.full(k, 1.0 / k))


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"crossover probability {p} outside [0, 1]")
    return Channel.from_rows([[1.0 - p, p], [p, 1.0 - p]])


def bec(p: float) -> Channel:
    """Binary erasure channel; output symbols are 0, e, 1."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"erasure probability {p} outside [0, 1]")
    return Channel(
        input=Alphabet(size=2),
        output=Alphabet(size=3, labels=("0", "e", "1")),
        rows=[[1.0 - p, p, 0.0], [0.0, p, 1.0 - p]],
    )


def noiseless(k: int) -> Channel:
    if k < 1:
        raise DomainError(f"alphabet size {k} must be positive")
    return Channel.from_rows(np.eye(k))


def channel_from_rows(rows: Sequence[Sequence[float]] | np.ndarray) -> Channel:
    return Channel.from_rows(rows)


def _require_input(qx: FiniteDistribution, ch: Channel) -> None:
    if qx.size != ch.input.size:
        raise AlphabetMismatchError(
            f"input distribution has {qx.size} symbols, channel expects {ch.input.size}"
        )


def output_distribution(qx: FiniteDistribution, ch: Channel) -> FiniteDistribution:
    """Q_Y(y) = sum_x Q_X(x) Q_{Y|X}(y|x)."""
    _require_input(qx, ch)
    qy = qx.probs @ ch.rows
    return FiniteDistribution(alphabet=ch.output, probs=qy / qy.sum())


def joint_distribution(qx: FiniteDistribution, ch: Channel) -> FiniteDistribution:
    """Q_{X,Y} flattened row-major by x then y."""
    _require_input(qx, ch)
    joint = (qx.probs[:, None] * ch.rows).ravel()
    labels = tuple(
        f"{ch.input.label(x)},{ch.output.label(y)}"
        for x in range(ch.input.size)
        for y in range(ch.output.size)
    )
    return FiniteDistribution(alphabet=Alphabet(size=joint.size, labels=labels), probs=joint)


def product_distribution(qx: FiniteDistribution, qy: FiniteDistribution) -> FiniteDistribution:
    """Q_X Q_Y flattened in the same order as :func:`joint_distribution`."""
    return FiniteDistribution.from_probs(np.outer(qx.probs, qy.probs).ravel())


def sequence_pmf(dist: FiniteDistribution, seq: SequenceIndex) -> float:
    if seq.alphabet.size != dist.size:
        raise AlphabetMismatchError(
            f"sequence over {seq.alphabet.size} symbols, distribution over {dist.size}"
        )
    return float(np.prod(dist.probs[list(seq.symbols)]))


def product_pmf(dist: FiniteDistribution, n: int) -> np.ndarray:
    """The n-fold memoryless extension as a dense vector in SequenceIndex order."""
    return reduce(np.kron, [dist.probs] * n, np.ones(1))


def sequence_symbols(n: int, k: int) -> np.ndarray:
    """All k^n sequences as a (k^n, n) symbol matrix, row i decoding index i."""
    grid = np.unravel_index(np.arange(k**n), (k,) * n)
    return np.stack(grid, axis=1)


def _as_vectors(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise LengthMismatchError(f"vectors have shapes {p.shape} and {q.shape}")
    return p, q


def total_variation(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray) -> float:
    """Half the L1 distance, clamped to [0, 1]."""
    p, q = _as_vectors(p, q)
    return float(np.clip(0.5 * np.abs(p - q).sum(), 0.0, 1.0))


def positive_part_tv(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray) -> float:
    """sum_i [p_i - q_i]_+, equal to total variation for probability vectors."""
    p, q = _as_vectors(p, q)
    return float(np.clip(np.maximum(p - q, 0.0).sum(), 0.0, 1.0))
