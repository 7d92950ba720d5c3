from functools import cached_property
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import LengthMismatchError
from .base import Alphabet, SequenceIndex


class InfoProfile(BaseModel):
    """Moments of the information density under Q_{X,Y}, in bits."""

    model_config = ConfigDict(frozen=True)

    mutual_info_bits: float = Field(ge=0)
    dispersion: float = Field(ge=0)
    third_abs_moment: float = Field(ge=0)


class ExponentResult(BaseModel):
    """Fixed-rate exponent gamma_delta with the alpha, epsilon and beta that attain it.

    ``alpha_star`` is ``"boundary"`` when the supremum is only approached as
    alpha grows without bound. The blocklength dependent fields are filled
    only when a blocklength was supplied.
    """

    model_config = ConfigDict(frozen=True)

    rate_bits: float
    delta: float
    mutual_info_bits: float
    gamma_delta: float = Field(ge=0)
    alpha_star: float | Literal["boundary"]
    epsilon_star: float
    beta: float
    n: int | None = None
    tv_bound_log2: float | None = None
    failure_log: float | None = None
    vacuous: bool | None = None

    @property
    def tv_threshold(self) -> float | None:
        if self.tv_bound_log2 is None:
            return None
        return float(np.exp2(self.tv_bound_log2))


class Theorem1Bound(BaseModel):
    """Threshold and failure probability of Theorem 1 at one blocklength.

    Log values are natural logs. ``atypical_term_log`` and ``typical_term_log``
    are the two union-bound terms; their sum never exceeds ``failure_prob_log``.
    """

    model_config = ConfigDict(frozen=True)

    n: int
    gamma_delta: float
    beta: float
    epsilon: float
    tv_threshold: float
    failure_prob_log: float
    vacuous: bool
    atypical_term_log: float
    typical_term_log: float
    p2_limit: float
    d1_limit: float


class SecondOrderPlan(BaseModel):
    """Rate, slack and failure bound at one blocklength for a second-order rate."""

    model_config = ConfigDict(frozen=True)

    epsilon_target: float = Field(gt=0, lt=1)
    c: float
    d: float
    r: float
    n: int = Field(ge=1)
    mutual_info_bits: float
    qinv: float
    rate: float
    slack: float
    mu_n: float
    failure_log: float
    vacuous: bool
    p2_limit: float
    d1_limit: float
    tv_bound: float


class Codebook(BaseModel):
    """M codewords of length n over the input alphabet, stored as an M x n symbol matrix."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    rate_bits: float
    input_size: int = Field(ge=1)
    symbols: np.ndarray
    seed: int | None = None

    @field_validator("symbols", mode="before")
    @classmethod
    def _validate_symbols(cls, value: Any) -> np.ndarray:
        symbols = np.array(value, dtype=np.int64)
        if symbols.ndim != 2 or symbols.shape[0] < 1:
            raise LengthMismatchError("codebook needs at least one codeword of shape (M, n)")
        symbols.setflags(write=False)
        return symbols

    @property
    def num_codewords(self) -> int:
        return self.symbols.shape[0]

    def word(self, m: int) -> SequenceIndex:
        return SequenceIndex.from_symbols(
            self.symbols[m].tolist(), Alphabet(size=self.input_size)
        )

    @cached_property
    def distinct_words(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct codewords and their multiplicities."""
        words, counts = np.unique(self.symbols, axis=0, return_counts=True)
        return words, counts


class SoftCoverReport(BaseModel):
    """Measured soft-covering quantities of one codebook."""

    model_config = ConfigDict(frozen=True)

    tv: float = Field(ge=0, le=1)
    p2_mass: float = Field(ge=0, le=1)
    d1_max: float = Field(ge=0)
    pos_part_d1: float = Field(ge=0)
    epsilon_used: float


class AtypicalityResult(BaseModel):
    """Exact and Chernoff-bounded probability of the complement of A_eps."""

    model_config = ConfigDict(frozen=True)

    n: int
    epsilon: float
    exact_prob: float = Field(ge=0, le=1)
    chernoff_log2: float = Field(le=0)
    chernoff_alpha: float | None = None


class TailEstimate(BaseModel):
    """Empirical P(TV > threshold) with its binomial standard error."""

    model_config = ConfigDict(frozen=True)

    threshold: float
    p_hat: float = Field(ge=0, le=1)
    stderr: float = Field(ge=0)


class DecayFit(BaseModel):
    """Least-squares decay rate of log2(median TV) in bits per symbol."""

    model_config = ConfigDict(frozen=True)

    slope: float
    stderr: float
    used_n: tuple[int, ...]
    excluded_n: tuple[int, ...] = ()


class TrialRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    trial: int
    seed: int
    rate_bits: float
    num_codewords: int
    report: SoftCoverReport


class BlocklengthSummary(BaseModel):
    """Aggregates of all trials at one blocklength, next to the theorem's prediction.

    ``theorem_threshold`` is 3 * 2^(-n gamma_delta) for fixed rates and the TV
    target for second-order rates; ``good_set_fraction`` counts codebooks
    inside the set the union-bound argument keeps. The theorem fields are
    None when the rate does not exceed I(X;Y) + delta.
    """

    model_config = ConfigDict(frozen=True)

    n: int
    rate_bits: float
    num_codewords: int
    epsilon_used: float
    tvs: tuple[float, ...]
    median_tv: float
    tails: tuple[TailEstimate, ...]
    theorem_threshold: float | None = None
    theorem_tail: TailEstimate | None = None
    failure_prob_log: float | None = None
    vacuous: bool = True
    good_set_fraction: float | None = None


class DensityGrid(BaseModel):
    """Plot-ready mixture (and, in 1-D, target) densities on a uniform grid.

    In 2-D ``mixture`` is indexed ``[i, j]`` for ``(axis[i], axis[j])``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: Literal[1, 2]
    axis: np.ndarray
    step: float = Field(gt=0)
    mixture: np.ndarray
    target: np.ndarray | None = None
    codewords: np.ndarray

    @field_validator("mixture", "target")
    @classmethod
    def _nonnegative(cls, value: np.ndarray | None) -> np.ndarray | None:
        if value is not None and np.any(value < 0):
            raise ValueError("densities must be nonnegative")
        return value
