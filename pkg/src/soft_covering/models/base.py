from collections.abc import Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from ..errors import LengthMismatchError, NegativeWeightError, NotNormalizedError

# Sums within this distance of 1 are renormalized silently; config files carry decimal literals.
INGEST_TOLERANCE = 1e-9


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _normalized_rows(rows: np.ndarray, what: str) -> np.ndarray:
    if np.any(rows < 0) or not np.all(np.isfinite(rows)):
        raise NegativeWeightError(f"{what} has negative or non-finite entries")
    totals = rows.sum(axis=-1, keepdims=True)
    if np.any(np.abs(totals - 1.0) > INGEST_TOLERANCE):
        raise NotNormalizedError(
            f"{what} does not sum to 1 (sums: {np.ravel(totals).tolist()})"
        )
    return rows / totals


class Alphabet(BaseModel):
    """Finite symbol set; symbols are the integers ``0 .. size - 1``."""

    model_config = ConfigDict(frozen=True)

    size: int = Field(ge=1)
    labels: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def _check_labels(self) -> "Alphabet":
        if self.labels is not None and len(self.labels) != self.size:
            raise LengthMismatchError(
                f"{len(self.labels)} labels given for an alphabet of size {self.size}"
            )
        return self

    def label(self, symbol: int) -> str:
        return self.labels[symbol] if self.labels else str(symbol)


class FiniteDistribution(BaseModel):
    """Probability vector over a finite alphabet.

    Holds Q_X, Q_Y and joint distributions (flattened row-major over X x Y).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphabet: Alphabet
    probs: np.ndarray

    @field_validator("probs", mode="before")
    @classmethod
    def _validate_probs(cls, value: Any, info: ValidationInfo) -> np.ndarray:
        probs = np.array(value, dtype=np.float64)
        if probs.ndim != 1:
            raise LengthMismatchError("probability vector must be one-dimensional")
        alphabet = info.data.get("alphabet")
        if alphabet is not None and probs.size != alphabet.size:
            raise LengthMismatchError(
                f"{probs.size} probabilities for an alphabet of size {alphabet.size}"
            )
        return _readonly(_normalized_rows(probs, "distribution"))

    @classmethod
    def from_probs(
        cls, probs: Sequence[float] | np.ndarray, labels: Sequence[str] | None = None
    ) -> "FiniteDistribution":
        size = len(probs)
        alphabet = Alphabet(size=size, labels=tuple(labels) if labels else None)
        return cls(alphabet=alphabet, probs=probs)

    @property
    def size(self) -> int:
        return self.alphabet.size


class Channel(BaseModel):
    """Row-stochastic matrix with ``rows[x][y] = Q_{Y|X}(y|x)``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    input: Alphabet
    output: Alphabet
    rows: np.ndarray

    @field_validator("rows", mode="before")
    @classmethod
    def _validate_rows(cls, value: Any, info: ValidationInfo) -> np.ndarray:
        rows = np.array(value, dtype=np.float64)
        if rows.ndim != 2:
            raise LengthMismatchError("channel rows must form a matrix")
        source, target = info.data.get("input"), info.data.get("output")
        expected = (source.size, target.size) if source and target else rows.shape
        if rows.shape != expected:
            raise LengthMismatchError(f"channel matrix has shape {rows.shape}, expected {expected}")
        return _readonly(_normalized_rows(rows, "channel row"))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]] | np.ndarray) -> "Channel":
        matrix = np.asarray(rows, dtype=np.float64)
        if matrix.ndim != 2:
            raise LengthMismatchError("channel rows must form a matrix")
        return cls(
            input=Alphabet(size=matrix.shape[0]),
            output=Alphabet(size=matrix.shape[1]),
            rows=matrix,
        )

    def row(self, x: int) -> FiniteDistribution:
        return FiniteDistribution(alphabet=self.output, probs=self.rows[x])


class SequenceIndex(BaseModel):
    """A length-n sequence encoded base ``alphabet.size``, first symbol most significant.

    This is the order produced by ``numpy.kron`` of per-symbol vectors, so
    entry ``value`` of a product pmf vector is the probability of this sequence.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    alphabet: Alphabet
    value: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_range(self) -> "SequenceIndex":
        if self.value >= self.alphabet.size**self.n:
            raise LengthMismatchError(
                f"index {self.value} out of range for {self.alphabet.size}^{self.n} sequences"
            )
        return self

    @classmethod
    def from_symbols(cls, symbols: Sequence[int], alphabet: Alphabet) -> "SequenceIndex":
        value = 0
        for symbol in symbols:
            if not 0 <= symbol < alphabet.size:
                raise LengthMismatchError(f"symbol {symbol} outside alphabet of size {alphabet.size}")
            value = value * alphabet.size + int(symbol)
        return cls(n=len(symbols), alphabet=alphabet, value=value)

    @property
    def symbols(self) -> tuple[int, ...]:
        k = self.alphabet.size
        out = []
        rest = self.value
        for _ in range(self.n):
            rest, symbol = divmod(rest, k)
            out.append(symbol)
        return tuple(reversed(out))
