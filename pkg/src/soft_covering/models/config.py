from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError, SoftCoverError
from ..probability import bec, bsc, channel_from_rows, make_distribution, noiseless, uniform
from .base import Channel, FiniteDistribution

MASK64 = (1 << 64) - 1


class FixedRate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["fixed"] = "fixed"
    rate_bits: float = Field(gt=0)


class SecondOrderRate(BaseModel):
    """R_n = I + Q^-1(eps) sqrt(V/n) + c log2(n)/n."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["second_order"] = "second_order"
    epsilon_target: float = Field(gt=0, lt=1)
    c: float = Field(default=3.0, gt=2)
    d: float = 1.0
    r: float | None = None


class TrialConfig(BaseModel):
    """Parameters of a Monte Carlo sweep over blocklengths."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    qx: FiniteDistribution
    ch: Channel
    n_list: tuple[int, ...]
    rate: FixedRate | SecondOrderRate = Field(discriminator="kind")
    trials: int = Field(ge=1)
    first_trial: int = Field(default=0, ge=0)
    master_seed: int = Field(default=0, ge=0, le=MASK64)
    delta: float | None = Field(default=None, gt=0)
    epsilon_override: float | None = None
    thresholds: tuple[float, ...] = ()
    max_codewords: int = 2**26
    max_outputs: int = 2**24

    @field_validator("n_list")
    @classmethod
    def _ascending(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ConfigError("n_list must not be empty")
        if any(n < 1 for n in value) or any(b <= a for a, b in zip(value, value[1:])):
            raise ConfigError(f"n_list must be positive and strictly ascending, got {list(value)}")
        return value


class GaussianSetup(BaseModel):
    """Synthesis of N(0, (snr + 1) noise_var) by adding N(0, noise_var) noise to codewords."""

    model_config = ConfigDict(frozen=True)

    snr: float = Field(gt=0)
    dim: Literal[1, 2] = 1
    b: int = Field(ge=1)
    noise_var: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0, le=MASK64)
    grid_points: int | None = Field(default=None, ge=64)

    @property
    def input_var(self) -> float:
        return self.snr * self.noise_var

    @property
    def target_var(self) -> float:
        return (self.snr + 1.0) * self.noise_var

    @property
    def codebook_size(self) -> int:
        return self.b**self.dim

    @property
    def points(self) -> int:
        if self.grid_points is not None:
            return self.grid_points
        return 4097 if self.dim == 1 else 513


class ChannelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_dist: list[float] | None = None
    channel_rows: list[list[float]]


class RunConfig(BaseModel):
    """Everything a CLI invocation may set, from a config file and/or flags."""

    model_config = ConfigDict(extra="forbid")

    channel: str | ChannelSpec | None = None
    input_dist: list[float] | None = None
    # exponent / second-order queries
    rate: float | None = None
    delta: float | None = None
    n: int | None = Field(default=None, ge=1)
    epsilon: float | None = None
    c: float = 3.0
    d: float = 1.0
    r: float | None = None
    # simulate
    n_list: list[int] | None = None
    trials: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0, le=MASK64)
    second_order: bool = False
    epsilon_override: float | None = None
    thresholds: list[float] = Field(default_factory=list)
    max_codewords: int = Field(default=2**26, ge=1)
    max_outputs: int = Field(default=2**24, ge=1)
    # gaussian
    snr: float = 15.0
    dim: Literal[1, 2] = 1
    b: int = 5
    noise_var: float = 1.0
    grid_points: int | None = None
    optimize: bool = False
    max_iters: int = Field(default=500, ge=0)
    tol: float = Field(default=1e-4, gt=0)

    threads: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _single_input_dist(self) -> "RunConfig":
        if isinstance(self.channel, ChannelSpec) and self.input_dist and self.channel.input_dist:
            raise ConfigError("input_dist given both at top level and inside the channel spec")
        return self

    def resolve_channel(self) -> tuple[FiniteDistribution, Channel]:
        if self.channel is None:
            raise ConfigError("a channel spec is required (e.g. bsc:0.11)")
        try:
            return parse_channel(self.channel, self.input_dist)
        except SoftCoverError:
            raise
        except (ValueError, TypeError) as e:
            raise ConfigError(f"invalid channel spec {self.channel!r}: {e}") from e

    def trial_config(self) -> TrialConfig:
        qx, ch = self.resolve_channel()
        if not self.n_list:
            raise ConfigError("simulate needs n_list")
        if self.second_order and self.epsilon is None:
            raise ConfigError("second-order sweeps need epsilon (the TV target)")
        if not self.second_order and self.rate is None:
            raise ConfigError("fixed-rate sweeps need rate")
        try:
            rate: FixedRate | SecondOrderRate
            if self.second_order:
                rate = SecondOrderRate(epsilon_target=self.epsilon, c=self.c, d=self.d, r=self.r)
            else:
                rate = FixedRate(rate_bits=self.rate)
            return TrialConfig(
                qx=qx,
                ch=ch,
                n_list=tuple(self.n_list),
                rate=rate,
                trials=self.trials,
                master_seed=self.seed,
                delta=self.delta,
                epsilon_override=self.epsilon_override,
                thresholds=tuple(self.thresholds),
                max_codewords=self.max_codewords,
                max_outputs=self.max_outputs,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid sweep parameters: {e}") from e

    def gaussian_setup(self) -> GaussianSetup:
        try:
            return GaussianSetup(
                snr=self.snr,
                dim=self.dim,
                b=self.b,
                noise_var=self.noise_var,
                seed=self.seed,
                grid_points=self.grid_points,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid gaussian setup: {e}") from e


def parse_channel(
    spec: str | ChannelSpec | dict[str, Any], input_dist: list[float] | None = None
) -> tuple[FiniteDistribution, Channel]:
    """Resolve ``bsc:p``, ``bec:p``, ``noiseless:k`` or an explicit row spec.

    The input distribution defaults to uniform.
    """
    if isinstance(spec, dict):
        spec = ChannelSpec.model_validate(spec)
    if isinstance(spec, ChannelSpec):
        ch = channel_from_rows(spec.channel_rows)
        input_dist = input_dist or spec.input_dist
    else:
        name, _, arg = spec.partition(":")
        if name == "bsc" and arg:
            ch = bsc(float(arg))
        elif name == "bec" and arg:
            ch = bec(float(arg))
        elif name == "noiseless" and arg:
            ch = noiseless(int(arg))
        else:
            raise ConfigError(f"unknown channel shorthand {spec!r}; use bsc:p, bec:p or noiseless:k")
    qx = make_distribution(input_dist) if input_dist else uniform(ch.input.size)
    if qx.size != ch.input.size:
        raise ConfigError(
            f"input distribution has {qx.size} entries, channel has {ch.input.size} inputs"
        )
    return qx, ch


def load_run_config(path: str | Path | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Merge a YAML/JSON config file with flag overrides and validate once.

    Flags whose value is ``None`` do not override the file.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a mapping")
        data.update(loaded or {})
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
