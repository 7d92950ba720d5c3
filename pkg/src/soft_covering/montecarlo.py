"""Repeated-trial harness comparing sampled codebooks against the theorem bounds.

Each trial's codebook seed is a pure function of (master_seed, n, trial):

    trial_seed = splitmix64(splitmix64(splitmix64(master_seed) ^ n) ^ trial)

with all arithmetic modulo 2^64. Trials may run in any order or degree of
parallelism; results are assembled sorted by (n, trial).
"""

import logging
import math
import os
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import linregress

from .codebook import in_good_set, sample_codebook, soft_cover_report
from .errors import (
    DegenerateFitError,
    InvalidParameterError,
    InvalidRateError,
    SizeOverflowError,
    SpaceTooLargeError,
    ZeroDispersionError,
)
from .exponents import MU_N_NOTE, second_order_plan, theorem1_bound
from .info_measures import info_profile
from .models.config import MASK64, FixedRate, TrialConfig
from .models.results import BlocklengthSummary, DecayFit, TailEstimate, TrialRecord

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    return splitmix64(splitmix64(splitmix64(master_seed & MASK64) ^ n) ^ trial)


class _BlocklengthPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    rate_bits: float
    num_codewords: int
    epsilon: float
    theorem_threshold: float | None = None
    failure_prob_log: float | None = None
    vacuous: bool = True
    p2_limit: float | None = None
    d1_limit: float | None = None


def _plan(cfg: TrialConfig, n: int) -> _BlocklengthPlan:
    threshold = failure = p2_limit = d1_limit = None
    vacuous = True
    if isinstance(cfg.rate, FixedRate):
        rate = cfg.rate.rate_bits
        mi = info_profile(cfg.qx, cfg.ch).mutual_info_bits
        delta = cfg.delta
        if delta is None and rate <= mi:
            # no bound to compare against; the codebooks are still measured
            logger.warning("rate %.6g does not exceed I(X;Y) = %.6g; theorem bounds skipped", rate, mi)
            epsilon = 0.0
        else:
            bound = theorem1_bound(cfg.qx, cfg.ch, rate, delta or 0.5 * (rate - mi), n)
            epsilon, threshold = bound.epsilon, bound.tv_threshold
            failure, vacuous = bound.failure_prob_log, bound.vacuous
            p2_limit, d1_limit = bound.p2_limit, bound.d1_limit
    else:
        spec = cfg.rate
        try:
            plan = second_order_plan(
                info_profile(cfg.qx, cfg.ch),
                spec.epsilon_target,
                n,
                spec.c,
                spec.d,
                spec.r,
                output_size=cfg.ch.output.size,
            )
        except ZeroDispersionError as e:
            raise InvalidRateError(f"second-order rate needs positive dispersion: {e.message}") from e
        rate, epsilon, threshold = plan.rate, plan.slack, spec.epsilon_target
        failure, vacuous = plan.failure_log, plan.vacuous
        p2_limit, d1_limit = plan.p2_limit, plan.d1_limit
        if rate <= 0:
            raise InvalidRateError(f"second-order rate {rate:.4g} is not positive at n={n}")

    log2_size = n * rate
    if log2_size > math.log2(cfg.max_codewords) + 1 or round(2.0**log2_size) > cfg.max_codewords:
        raise SizeOverflowError(f"2^{log2_size:.4g} codewords exceed the cap at n={n}", n=n)
    if cfg.ch.output.size**n > cfg.max_outputs:
        raise SpaceTooLargeError(f"|Y|^n exceeds the cap at n={n}", n=n)
    return _BlocklengthPlan(
        n=n,
        rate_bits=rate,
        num_codewords=max(1, round(2.0**log2_size)),
        epsilon=cfg.epsilon_override if cfg.epsilon_override is not None else epsilon,
        theorem_threshold=threshold,
        failure_prob_log=failure,
        vacuous=vacuous,
        p2_limit=p2_limit,
        d1_limit=d1_limit,
    )


def _run_trial(cfg: TrialConfig, plan: _BlocklengthPlan, trial: int) -> TrialRecord:
    seed = trial_seed(cfg.master_seed, plan.n, trial)
    cb = sample_codebook(cfg.qx, plan.n, plan.rate_bits, seed, max_codewords=cfg.max_codewords)
    report = soft_cover_report(cb, cfg.qx, cfg.ch, plan.epsilon, max_outputs=cfg.max_outputs)
    logger.debug("n=%d trial=%d tv=%.6g", plan.n, trial, report.tv)
    return TrialRecord(
        n=plan.n,
        trial=trial,
        seed=seed,
        rate_bits=plan.rate_bits,
        num_codewords=cb.num_codewords,
        report=report,
    )


def tail_estimate(tvs: Sequence[float], threshold: float) -> TailEstimate:
    """Fraction of TV values strictly above ``threshold`` and its binomial standard error."""
    values = np.asarray(tvs, dtype=np.float64)
    if values.size == 0:
        raise InvalidParameterError("tail estimate needs at least one trial")
    p_hat = float(np.mean(values > threshold))
    return TailEstimate(
        threshold=threshold,
        p_hat=p_hat,
        stderr=math.sqrt(p_hat * (1.0 - p_hat) / values.size),
    )


def fit_decay(per_n_tvs: Mapping[int, Sequence[float]]) -> DecayFit:
    """Fit log2(median TV) = a - slope * n by ordinary least squares.

    Blocklengths with zero median are excluded and listed in ``excluded_n``.

    Raises:
        DegenerateFitError: If fewer than three blocklengths have positive median.
    """
    used, excluded, logs = [], [], []
    for n in sorted(per_n_tvs):
        median = float(np.median(per_n_tvs[n]))
        if median > 0:
            used.append(n)
            logs.append(math.log2(median))
        else:
            excluded.append(n)
    if excluded:
        logger.warning("median TV is zero at n=%s; excluded from the decay fit", excluded)
    if len(used) < MIN_FIT_POINTS:
        raise DegenerateFitError(
            f"decay fit needs {MIN_FIT_POINTS} blocklengths with positive median TV, "
            f"got {len(used)} (excluded: {excluded})"
        )
    x, y = np.asarray(used, dtype=np.float64), np.asarray(logs)
    fit = linregress(x, y)
    # from residuals: the r-based stderr of linregress is ~1e-9 on an exact line
    residuals = y - (fit.intercept + fit.slope * x)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(residuals**2)) / (len(used) - 2) / sxx)
    return DecayFit(
        slope=-float(fit.slope) + 0.0,
        stderr=stderr,
        used_n=tuple(used),
        excluded_n=tuple(excluded),
    )


class SweepResult(BaseModel):
    """Per-blocklength aggregates, all trial records and the decay fit of one sweep."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: TrialConfig
    records: tuple[TrialRecord, ...]
    per_n: tuple[BlocklengthSummary, ...]
    fit: DecayFit | None = None
    fit_note: str | None = None
    notes: tuple[str, ...] = ()

    def consistency_violations(self) -> list[str]:
        """Cells where the empirical tail exceeds the theorem's failure bound by > 3 stderr."""
        violations = []
        for summary in self.per_n:
            tail = summary.theorem_tail
            if tail is not None and not summary.vacuous:
                allowed = math.exp(summary.failure_prob_log) + 3.0 * tail.stderr
                if tail.p_hat > allowed:
                    violations.append(
                        f"n={summary.n}: P(TV > {tail.threshold:.4g}) = {tail.p_hat:.4g} "
                        f"exceeds failure bound {math.exp(summary.failure_prob_log):.4g}"
                    )
        if not isinstance(self.config.rate, FixedRate) and self.per_n:
            last = self.per_n[-1]
            target = self.config.rate.epsilon_target
            if last.theorem_tail.p_hat > target + 3.0 * last.theorem_tail.stderr:
                violations.append(
                    f"n={last.n}: P(TV > {target:.4g}) = {last.theorem_tail.p_hat:.4g} "
                    f"exceeds the target {target:.4g}"
                )
        return violations


def _summarize(cfg: TrialConfig, plans: Sequence[_BlocklengthPlan], records: Sequence[TrialRecord]) -> SweepResult:
    ordered = tuple(sorted(records, key=lambda rec: (rec.n, rec.trial)))
    per_n = []
    tvs_by_n = {}
    for plan in plans:
        rows = [rec for rec in ordered if rec.n == plan.n]
        tvs = sorted(rec.report.tv for rec in rows)
        tvs_by_n[plan.n] = tvs
        has_bound = plan.theorem_threshold is not None
        good_set_fraction = None
        if has_bound:
            inside = sum(in_good_set(rec.report, plan.p2_limit, plan.d1_limit) for rec in rows)
            good_set_fraction = inside / len(rows)
        per_n.append(
            BlocklengthSummary(
                n=plan.n,
                rate_bits=plan.rate_bits,
                num_codewords=plan.num_codewords,
                epsilon_used=plan.epsilon,
                tvs=tuple(tvs),
                median_tv=float(np.median(tvs)),
                tails=tuple(tail_estimate(tvs, t) for t in cfg.thresholds),
                theorem_threshold=plan.theorem_threshold,
                theorem_tail=tail_estimate(tvs, plan.theorem_threshold) if has_bound else None,
                failure_prob_log=plan.failure_prob_log,
                vacuous=plan.vacuous,
                good_set_fraction=good_set_fraction,
            )
        )

    notes = []
    if any(p.theorem_threshold is None for p in plans):
        notes.append("rate does not exceed I(X;Y); no theorem bounds were evaluated")
    elif any(p.vacuous for p in plans):
        notes.append(
            "failure bounds are vacuous (>= 1) at n = "
            + ", ".join(str(p.n) for p in plans if p.vacuous)
        )
    if not isinstance(cfg.rate, FixedRate):
        notes.append(MU_N_NOTE)

    fit, fit_note = None, None
    try:
        fit = fit_decay(tvs_by_n)
    except DegenerateFitError as e:
        fit_note = e.message
    return SweepResult(
        config=cfg, records=ordered, per_n=tuple(per_n), fit=fit, fit_note=fit_note, notes=tuple(notes)
    )


def run_sweep(cfg: TrialConfig, *, threads: int | None = None) -> SweepResult:
    """Sample ``cfg.trials`` codebooks per blocklength and aggregate their reports.

    Every blocklength is checked against the size caps before any trial runs.
    """
    plans = [_plan(cfg, n) for n in cfg.n_list]
    work = [
        (plan, trial)
        for plan in plans
        for trial in range(cfg.first_trial, cfg.first_trial + cfg.trials)
    ]
    workers = threads or os.cpu_count() or 1
    logger.info("running %d trials over n=%s with %d threads", len(work), list(cfg.n_list), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(lambda item: _run_trial(cfg, *item), work))
    return _summarize(cfg, plans, records)


def merge_sweeps(first: SweepResult, second: SweepResult) -> SweepResult:
    """Combine two sweeps of the same configuration over adjacent trial ranges."""
    a, b = sorted((first.config, second.config), key=lambda cfg: cfg.first_trial)
    if _config_key(a) != _config_key(b):
        raise InvalidParameterError("sweeps differ in configuration beyond the trial range")
    if b.first_trial != a.first_trial + a.trials:
        raise InvalidParameterError(
            f"trial ranges [{a.first_trial}, {a.first_trial + a.trials}) and "
            f"[{b.first_trial}, {b.first_trial + b.trials}) are not adjacent"
        )
    merged = a.model_copy(update={"trials": a.trials + b.trials})
    plans = [_plan(merged, n) for n in merged.n_list]
    return _summarize(merged, plans, first.records + second.records)


def _config_key(cfg: TrialConfig) -> tuple:
    return (
        tuple(cfg.qx.probs.tolist()),
        tuple(map(tuple, cfg.ch.rows.tolist())),
        cfg.n_list,
        cfg.rate,
        cfg.master_seed,
        cfg.delta,
        cfg.epsilon_override,
        cfg.thresholds,
        cfg.max_codewords,
        cfg.max_outputs,
    )
