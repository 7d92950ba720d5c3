"""Analytical side of the soft-covering theorems.

The exponent supremum over alpha > 1 is taken on the compact
reparametrization ``t = (alpha - 1) / (2 alpha - 1)`` in ``(0, 1/2)``; the
point ``t = 1/2`` is the alpha -> infinity limit and is reported as
``alpha_star = "boundary"``. Failure probabilities are natural logs because
they are doubly exponential in the blocklength.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from .errors import DomainError, RateTooLowError, ZeroDispersionError
from .info_measures import info_profile, max_renyi, renyi_divergence
from .models.base import Channel, FiniteDistribution
from .models.results import ExponentResult, InfoProfile, SecondOrderPlan, Theorem1Bound
from .probability import output_distribution

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0
GRID_POINTS = 256
T_TOLERANCE = 1e-12
BOUNDARY_TOLERANCE = 1e-9
MIN_DISPERSION = 1e-12

MU_N_NOTE = (
    "mu_n is evaluated as Q(Q^-1(eps) + (r/sqrt(V)) log2(n)/sqrt(n)) + rho/(V^1.5 sqrt(n)); "
    "the inner Q^-1 follows the slack choice eps_n = Q^-1(eps) sqrt(V/n) + r log2(n)/n"
)
LOG_BASE_NOTE = "log n in second-order rates is taken base 2 to match rates in bits"


def qfunc(x: float) -> float:
    """Standard normal tail probability 1 - Phi(x)."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def qfunc_inv(eps: float) -> float:
    """Inverse of :func:`qfunc` on (0, 1) by bracketed root finding."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"Q^-1 is defined on (0, 1), got {eps}")
    return float(
        brentq(
            lambda x: qfunc(x) - eps,
            -40.0,
            40.0,
            xtol=1e-15,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    )


def beta_exponent(
    profile: InfoProfile | float, dalpha: float, alpha: float, epsilon: float
) -> float:
    """(alpha - 1)(I + eps - d_alpha): exponent of the Chernoff bound on atypicality."""
    if not alpha > 1:
        raise DomainError(f"beta requires alpha > 1, got {alpha}")
    mi = profile.mutual_info_bits if isinstance(profile, InfoProfile) else float(profile)
    return (alpha - 1.0) * (mi + epsilon - dalpha)


def optimized_epsilon(R: float, delta: float, alpha: float, dalpha: float, I: float) -> float:
    """Typicality slack that balances the two union-bound terms."""
    if not alpha > 1:
        raise DomainError(f"optimized epsilon requires alpha > 1, got {alpha}")
    return (0.5 * (R - delta) + (alpha - 1.0) * dalpha) / (0.5 + (alpha - 1.0)) - I


def alpha_from_t(t: float) -> float:
    return (1.0 - t) / (1.0 - 2.0 * t)


def t_from_alpha(alpha: float) -> float:
    return (alpha - 1.0) / (2.0 * alpha - 1.0)


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    """Golden-section search for a maximum on [lo, hi]; endpoints are candidates too."""
    lo0, hi0 = lo, hi
    f_lo, f_hi = f(lo), f(hi)
    x1 = hi - GOLDEN_RATIO * (hi - lo)
    x2 = lo + GOLDEN_RATIO * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN_RATIO * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN_RATIO * (hi - lo)
            f2 = f(x2)
    best_x, best_f = lo0, f_lo
    for x, fx in ((x1, f1), (x2, f2), (hi0, f_hi)):
        if fx >= best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _neg_exp2_over(exponent_bits: float, divisor: float) -> float:
    """-2^x / divisor without overflow warnings; -inf once 2^x overflows."""
    with np.errstate(over="ignore"):
        return float(-np.exp2(exponent_bits) / divisor)


def _theorem1_failure_log(n: int, delta: float, output_size: int) -> float:
    """ln of (1 + |Y|^n) exp(-2^(n delta) / 3)."""
    return float(np.logaddexp(0.0, n * math.log(output_size))) + _neg_exp2_over(n * delta, 3.0)


def gamma_delta(
    qx: FiniteDistribution,
    ch: Channel,
    R: float,
    delta: float,
    n: int | None = None,
) -> ExponentResult:
    """Theorem 1 exponent sup_{alpha>1} (alpha-1)/(2alpha-1) (R - delta - d_alpha).

    Args:
        qx: Input distribution.
        ch: Channel.
        R: Codebook rate in bits.
        delta: Slack in (0, R - I(X;Y)).
        n: Optional blocklength; fills the threshold and failure bound fields.

    Raises:
        RateTooLowError: If R - delta <= I(X;Y).
    """
    profile = info_profile(qx, ch)
    mi = profile.mutual_info_bits
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if R - delta <= mi:
        raise RateTooLowError(
            f"R - delta = {R - delta:.6g} does not exceed I(X;Y) = {mi:.6g} bits", mi
        )

    joint = (qx.probs[:, None] * ch.rows).ravel()
    product = np.outer(qx.probs, output_distribution(qx, ch).probs).ravel()
    gap = R - delta
    d_inf = max_renyi(qx, ch)

    def objective(t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= 0.5:
            return 0.5 * (gap - d_inf)
        return t * (gap - renyi_divergence(joint, product, alpha_from_t(t)))

    ts = 0.5 * np.arange(1, GRID_POINTS + 1) / GRID_POINTS
    values = [objective(float(t)) for t in ts]
    k = int(np.argmax(values))
    lo = float(ts[k - 1]) if k > 0 else 0.0
    hi = float(ts[k + 1]) if k + 1 < GRID_POINTS else 0.5
    t_star, value = _golden_max(objective, lo, hi, T_TOLERANCE)

    if t_star >= 0.5 - BOUNDARY_TOLERANCE:
        gamma = max(objective(0.5), 0.0)
        alpha_star: float | str = "boundary"
        epsilon_star = d_inf - mi
        beta = gamma
        logger.debug("gamma_delta supremum reached at alpha -> infinity (%.6g)", gamma)
    else:
        alpha_star = alpha_from_t(t_star)
        dalpha = renyi_divergence(joint, product, alpha_star)
        gamma = max(value, 0.0)
        epsilon_star = optimized_epsilon(R, delta, alpha_star, dalpha, mi)
        beta = beta_exponent(mi, dalpha, alpha_star, epsilon_star)

    extra = {}
    if n is not None:
        failure_log = _theorem1_failure_log(n, delta, ch.output.size)
        extra = {
            "n": n,
            "tv_bound_log2": math.log2(3.0) - n * gamma,
            "failure_log": failure_log,
            "vacuous": failure_log >= 0.0,
        }
    return ExponentResult(
        rate_bits=R,
        delta=delta,
        mutual_info_bits=mi,
        gamma_delta=gamma,
        alpha_star=alpha_star,
        epsilon_star=epsilon_star,
        beta=beta,
        **extra,
    )


def theorem1_bound(
    qx: FiniteDistribution, ch: Channel, R: float, delta: float, n: int
) -> Theorem1Bound:
    """TV threshold 3 * 2^(-n gamma_delta) and the log failure probability at blocklength n."""
    result = gamma_delta(qx, ch, R, delta, n=n)
    mi, beta, eps = result.mutual_info_bits, result.beta, result.epsilon_star
    log_out = n * math.log(ch.output.size)
    bound = Theorem1Bound(
        n=n,
        gamma_delta=result.gamma_delta,
        beta=beta,
        epsilon=eps,
        tv_threshold=3.0 * float(np.exp2(-n * result.gamma_delta)),
        failure_prob_log=result.failure_log,
        vacuous=result.vacuous,
        atypical_term_log=_neg_exp2_over(n * (R - beta), 3.0),
        typical_term_log=log_out + _neg_exp2_over(n * (R - mi - eps - 2.0 * beta), 3.0),
        p2_limit=2.0 * float(np.exp2(-beta * n)),
        d1_limit=1.0 + float(np.exp2(-beta * n)),
    )
    if bound.vacuous:
        logger.info("Theorem 1 failure bound is vacuous at n=%d (log %.3g)", n, bound.failure_prob_log)
    return bound


def good_set_thresholds(result: ExponentResult | Theorem1Bound, n: int) -> tuple[float, float]:
    """Membership limits (p2 mass, max D_{C,1}) that mark a codebook as well behaved."""
    scale = float(np.exp2(-result.beta * n))
    return 2.0 * scale, 1.0 + scale


def second_order_plan(
    profile: InfoProfile,
    eps_target: float,
    n: int,
    c: float,
    d: float,
    r: float | None = None,
    *,
    output_size: int,
) -> SecondOrderPlan:
    """Second-order rate, typicality slack, mu_n and failure bound at blocklength n.

    ``r`` defaults to the midpoint of (0, c - d - 1).

    Raises:
        ZeroDispersionError: If V <= 1e-12.
        DomainError: If eps_target, c, d or r leave their intervals.
    """
    if not 0.0 < eps_target < 1.0:
        raise DomainError(f"epsilon target must lie in (0, 1), got {eps_target}")
    if not c > 2:
        raise DomainError(f"c must exceed 2, got {c}")
    if not d < c - 1:
        raise DomainError(f"d must be below c - 1 = {c - 1}, got {d}")
    if r is None:
        r = 0.5 * (c - d - 1.0)
    if not 0.0 < r < c - d - 1.0:
        raise DomainError(f"r must lie in (0, {c - d - 1}), got {r}")
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    V = profile.dispersion
    if V <= MIN_DISPERSION:
        raise ZeroDispersionError(f"dispersion V = {V:.3g}; second-order expansion undefined")

    mi = profile.mutual_info_bits
    log_n = math.log2(n)
    root_n = math.sqrt(n)
    qinv = qfunc_inv(eps_target)
    rate = mi + qinv * math.sqrt(V / n) + c * log_n / n
    slack = qinv * math.sqrt(V / n) + r * log_n / n
    mu_n = qfunc(qinv + (r / math.sqrt(V)) * log_n / root_n) + profile.third_abs_moment / (
        V**1.5 * root_n
    )
    atypical = _neg_exp2_over(n * rate, 3.0 * n / mu_n)
    typical = n * math.log(output_size) - n ** (c - r - 1.0) / 3.0
    failure_log = float(np.logaddexp(atypical, typical))
    p2_limit = mu_n * (1.0 + 1.0 / root_n)
    return SecondOrderPlan(
        epsilon_target=eps_target,
        c=c,
        d=d,
        r=r,
        n=n,
        mutual_info_bits=mi,
        qinv=qinv,
        rate=rate,
        slack=slack,
        mu_n=mu_n,
        failure_log=failure_log,
        vacuous=failure_log >= 0.0,
        p2_limit=p2_limit,
        d1_limit=1.0 + 1.0 / root_n,
        tv_bound=p2_limit + 1.0 / root_n,
    )
