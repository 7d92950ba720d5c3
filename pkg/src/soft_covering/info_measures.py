"""Information density moments and Rényi divergence of a (Q_X, Q_{Y|X}) pair, in bits."""

import math

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import DomainError, LengthMismatchError, SupportViolationError, UndefinedDensityError
from .models.base import Channel, FiniteDistribution
from .models.results import InfoProfile
from .probability import joint_distribution, output_distribution, product_distribution

LN2 = math.log(2.0)


def information_density(qx: FiniteDistribution, ch: Channel, x: int, y: int) -> float:
    """log2(Q_{Y|X}(y|x) / Q_Y(y)); -inf when the channel cannot produce y from x.

    Raises:
        UndefinedDensityError: If Q_Y(y) = 0.
    """
    qy = output_distribution(qx, ch).probs
    if qy[y] <= 0:
        raise UndefinedDensityError(f"Q_Y({y}) = 0; information density undefined")
    w = ch.rows[x, y]
    if w <= 0:
        return -math.inf
    return math.log2(w / qy[y])


def density_matrix(qx: FiniteDistribution, ch: Channel) -> np.ndarray:
    """|X| x |Y| matrix of information densities; -inf where Q_{Y|X}(y|x) = 0.

    Columns with Q_Y(y) = 0 are -inf as well: they carry no probability.
    """
    qy = output_distribution(qx, ch).probs
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log2(ch.rows) - np.log2(qy)[None, :]
    dens[(ch.rows <= 0) | (qy[None, :] <= 0)] = -np.inf
    return dens


def info_profile(qx: FiniteDistribution, ch: Channel) -> InfoProfile:
    """Mean, variance and third absolute central moment of the information density.

    Pairs with Q_{X,Y}(x, y) = 0 do not contribute.
    """
    joint = qx.probs[:, None] * ch.rows
    support = joint > 0
    weights = joint[support]
    dens = density_matrix(qx, ch)[support]
    mean = float(np.dot(weights, dens))
    centered = dens - mean
    return InfoProfile(
        mutual_info_bits=max(mean, 0.0),
        dispersion=float(np.dot(weights, centered**2)),
        third_abs_moment=float(np.dot(weights, np.abs(centered) ** 3)),
    )


def _probs(dist: FiniteDistribution | np.ndarray) -> np.ndarray:
    return dist.probs if isinstance(dist, FiniteDistribution) else np.asarray(dist, dtype=np.float64)


def renyi_divergence(
    p: FiniteDistribution | np.ndarray, q: FiniteDistribution | np.ndarray, alpha: float
) -> float:
    """d_alpha(p || q) in bits, evaluated termwise in the log domain.

    Raises:
        DomainError: Unless alpha > 0 and alpha != 1.
        SupportViolationError: If p puts mass where q has none and alpha > 1.
    """
    if not alpha > 0 or alpha == 1:
        raise DomainError(f"Rényi order {alpha} must be positive and different from 1")
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise LengthMismatchError(f"distributions have shapes {pv.shape} and {qv.shape}")
    active = pv > 0
    orphan = active & (qv <= 0)
    if np.any(orphan):
        if alpha > 1:
            raise SupportViolationError("p is not absolutely continuous with respect to q")
        # q^(1 - alpha) vanishes for alpha < 1
        active &= ~orphan
    if not np.any(active):
        return math.inf
    log_terms = alpha * np.log(pv[active]) + (1.0 - alpha) * np.log(qv[active])
    return float(logsumexp(log_terms) / ((alpha - 1.0) * LN2))


def renyi_limit_check(p: FiniteDistribution | np.ndarray, q: FiniteDistribution | np.ndarray) -> float:
    """KL divergence in bits, the alpha -> 1 limit of :func:`renyi_divergence`."""
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise LengthMismatchError(f"distributions have shapes {pv.shape} and {qv.shape}")
    if np.any((pv > 0) & (qv <= 0)):
        raise SupportViolationError("p is not absolutely continuous with respect to q")
    return float(rel_entr(pv, qv).sum() / LN2)


def joint_renyi(qx: FiniteDistribution, ch: Channel, alpha: float) -> float:
    """d_alpha(Q_{X,Y}, Q_X Q_Y); ``alpha = inf`` gives the max-divergence limit."""
    if math.isinf(alpha):
        return max_renyi(qx, ch)
    joint = joint_distribution(qx, ch)
    product = product_distribution(qx, output_distribution(qx, ch))
    return renyi_divergence(joint, product, alpha)


def max_renyi(qx: FiniteDistribution, ch: Channel) -> float:
    """log2 of the largest ratio Q_{X,Y} / (Q_X Q_Y) on the joint support."""
    support = (qx.probs[:, None] * ch.rows) > 0
    return float(density_matrix(qx, ch)[support].max())
