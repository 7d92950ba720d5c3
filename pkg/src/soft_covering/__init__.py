"""Finite-blocklength soft-covering bounds and random-codebook experiments."""

from .codebook import sample_codebook, soft_cover_report
from .errors import SoftCoverError
from .exponents import gamma_delta, second_order_plan, theorem1_bound
from .info_measures import info_profile
from .probability import bec, bsc, make_distribution, noiseless

__version__ = "0.1.0"

__all__ = [
    "SoftCoverError",
    "bec",
    "bsc",
    "gamma_delta",
    "info_profile",
    "make_distribution",
    "noiseless",
    "sample_codebook",
    "second_order_plan",
    "soft_cover_report",
    "theorem1_bound",
]
