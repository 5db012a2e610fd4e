"""Asymptotic limits of maximum-weight independent sets and matchings on sparse random graphs."""

from rdelimits.weights import WeightSpec, parse_weight, sample_weight, sample_max_weight, weight_cdf
from rdelimits.empdist import EmpiricalDist, make_pool, kolmogorov_distance, dominates, atom_at_zero, quantile

__version__ = "0.1.0"

__all__ = [
    "WeightSpec",
    "parse_weight",
    "sample_weight",
    "sample_max_weight",
    "weight_cdf",
    "EmpiricalDist",
    "make_pool",
    "kolmogorov_distance",
    "dominates",
    "atom_at_zero",
    "quantile",
]
