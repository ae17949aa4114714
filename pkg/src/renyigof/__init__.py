"""Rényi Kullback-Leibler goodness-of-fit test for exponentiality under
progressive Type-II censoring."""

from importlib import resources as _resources

from .censoring import CensoringScheme, ProgressiveSample, parse_scheme
from .distributions import Beta, Exponential, Gamma, LogNormal, Weibull, parse_distribution
from .entropy import NumericalCancellation, renyi_entropy_estimate, shannon_entropy_estimate
from .gof import TestStatistic, mle_exponential_scale, renyi_test_statistic, shannon_test_statistic
from .mc import McConfig, critical_value, p_value, power_study, select_window

__version__ = "0.1.0"

__all__ = [
    "Beta",
    "CensoringScheme",
    "Exponential",
    "Gamma",
    "LogNormal",
    "McConfig",
    "NumericalCancellation",
    "ProgressiveSample",
    "TestStatistic",
    "Weibull",
    "critical_value",
    "data_path",
    "mle_exponential_scale",
    "p_value",
    "parse_distribution",
    "parse_scheme",
    "power_study",
    "renyi_entropy_estimate",
    "renyi_test_statistic",
    "select_window",
    "shannon_entropy_estimate",
    "shannon_test_statistic",
]


def data_path(name: str):
    """Path of a bundled data file, e.g. ``data_path("nelson.csv")``."""
    return _resources.files(__name__).joinpath("data", name)
