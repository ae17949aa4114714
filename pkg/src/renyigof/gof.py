"""Goodness-of-fit statistics for exponentiality under progressive censoring.

Large values reject the null.  Both exponentiality statistics are invariant
to rescaling the data, so critical values simulated from Exponential(1)
apply to any scale.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .censoring import CensoringScheme, ProgressiveSample
from .entropy import renyi_entropy_batch, renyi_entropy_estimate, shannon_entropy_batch

__all__ = [
    "StatisticKind",
    "TestStatistic",
    "mle_exponential_scale",
    "renyi_test_statistic",
    "rkl_information",
    "rkl_statistic_generic",
    "shannon_test_statistic",
    "statistic_batch",
]


class StatisticKind(str, enum.Enum):
    RENYI = "renyi"
    SHANNON = "shannon"

    @classmethod
    def parse(cls, value: str | StatisticKind) -> StatisticKind:
        if isinstance(value, cls):
            return value
        aliases = {"renyi": cls.RENYI, "rkl": cls.RENYI, "shannon": cls.SHANNON, "kl": cls.SHANNON}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown statistic kind {value!r}; use 'renyi' or 'shannon'") from None


@dataclass(frozen=True)
class TestStatistic:
    value: float
    kind: StatisticKind
    w: int
    theta_hat: float
    alpha: float | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "alpha": self.alpha,
            "w": self.w,
            "theta_hat": self.theta_hat,
        }


def _mle_batch(x: np.ndarray, scheme: CensoringScheme) -> np.ndarray:
    weights = np.asarray(scheme.R, dtype=float) + 1.0
    total = np.zeros(np.shape(x)[:-1])
    for k in range(scheme.m):
        total = total + weights[k] * x[..., k]
    return total / scheme.m


def mle_exponential_scale(sample: ProgressiveSample) -> float:
    """Maximum likelihood scale of the exponential law, ``sum((R_j+1) x_j) / m``."""
    x = sample.x
    if np.any(x <= 0):
        i = int(np.flatnonzero(x <= 0)[0])
        raise ValueError(f"exponential MLE needs positive data; x[{i}] = {x[i]!r}")
    return float(_mle_batch(x, sample.scheme))


def _exponential_fit_term(x: np.ndarray, scheme: CensoringScheme) -> np.ndarray:
    return scheme.m / scheme.n * (np.log(_mle_batch(x, scheme)) + 1.0)


def statistic_batch(
    x: np.ndarray,
    scheme: CensoringScheme,
    kind: StatisticKind | str,
    w: int,
    alpha: float | None = None,
) -> np.ndarray:
    """Evaluate a statistic on every row of ``x`` (shape ``(reps, m)``).

    This is the path the Monte Carlo engine uses; single-sample functions
    below give identical values.
    """
    kind = StatisticKind.parse(kind)
    x = np.asarray(x, dtype=float)
    fit = _exponential_fit_term(x, scheme)
    if kind is StatisticKind.RENYI:
        if alpha is None:
            raise ValueError("the Renyi statistic needs alpha")
        return -renyi_entropy_batch(x, scheme, alpha, w) / scheme.n + fit
    return -shannon_entropy_batch(x, scheme, w) + fit


def renyi_test_statistic(sample: ProgressiveSample, alpha: float, w: int) -> TestStatistic:
    """``T^alpha = -H^alpha(w,n,m)/n + (m/n)(log theta_hat + 1)``."""
    theta_hat = mle_exponential_scale(sample)
    h = renyi_entropy_estimate(sample, alpha, w).value
    scheme = sample.scheme
    value = -h / scheme.n + scheme.m / scheme.n * (math.log(theta_hat) + 1.0)
    return TestStatistic(
        value=float(value), kind=StatisticKind.RENYI, w=int(w), theta_hat=theta_hat, alpha=float(alpha)
    )


def shannon_test_statistic(sample: ProgressiveSample, w: int) -> TestStatistic:
    """Baseline ``T = -H(w,n,m) + (m/n)(log theta_hat + 1)``; ``H`` carries its own ``1/n``."""
    theta_hat = mle_exponential_scale(sample)
    value = float(statistic_batch(sample.x, sample.scheme, StatisticKind.SHANNON, w))
    return TestStatistic(value=value, kind=StatisticKind.SHANNON, w=int(w), theta_hat=theta_hat)


def _null_loglik_terms(sample, null_pdf, null_cdf, null_sf=None) -> float:
    x = sample.x
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f = np.log(np.asarray(null_pdf(x), dtype=float))
    if not np.all(np.isfinite(log_f)):
        i = int(np.flatnonzero(~np.isfinite(log_f))[0])
        raise ValueError(f"null density is zero or invalid at x[{i}] = {x[i]!r}")
    total = math.fsum(log_f)
    R = np.asarray(sample.scheme.R, dtype=float)
    idx = np.flatnonzero(R > 0)
    if idx.size:
        if null_sf is not None:
            surv = np.asarray(null_sf(x[idx]), dtype=float)
        else:
            surv = 1.0 - np.asarray(null_cdf(x[idx]), dtype=float)
        bad = np.flatnonzero(~(surv > 0))
        if bad.size:
            i = int(idx[bad[0]])
            raise ValueError(f"null CDF equals 1 at censoring point x[{i}] = {x[i]!r}")
        total += math.fsum(R[idx] * np.log(surv))
    return total


def rkl_information(sample, null_pdf, null_cdf, alpha: float, w: int, null_sf=None) -> float:
    """Unnormalized R-KL information estimate; equals ``n`` times the generic statistic."""
    h = renyi_entropy_estimate(sample, alpha, w).value
    return -h - _null_loglik_terms(sample, null_pdf, null_cdf, null_sf)


def rkl_statistic_generic(
    sample: ProgressiveSample,
    null_pdf: Callable[[np.ndarray], np.ndarray],
    null_cdf: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    w: int,
    *,
    null_sf: Callable[[np.ndarray], np.ndarray] | None = None,
    theta_hat: float = math.nan,
) -> TestStatistic:
    """R-KL statistic against an arbitrary, already fitted, null law.

    ``-(1/n) [H^alpha + sum log f0(x_j) + sum R_j log(1 - F0(x_j))]``.  The
    null is passed as functions so that the fitting policy stays with the
    caller; ``theta_hat`` is only recorded.  Supplying ``null_sf`` avoids
    forming ``1 - F0`` by subtraction in the upper tail.  Only censoring
    points (``R_j > 0``) enter the second sum.
    """
    n = sample.scheme.n
    value = rkl_information(sample, null_pdf, null_cdf, alpha, w, null_sf) / n
    return TestStatistic(
        value=float(value), kind=StatisticKind.RENYI, w=int(w), theta_hat=theta_hat, alpha=float(alpha)
    )
