"""Null and alternative lifetime laws.

Each family exposes ``pdf``, ``cdf``, ``sf``, ``quantile``, ``isf``,
``hazard`` and ``sample``; all of them accept scalars or arrays.  The
alternatives cover the three hazard shapes used in the power study:
increasing (Gamma/Weibull shape 2), decreasing (shape 0.5) and
nonmonotone (Beta(0.5, 0.5), LogNormal(0, 1)).

Scales are fixed to 1 because the exponentiality statistics are scale
invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "Beta",
    "Distribution",
    "Exponential",
    "Gamma",
    "LogNormal",
    "Weibull",
    "parse_distribution",
]


def _check_positive(**params: float) -> None:
    for name, value in params.items():
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be a positive finite number, got {value!r}")


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return p


def _split(u, survival):
    u = np.asarray(u, dtype=float)
    s = 1.0 - u if survival is None else np.asarray(survival, dtype=float)
    return u, s


def _out(a):
    return a.item() if np.ndim(a) == 0 else a


class Distribution:
    """Base class; subclasses implement the ``_pdf``/``_cdf``/... kernels."""

    family: str = ""
    support: tuple[float, float] = (0.0, math.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        with np.errstate(all="ignore"):
            out = np.where(inside, self._pdf(np.where(inside, x, self._inner_point())), 0.0)
        return _out(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        with np.errstate(all="ignore"):
            xi = np.clip(x, lo, hi if math.isfinite(hi) else None)
            out = np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, self._cdf(xi)))
        return _out(out)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        with np.errstate(all="ignore"):
            xi = np.clip(x, lo, hi if math.isfinite(hi) else None)
            out = np.where(x <= lo, 1.0, np.where(x >= hi, 0.0, self._sf(xi)))
        return _out(out)

    def quantile(self, p):
        return _out(self._quantile(_check_prob(p)))

    def isf(self, q):
        """Inverse survival function, ``quantile(1 - q)`` without the rounding."""
        return _out(self._isf(_check_prob(q)))

    def hazard(self, x):
        x = np.asarray(x, dtype=float)
        return _out(np.asarray(self.pdf(x)) / np.asarray(self.sf(x)))

    def density_quantile(self, u, survival=None):
        """Density-quantile function ``f(F^{-1}(u))`` for ``u`` in (0, 1).

        Above the median the inverse survival function is evaluated at
        ``survival`` (default ``1 - u``); passing it explicitly keeps the
        upper tail at full relative precision.
        """
        u, s = _split(u, survival)
        lower = u < 0.5
        with np.errstate(all="ignore"):
            x = np.where(
                lower,
                self._quantile(np.where(lower, u, 0.5)),
                self._isf(np.where(lower, 0.5, s)),
            )
        return _out(np.asarray(self.pdf(x)))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw by inversion so that one uniform yields one variate."""
        u = rng.random(size)
        # rng.random() can return exactly 0.0
        u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
        return _out(self._isf(np.asarray(u)))

    def _sf(self, x):
        return 1.0 - self._cdf(x)

    def _isf(self, q):
        return self._quantile(1.0 - q)

    def _inner_point(self) -> float:
        return 0.5 if self.support == (0.0, 1.0) else 1.0

    def spec(self) -> str:
        """Short literal understood by :func:`parse_distribution`."""
        raise NotImplementedError

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class Exponential(Distribution):
    scale: float = 1.0
    family = "exp"

    def __post_init__(self):
        _check_positive(scale=self.scale)

    def _pdf(self, x):
        return np.exp(-x / self.scale) / self.scale

    def _cdf(self, x):
        return -np.expm1(-x / self.scale)

    def _sf(self, x):
        return np.exp(-x / self.scale)

    def _quantile(self, p):
        return -self.scale * np.log1p(-p)

    def _isf(self, q):
        return -self.scale * np.log(q)

    def density_quantile(self, u, survival=None):
        _, s = _split(u, survival)
        return _out(s / self.scale)

    def spec(self) -> str:
        return f"exp:{self.scale:g}"


@dataclass(frozen=True)
class Gamma(Distribution):
    shape: float
    scale: float = 1.0
    family = "gamma"

    def __post_init__(self):
        _check_positive(shape=self.shape, scale=self.scale)

    def _pdf(self, x):
        k, s = self.shape, self.scale
        z = x / s
        return np.exp((k - 1) * np.log(z) - z - special.gammaln(k)) / s

    def _cdf(self, x):
        return special.gammainc(self.shape, x / self.scale)

    def _sf(self, x):
        return special.gammaincc(self.shape, x / self.scale)

    def _quantile(self, p):
        return self.scale * special.gammaincinv(self.shape, p)

    def _isf(self, q):
        return self.scale * special.gammainccinv(self.shape, q)

    def density_quantile(self, u, survival=None):
        k = self.shape
        u, s = _split(u, survival)
        lower = u < 0.5
        with np.errstate(all="ignore"):
            z = np.where(
                lower,
                special.gammaincinv(k, np.where(lower, u, 0.5)),
                special.gammainccinv(k, np.where(lower, 0.5, s)),
            )
            out = np.exp((k - 1) * np.log(z) - z - special.gammaln(k)) / self.scale
        return _out(out)

    def spec(self) -> str:
        return f"gamma:{self.shape:g}"


@dataclass(frozen=True)
class Weibull(Distribution):
    shape: float
    scale: float = 1.0
    family = "weibull"

    def __post_init__(self):
        _check_positive(shape=self.shape, scale=self.scale)

    def _pdf(self, x):
        k, s = self.shape, self.scale
        z = x / s
        return k / s * z ** (k - 1) * np.exp(-(z**k))

    def _cdf(self, x):
        return -np.expm1(-((x / self.scale) ** self.shape))

    def _sf(self, x):
        return np.exp(-((x / self.scale) ** self.shape))

    def _quantile(self, p):
        return self.scale * (-np.log1p(-p)) ** (1.0 / self.shape)

    def _isf(self, q):
        return self.scale * (-np.log(q)) ** (1.0 / self.shape)

    def density_quantile(self, u, survival=None):
        k = self.shape
        u, s = _split(u, survival)
        with np.errstate(all="ignore"):
            cum_hazard = np.where(u < 0.5, -np.log1p(-u), -np.log(s))
            out = k / self.scale * cum_hazard ** ((k - 1.0) / k) * s
        return _out(out)

    def spec(self) -> str:
        return f"weibull:{self.shape:g}"


@dataclass(frozen=True)
class Beta(Distribution):
    """Beta(a, b) on (0, 1).  ``beta:0.5`` means the symmetric Beta(0.5, 0.5)."""

    a: float
    b: float
    family = "beta"
    support = (0.0, 1.0)

    def __post_init__(self):
        _check_positive(a=self.a, b=self.b)

    def _pdf(self, x):
        a, b = self.a, self.b
        return np.exp((a - 1) * np.log(x) + (b - 1) * np.log1p(-x) - special.betaln(a, b))

    def _cdf(self, x):
        return special.betainc(self.a, self.b, x)

    def _sf(self, x):
        return special.betainc(self.b, self.a, 1.0 - x)

    def _quantile(self, p):
        return special.betaincinv(self.a, self.b, p)

    def _isf(self, q):
        # 1 - betaincinv(b, a, q) loses the lower tail; use the direct form there
        return np.where(
            q > 0.5,
            special.betaincinv(self.a, self.b, 1.0 - q),
            1.0 - special.betaincinv(self.b, self.a, q),
        )

    def spec(self) -> str:
        if self.a == self.b:
            return f"beta:{self.a:g}"
        return f"beta:{self.a:g},{self.b:g}"


@dataclass(frozen=True)
class LogNormal(Distribution):
    """log X ~ Normal(mu, sigma**2); ``lognormal:1`` means mu = 0, sigma = 1."""

    sigma: float
    mu: float = 0.0
    family = "lognormal"

    def __post_init__(self):
        _check_positive(sigma=self.sigma)
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")

    def _pdf(self, x):
        z = (np.log(x) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (x * self.sigma * math.sqrt(2 * math.pi))

    def _cdf(self, x):
        return special.ndtr((np.log(x) - self.mu) / self.sigma)

    def _sf(self, x):
        return special.ndtr(-(np.log(x) - self.mu) / self.sigma)

    def _quantile(self, p):
        return np.exp(self.mu + self.sigma * special.ndtri(p))

    def _isf(self, q):
        return np.exp(self.mu - self.sigma * special.ndtri(q))

    def spec(self) -> str:
        if self.mu == 0:
            return f"lognormal:{self.sigma:g}"
        return f"lognormal:{self.sigma:g},{self.mu:g}"


_FAMILIES = {
    "exp": lambda v: Exponential(*v),
    "exponential": lambda v: Exponential(*v),
    "gamma": lambda v: Gamma(*v),
    "weibull": lambda v: Weibull(*v),
    "beta": lambda v: Beta(v[0], v[0]) if len(v) == 1 else Beta(*v),
    "lognormal": lambda v: LogNormal(*v),
}


def parse_distribution(text: str) -> Distribution:
    """Parse literals like ``exp:1``, ``gamma:2``, ``beta:0.5`` or ``beta:2,3``."""
    family, _, params = text.strip().partition(":")
    family = family.lower()
    if family not in _FAMILIES:
        raise ValueError(
            f"unknown distribution family {family!r}; choose from {sorted(_FAMILIES)}"
        )
    try:
        values = [float(v) for v in params.split(",")] if params else []
    except ValueError as exc:
        raise ValueError(f"bad parameters in distribution literal {text!r}") from exc
    if not values and family not in {"exp", "exponential"}:
        raise ValueError(f"distribution literal {text!r} needs a shape parameter")
    try:
        return _FAMILIES[family](values)
    except TypeError as exc:
        raise ValueError(f"wrong number of parameters in {text!r}") from exc
