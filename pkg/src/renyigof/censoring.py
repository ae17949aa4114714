"""Progressive Type-II censoring schemes and their coefficient algebra.

A scheme ``(n, m, R)`` places ``n`` units on test, observes ``m`` failures
and withdraws ``R[i]`` surviving units at the ``i``-th failure.  Everything
the estimators need (the at-risk counts ``gamma``, the normalizing constant
``c``, the partial-fraction weights ``a`` and the expected uniform order
statistics ``p``) is a deterministic function of the scheme.

Indices in this module are 0-based in code; docstrings use the usual
1-based notation ``X_{i:m:n}``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "MAX_SUPPORTED_M",
    "CensoringScheme",
    "ProgressiveSample",
    "SchemeCoefficients",
    "a_coeffs",
    "expected_uniform_order_stats",
    "gamma_coeffs",
    "generate_progressive_sample",
    "generate_uniform_survivals",
    "log_normalizing_constant",
    "normalizing_constant",
    "parse_scheme",
    "scheme_coefficients",
]

#: Largest ``m`` for which the alternating a-coefficient sums are supported.
MAX_SUPPORTED_M = 30


@dataclass(frozen=True)
class CensoringScheme:
    """Design of a progressive Type-II censored life test.

    Parameters
    ----------
    n : int
        Number of units placed on test.
    m : int
        Number of observed failures.
    R : tuple of int
        Removals at each failure; ``len(R) == m`` and ``n == m + sum(R)``.
    """

    n: int
    m: int
    R: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", tuple(int(r) for r in self.R))
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if len(self.R) != self.m:
            raise ValueError(f"R has {len(self.R)} entries but m = {self.m}")
        if any(r < 0 for r in self.R):
            raise ValueError(f"removals must be nonnegative, got R = {self.R}")
        if self.n != self.m + sum(self.R):
            raise ValueError(
                f"scheme violates n = m + sum(R): {self.n} != {self.m} + {sum(self.R)}"
            )

    @classmethod
    def from_removals(cls, R: Sequence[int]) -> CensoringScheme:
        R = tuple(int(r) for r in R)
        return cls(n=len(R) + sum(R), m=len(R), R=R)

    @classmethod
    def complete(cls, n: int) -> CensoringScheme:
        return cls(n=n, m=n, R=(0,) * n)

    @classmethod
    def right_censored(cls, n: int, m: int) -> CensoringScheme:
        """Conventional Type-II right censoring: all withdrawals at the end."""
        return cls(n=n, m=m, R=(0,) * (m - 1) + (n - m,))

    @property
    def is_complete(self) -> bool:
        return self.n == self.m

    def literal(self) -> str:
        """Return the ``n=.. m=.. R=..`` form accepted by :func:`parse_scheme`."""
        return f"n={self.n} m={self.m} R={','.join(map(str, self.R))}"

    def __str__(self) -> str:
        return self.literal()

    @cached_property
    def gamma(self) -> np.ndarray:
        return gamma_coeffs(self)

    @cached_property
    def p(self) -> np.ndarray:
        return expected_uniform_order_stats(self)


def parse_scheme(text: str) -> CensoringScheme:
    """Parse a scheme literal such as ``"n=19 m=8 R=0,0,3,0,3,0,0,5"``.

    Keys may appear in any order.  ``n`` and ``m`` are optional when ``R``
    is given (they are then implied), but when present they are checked
    against ``R``.
    """
    fields: dict[str, str] = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or key not in {"n", "m", "R"}:
            raise ValueError(f"bad scheme token {token!r}; expected n=.., m=.., R=..")
        if key in fields:
            raise ValueError(f"duplicate key {key!r} in scheme literal")
        fields[key] = value
    if "R" not in fields:
        raise ValueError("scheme literal needs R=r1,r2,...")
    try:
        R = tuple(int(v) for v in fields["R"].split(",") if v != "")
        m = int(fields["m"]) if "m" in fields else len(R)
        n = int(fields["n"]) if "n" in fields else m + sum(R)
    except ValueError as exc:
        raise ValueError(f"non-integer value in scheme literal {text!r}") from exc
    return CensoringScheme(n=n, m=m, R=R)


def gamma_coeffs(scheme: CensoringScheme) -> np.ndarray:
    """Units at risk just before each failure.

    ``gamma_i = m - i + 1 + sum_{j>=i} R_j``; ``gamma_1 = n`` and
    ``gamma_i - gamma_{i+1} = R_i + 1``.
    """
    R = np.asarray(scheme.R, dtype=np.int64)
    m = scheme.m
    tail = np.cumsum(R[::-1])[::-1]
    return (m - np.arange(m) + tail).astype(float)


def normalizing_constant(scheme: CensoringScheme) -> float:
    """Constant ``c = prod(gamma)`` of the joint density; may overflow to inf."""
    c = math.prod(int(g) for g in gamma_coeffs(scheme))
    try:
        return float(c)
    except OverflowError:
        return math.inf


def log_normalizing_constant(scheme: CensoringScheme) -> float:
    return float(np.sum(np.log(gamma_coeffs(scheme))))


def a_coeffs(scheme: CensoringScheme, j: int) -> np.ndarray:
    """Partial-fraction weights ``a_{i,j} = prod_{u<=j, u!=i} 1/(gamma_u - gamma_i)``.

    ``j`` is 1-based (``1 <= j <= m``); the result has length ``j``.  Signs
    alternate, which is what makes sums over these weights cancel badly
    for large ``m``.
    """
    if not 1 <= j <= scheme.m:
        raise ValueError(f"j must lie in [1, {scheme.m}], got {j}")
    g = gamma_coeffs(scheme)[:j]
    out = np.empty(j)
    for i in range(j):
        diff = np.delete(g, i) - g[i]
        out[i] = 1.0 / np.prod(diff) if diff.size else 1.0
    return out


def expected_uniform_order_stats(scheme: CensoringScheme) -> np.ndarray:
    """``p_i = E[U_{i:m:n}]`` for the uniform progressive order statistics.

    Uses the product ``1 - prod_{j=m-i+1}^{m} (j + R_{m-j+1} + ... + R_m) /
    (j + 1 + R_{m-j+1} + ... + R_m)``; for a complete sample this is
    ``i / (n + 1)``.
    """
    m, R = scheme.m, scheme.R
    out = np.empty(m)
    for i in range(1, m + 1):
        prod = 1.0
        for j in range(m - i + 1, m + 1):
            removed = sum(R[m - j :])
            prod *= (j + removed) / (j + 1 + removed)
        out[i - 1] = 1.0 - prod
    return out


@dataclass(frozen=True)
class SchemeCoefficients:
    """All scheme-derived constants, as reported by ``renyigof coeffs``."""

    gamma: np.ndarray
    c: float
    log_c: float
    a: list[np.ndarray] = field(repr=False)
    p: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "gamma": [int(g) for g in self.gamma],
            "c": self.c,
            "log_c": self.log_c,
            "p": self.p.tolist(),
            "a": [row.tolist() for row in self.a],
        }


def scheme_coefficients(scheme: CensoringScheme) -> SchemeCoefficients:
    return SchemeCoefficients(
        gamma=gamma_coeffs(scheme),
        c=normalizing_constant(scheme),
        log_c=log_normalizing_constant(scheme),
        a=[a_coeffs(scheme, j) for j in range(1, scheme.m + 1)],
        p=expected_uniform_order_stats(scheme),
    )


@dataclass(frozen=True)
class ProgressiveSample:
    """Observed failure times ``x_1 < ... < x_m`` under ``scheme``."""

    scheme: CensoringScheme
    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size != self.scheme.m:
            raise ValueError(
                f"sample has {x.size} observations but scheme has m = {self.scheme.m}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("sample contains non-finite values")
        bad = np.flatnonzero(np.diff(x) <= 0)
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"observations must be strictly increasing: x[{i + 1}] = {x[i + 1]!r} "
                f"<= x[{i}] = {x[i]!r}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def scaled(self, factor: float, shift: float = 0.0) -> ProgressiveSample:
        return ProgressiveSample(self.scheme, factor * self.x + shift)


def generate_uniform_survivals(scheme: CensoringScheme, w: np.ndarray) -> np.ndarray:
    """Map independent uniforms to survival probabilities ``1 - U_{i:m:n}``.

    ``w`` has shape ``(..., m)``.  With ``V_i = W_i^{1/(i + R_m + ... +
    R_{m-i+1})}`` the uniform progressive sample is ``U_i = 1 - V_m V_{m-1}
    ... V_{m-i+1}``; the product itself is returned so that callers can
    invert survival functions without losing the upper tail to rounding.
    """
    w = np.asarray(w, dtype=float)
    g = gamma_coeffs(scheme)
    # exponent for V_i (1-based) is gamma_{m-i+1}
    v = w ** (1.0 / g[::-1])
    return np.cumprod(v[..., ::-1], axis=-1)


def generate_progressive_sample(
    scheme: CensoringScheme,
    quantile: Callable[[np.ndarray], np.ndarray] | object,
    rng: np.random.Generator,
) -> ProgressiveSample:
    """Draw one progressive Type-II censored sample.

    ``quantile`` is either a callable on ``(0, 1)`` or a distribution object
    from :mod:`renyigof.distributions`; for the latter the inverse survival
    function is used, which is the same map but accurate in the upper tail.
    """
    survival = generate_uniform_survivals(scheme, rng.random(scheme.m))
    x = _invert(quantile, survival)
    try:
        return ProgressiveSample(scheme, x)
    except ValueError as exc:
        raise ValueError(f"quantile function produced a non-monotone sample: {exc}") from exc


def _invert(quantile, survival: np.ndarray) -> np.ndarray:
    isf = getattr(quantile, "isf", None)
    if isf is not None:
        return np.asarray(isf(survival), dtype=float)
    fn = getattr(quantile, "quantile", quantile)
    return np.asarray(fn(1.0 - survival), dtype=float)
