"""Spacings-based entropy estimators for progressively censored samples.

The Rényi estimator combines a data part, the local slopes ``A_{j,w}`` of
the quantile function, with a data-free part built from the scheme's
partial-fraction weights.  The data-free part is computed once per
``(scheme, alpha)`` and cached.

:func:`joint_renyi_entropy_numeric` is a quadrature oracle for small
schemes.  It evaluates the joint Rényi entropy of the censored order
statistics both through the sum of single integrals over the marginal
laws and by direct nested integration of the joint density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

from .censoring import (
    MAX_SUPPORTED_M,
    CensoringScheme,
    ProgressiveSample,
    a_coeffs,
    gamma_coeffs,
    log_normalizing_constant,
)
from .distributions import Distribution

__all__ = [
    "EntropyEstimate",
    "JointEntropyCheck",
    "NumericalCancellation",
    "QuadratureError",
    "joint_renyi_entropy_numeric",
    "local_slope",
    "log_slopes",
    "renyi_entropy_batch",
    "renyi_entropy_estimate",
    "renyi_scheme_terms",
    "shannon_entropy_batch",
    "shannon_entropy_estimate",
]

# condition number above which the double-precision a-sum is redone in mpmath
_COND_LIMIT = 1e6
_MP_DPS = 60


class NumericalCancellation(ArithmeticError):
    """The alternating coefficient sum for some ``j`` is not positive."""

    def __init__(self, j: int, value: float, message: str | None = None):
        self.j = j
        self.value = value
        super().__init__(
            message
            or f"inner coefficient sum at j={j} is {value:.3e} <= 0; "
            "its logarithm is undefined for this scheme"
        )


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EntropyEstimate:
    """Rényi entropy estimate with its per-``j`` log terms.

    ``value == sum(per_term) / (1 - alpha)``.
    """

    value: float
    alpha: float
    w: int
    per_term: np.ndarray

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "alpha": self.alpha,
            "w": self.w,
            "per_term": self.per_term.tolist(),
        }


def _window(m: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    # out-of-range neighbours are clamped to the first/last observation
    if w < 1:
        raise ValueError(f"window size must be >= 1, got {w}")
    if m < 2:
        raise ValueError("spacings need at least two observations (m >= 2)")
    idx = np.arange(m)
    return np.minimum(idx + w, m - 1), np.maximum(idx - w, 0)


def local_slope(sample: ProgressiveSample, p: np.ndarray, j: int, w: int) -> float:
    """Slope ``A_{j,w} = (x_{j+w} - x_{j-w}) / (p_{j+w} - p_{j-w})``; ``j`` is 1-based.

    Indices below 1 are replaced by 1 and indices above ``m`` by ``m``.
    """
    m = sample.scheme.m
    if not 1 <= j <= m:
        raise ValueError(f"j must lie in [1, {m}], got {j}")
    if w < 1:
        raise ValueError(f"window size must be >= 1, got {w}")
    hi, lo = min(j + w, m) - 1, max(j - w, 1) - 1
    if hi == lo:
        raise ValueError("window collapses to a single point (m = 1)")
    return float((sample.x[hi] - sample.x[lo]) / (p[hi] - p[lo]))


def log_slopes(x: np.ndarray, scheme: CensoringScheme, w: int) -> np.ndarray:
    """``log A_{j,w}`` for every row of ``x`` (shape ``(..., m)``)."""
    x = np.asarray(x, dtype=float)
    hi, lo = _window(scheme.m, w)
    p = scheme.p
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(x[..., hi] - x[..., lo]) - np.log(p[hi] - p[lo])


def _row_sum(terms: np.ndarray) -> np.ndarray:
    # fixed left-to-right order so each row's result is independent of batch shape
    total = np.zeros(terms.shape[:-1])
    for k in range(terms.shape[-1]):
        total = total + terms[..., k]
    return total


def _binomial_cdf_terms(n: int, j: int, q: float) -> list[float]:
    log_q, log_1mq = math.log(q), math.log1p(-q)
    lgn = math.lgamma(n + 1)
    return [
        math.exp(lgn - math.lgamma(u + 1) - math.lgamma(n - u + 1) + u * log_q + (n - u) * log_1mq)
        for u in range(j)
    ]


def _inner_terms_double(scheme: CensoringScheme, j: int, alpha: float) -> list[float]:
    g = gamma_coeffs(scheme)
    a = a_coeffs(scheme, j)
    out = []
    for i in range(j):
        q = 1.0 / (2.0 * g[i])
        binom = math.fsum(_binomial_cdf_terms(scheme.n, j, q))
        out.append(a[i] / (g[i] * (1.0 - q) ** (alpha - 1.0)) * binom ** (alpha - 1.0))
    return out


def _inner_sum_mp(scheme: CensoringScheme, j: int, alpha: float) -> mpmath.mpf:
    g = [int(v) for v in gamma_coeffs(scheme)]
    n = scheme.n
    with mpmath.workdps(_MP_DPS):
        al = mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        for i in range(j):
            a = mpmath.mpf(1)
            for u in range(j):
                if u != i:
                    a /= g[u] - g[i]
            q = mpmath.mpf(1) / (2 * g[i])
            binom = mpmath.fsum(
                mpmath.binomial(n, u) * q**u * (1 - q) ** (n - u) for u in range(j)
            )
            total += a / (g[i] * (1 - q) ** (al - 1)) * binom ** (al - 1)
        return +total


@lru_cache(maxsize=512)
def _scheme_terms_cached(n: int, R: tuple[int, ...], alpha: float) -> tuple[float, ...]:
    scheme = CensoringScheme(n=n, m=len(R), R=R)
    log_g = np.log(gamma_coeffs(scheme))
    out = []
    for j in range(1, scheme.m + 1):
        terms = _inner_terms_double(scheme, j, alpha)
        s = math.fsum(terms)
        cond = math.fsum(abs(t) for t in terms) / abs(s) if s != 0 else math.inf
        if s <= 0 or cond > _COND_LIMIT:
            s_mp = _inner_sum_mp(scheme, j, alpha)
            if s_mp <= 0:
                raise NumericalCancellation(j, float(s_mp))
            log_s = float(mpmath.log(s_mp))
        else:
            log_s = math.log(s)
        out.append(float(np.sum(log_g[:j])) + log_s)
    return tuple(out)


def renyi_scheme_terms(scheme: CensoringScheme, alpha: float) -> np.ndarray:
    """Data-free part of each log term: ``log(c_{j-1} * S_j)`` for ``j = 1..m``.

    ``S_j = sum_i a_{i,j} / (gamma_i (1 - q_i)^(alpha-1)) * B_j(q_i)^(alpha-1)``
    with ``q_i = 1/(2 gamma_i)`` and ``B_j`` the binomial(n, q) CDF at ``j-1``.
    Sums are accumulated with :func:`math.fsum`; when the alternating terms
    cancel too strongly the sum is recomputed at 60 significant digits.

    Raises
    ------
    NumericalCancellation
        If ``S_j <= 0`` for some ``j`` (the log is then undefined).  This
        happens for complete samples with alpha below about 0.5 once m >= 5.
    """
    _check_alpha(alpha)
    if scheme.m > MAX_SUPPORTED_M:
        raise ValueError(f"m = {scheme.m} exceeds the supported maximum {MAX_SUPPORTED_M}")
    return np.array(_scheme_terms_cached(scheme.n, scheme.R, float(alpha)))


def _check_alpha(alpha: float) -> None:
    if not (alpha > 0 and math.isfinite(alpha)) or alpha == 1:
        raise ValueError(f"alpha must be positive and different from 1, got {alpha!r}")


def renyi_entropy_batch(
    x: np.ndarray, scheme: CensoringScheme, alpha: float, w: int
) -> np.ndarray:
    """Vectorised Rényi estimate ``H^alpha(w, n, m)`` for each row of ``x``."""
    const = renyi_scheme_terms(scheme, alpha)
    return _row_sum(log_slopes(x, scheme, w)) + float(np.sum(const)) / (1.0 - alpha)


def renyi_entropy_estimate(sample: ProgressiveSample, alpha: float, w: int) -> EntropyEstimate:
    """Estimate the Rényi entropy of order ``alpha`` of a censored sample.

    Parameters
    ----------
    sample : ProgressiveSample
        Observed failure times with their scheme; needs ``m >= 2``.
    alpha : float
        Entropy order, positive and not 1.
    w : int
        Window size of the spacings.

    Returns
    -------
    EntropyEstimate
        ``per_term[j] = (1 - alpha) log A_{j,w} + log(c_{j-1} S_j)``.
    """
    scheme = sample.scheme
    const = renyi_scheme_terms(scheme, alpha)
    per_term = (1.0 - alpha) * log_slopes(sample.x, scheme, w) + const
    value = float(np.sum(per_term) / (1.0 - alpha))
    per_term.setflags(write=False)
    return EntropyEstimate(value=value, alpha=float(alpha), w=int(w), per_term=per_term)


def _censoring_correction(scheme: CensoringScheme) -> float:
    frac = 1.0 - scheme.m / scheme.n
    return 0.0 if frac == 0.0 else frac * math.log(frac)


def shannon_entropy_batch(x: np.ndarray, scheme: CensoringScheme, w: int) -> np.ndarray:
    return _row_sum(log_slopes(x, scheme, w)) / scheme.n - _censoring_correction(scheme)


def shannon_entropy_estimate(sample: ProgressiveSample, w: int) -> float:
    """Shannon spacings estimate ``H(w, n, m)`` (already divided by ``n``).

    ``(1/n) sum_i log((x_{i+w} - x_{i-w}) / (p_{i+w} - p_{i-w}))
    - (1 - m/n) log(1 - m/n)`` with the same clamping as the Rényi
    estimator; the correction vanishes for complete samples.
    """
    return float(shannon_entropy_batch(sample.x, sample.scheme, w))


# ---------------------------------------------------------------------------
# quadrature oracle


@dataclass(frozen=True)
class JointEntropyCheck:
    """Both evaluations of the joint Rényi entropy of ``X_{1:m:n}..X_{m:m:n}``.

    ``single_integral`` is ``-log c`` plus the sum of the ``m`` one-dimensional
    log integrals; ``nested`` integrates the joint density directly (only
    for ``m <= 3``, else ``None``).
    """

    single_integral: float
    nested: float | None
    log_c: float
    integrals: tuple[float, ...]

    @property
    def discrepancy(self) -> float:
        if self.nested is None:
            return math.nan
        return abs(self.single_integral - self.nested)


def _quad(fn, lo, hi, what: str, tol: float = 1e-10, points=None) -> float:
    value, err = integrate.quad(fn, lo, hi, epsabs=tol, epsrel=tol, limit=400, points=points)
    if not math.isfinite(value) or err > max(1e-7, 1e-7 * abs(value)):
        raise QuadratureError(f"{what}: quadrature did not converge (estimate {value}, error {err:.2e})")
    return value


def joint_renyi_entropy_numeric(
    scheme: CensoringScheme, d: Distribution, alpha: float, nested: bool = True
) -> JointEntropyCheck:
    """Joint Rényi entropy of the censored order statistics by quadrature.

    All integrals are taken in probability coordinates ``u = F(x)`` over
    ``(0, 1)``, which keeps the domains finite.  The single-integral form uses
    the marginal density ``c_{j-1} f(x) sum_i a_{i,j} (1-F(x))^(gamma_i - 1)``
    and the matching marginal survival function.
    """
    _check_alpha(alpha)
    m = scheme.m
    g = gamma_coeffs(scheme)
    log_c = log_normalizing_constant(scheme)

    integrals = []
    for j in range(1, m + 1):
        a = a_coeffs(scheme, j)
        cj = float(np.prod(g[:j]))
        gj = g[:j]

        def integrand(u, a=a, cj=cj, gj=gj):
            s = 1.0 - u
            if s <= 0.0:
                return 0.0
            dens = cj * math.fsum(a * s ** (gj - 1.0))
            surv = cj * math.fsum(a * s**gj / gj)
            if dens <= 0.0 or surv <= 0.0:
                return 0.0
            hazard = d.density_quantile(u) / s
            return dens * hazard ** (alpha - 1.0) * surv ** (alpha - 1.0)

        integrals.append(_quad(integrand, 0.0, 1.0, f"marginal integral j={j}", points=[0.5]))
    single = -log_c + sum(math.log(v) for v in integrals) / (1.0 - alpha)

    joint = None
    if nested and m <= 3:
        joint = _nested_joint(scheme, d, alpha, log_c)
    return JointEntropyCheck(
        single_integral=single, nested=joint, log_c=log_c, integrals=tuple(integrals)
    )


def _nested_joint(scheme: CensoringScheme, d: Distribution, alpha: float, log_c: float) -> float:
    # tanh-sinh rule on the ordered simplex, accepted once halving h changes little
    estimates = []
    for h in _NESTED_STEPS[scheme.m]:
        estimates.append(_nested_tanh_sinh(scheme, d, alpha, h))
        if len(estimates) > 1 and abs(estimates[-1] - estimates[-2]) <= _NESTED_RTOL * estimates[-1]:
            return (alpha * log_c + math.log(estimates[-1])) / (1.0 - alpha)
    raise QuadratureError(
        f"nested joint integral did not converge; estimates for decreasing step: {estimates}"
    )


_NESTED_STEPS = {1: (1 / 8, 1 / 16, 1 / 32, 1 / 64), 2: (1 / 8, 1 / 16, 1 / 32, 1 / 64), 3: (1 / 8, 1 / 16, 1 / 32)}
_NESTED_RTOL = 1e-9
_TANH_SINH_HALF_WIDTH = 4.5


def _tanh_sinh_nodes(h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes ``u``, complements ``1 - u`` and weights on (0, 1)."""
    k = np.arange(-int(_TANH_SINH_HALF_WIDTH / h), int(_TANH_SINH_HALF_WIDTH / h) + 1)
    tau = k * h
    z = 0.5 * math.pi * np.sinh(tau)
    u = 1.0 / (1.0 + np.exp(-2.0 * z))
    s = 1.0 / (1.0 + np.exp(2.0 * z))
    wt = h * 0.25 * math.pi * np.cosh(tau) / np.cosh(z) ** 2
    keep = (u > 0) & (s > 0) & (wt > 0)
    return u[keep], s[keep], wt[keep]


def _nested_tanh_sinh(scheme: CensoringScheme, d: Distribution, alpha: float, h: float) -> float:
    nu, ns, nw = _tanh_sinh_nodes(h)
    m = scheme.m
    # u_m = S(t_m), u_k = u_{k+1} S(t_k); complements kept exact
    upper = np.ones(())
    upper_c = np.zeros(())
    total = np.ones(())
    for k in range(m - 1, -1, -1):
        shape = upper.shape + (nu.size,)
        u = (upper[..., None] * nu).reshape(shape)
        s = (upper_c[..., None] + upper[..., None] * ns).reshape(shape)
        jac = upper[..., None] * nw
        with np.errstate(all="ignore"):
            dens = np.asarray(d.density_quantile(u, s))
            f = dens ** (alpha - 1.0) * s ** (alpha * scheme.R[k])
        f = np.where(np.isfinite(f) & (dens > 0), f, 0.0)
        total = total[..., None] * f * jac
        upper, upper_c = u, s
    value = float(np.sum(total))
    if not (math.isfinite(value) and value > 0):
        raise QuadratureError(f"nested joint integral evaluated to {value!r}")
    return value
