"""Tail probabilities and critical values used by the learner and verifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

LEARN_ALPHA = 0.05
VERIFY_ALPHA = 0.001


@dataclass(frozen=True)
class SignificanceConfig:
    learn_alpha: float = LEARN_ALPHA
    verify_alpha: float = VERIFY_ALPHA

    def __post_init__(self):
        for a in (self.learn_alpha, self.verify_alpha):
            if not 0.0 < a < 1.0:
                raise ValueError(f"significance level must lie in (0, 1), got {a}")


# Abramowitz & Stegun 26.2.17, |error| < 7.5e-8
_P = 0.2316419
_B = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_upper_tail(z: float) -> float:
    """P(Z >= z) for a standard normal variable."""
    if z < 0.0:
        return 1.0 - normal_upper_tail(-z)
    t = 1.0 / (1.0 + _P * z)
    poly = t * (_B[0] + t * (_B[1] + t * (_B[2] + t * (_B[3] + t * _B[4]))))
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z) * poly


def normal_quantile_upper(alpha: float) -> float:
    """z with P(Z >= z) = alpha, Abramowitz & Stegun 26.2.23 (|error| < 4.5e-4)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if alpha > 0.5:
        return -normal_quantile_upper(1.0 - alpha)
    t = math.sqrt(-2.0 * math.log(alpha))
    num = 2.515517 + 0.802853 * t + 0.010328 * t * t
    den = 1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t ** 3
    return t - num / den


def upper_tail_prob(n1: float, n: int, p: float) -> float:
    """Normal approximation to P(k >= n1) for k ~ Binomial(n, p)."""
    if n < 1:
        raise ValueError("trial count must be at least 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability {p!r} gives a degenerate (zero-variance) distribution")
    if n1 <= 0:
        return 1.0
    mu = n * p
    sigma = math.sqrt(n * p * (1.0 - p))
    return normal_upper_tail((n1 - mu) / sigma)


def pattern_significant(k: int, n: int, p: float, alpha: float) -> bool:
    """Whether ``k`` occurrences out of ``n`` are more than chance at level ``alpha``.

    One is subtracted from the observed count because the hypothesis was
    suggested by the same data; a single occurrence is never significant.
    """
    if k <= 1:
        return False
    return upper_tail_prob(k - 1, n, p) < alpha


def binomial_tail_exact(n1: int, n: int, p: float) -> float:
    """Exact P(k >= n1) for k ~ Binomial(n, p), summed in log space."""
    if n1 <= 0:
        return 1.0
    if n1 > n:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    lgn = math.lgamma(n + 1)
    logs = [lgn - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lp + (n - j) * lq
            for j in range(n1, n + 1)]
    top = max(logs)
    return math.exp(top) * math.fsum(math.exp(v - top) for v in logs)


# ---------------------------------------------------------------------------
# chi-squared
# ---------------------------------------------------------------------------


def _gamma_series(a: float, x: float) -> float:
    # regularized lower incomplete gamma P(a, x), valid for x < a + 1
    term = total = 1.0 / a
    ap = a
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-15:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a: float, x: float) -> float:
    # regularized upper incomplete gamma Q(a, x) by modified Lentz, x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi_squared_sf(x: float, df: int) -> float:
    """P(chi2(df) >= x)."""
    if x <= 0.0:
        return 1.0
    a, half = df / 2.0, x / 2.0
    if half < a + 1.0:
        return 1.0 - _gamma_series(a, half)
    return _gamma_cont_frac(a, half)


def chi_squared_threshold(df: int, alpha: float) -> float:
    """Critical value x with P(chi2(df) >= x) = alpha.

    Wilson-Hilferty cube-root start, then bisection on the regularized gamma
    tail to tighten it.
    """
    if df < 1:
        raise ValueError("chi-squared test needs at least one degree of freedom (two features)")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    z = normal_quantile_upper(alpha)
    c = 2.0 / (9.0 * df)
    guess = df * max(1.0 - c + z * math.sqrt(c), 1e-3) ** 3

    lo, hi = guess, guess
    while chi_squared_sf(lo, df) < alpha:
        lo /= 2.0
    while chi_squared_sf(hi, df) > alpha:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if chi_squared_sf(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)
