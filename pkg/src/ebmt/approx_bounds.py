"""Closed-form bounds and approximations for binomial tails.

Each sandwich is returned as a :class:`BoundPair`. Tail quantities that can
underflow are formed in log space first and exponentiated at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .binom_core import (
    BinomParams,
    entropy_T,
    gauss_survival,
    log_pmf,
)


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class CarterDecomposition:
    """Normal-tail representation of P(X >= k) for X ~ Bin(m, 1/2).

    ``approx`` omits the two small correction terms whose constants are not
    explicit; ``log_approx`` carries the same value without underflow.
    """

    epsilon: float
    gamma_eps: float
    approx: float
    a_m_core: float
    log_approx: float


def _check_theta_open(theta):
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta!r}")


def stirling_coeff_bounds(m: int, s: float) -> BoundPair:
    """Bounds on ln C(m, m/2 + m s) from Stirling's formula with explicit remainders.

    The three factorials each carry a remainder a(n) in [1/(12n+1), 1/(12n)],
    which gives a lower and an upper value for the combined correction.
    The smaller factorial must have argument at least one.
    """
    if not 0.0 <= s < 0.5:
        raise ValueError(f"s must lie in [0, 1/2), got {s!r}")
    if m * (0.5 - s) < 1.0:
        raise ValueError("m/2 - m s must be at least 1")
    base = (
        0.5 * math.log(2.0)
        - m * entropy_T(0.5 + s, 0.5)
        + m * math.log(2.0)
        - 0.5 * math.log(math.pi * m * (1.0 - 4.0 * s * s))
    )
    n2 = 6.0 * m + 12.0 * m * s
    n3 = 6.0 * m - 12.0 * m * s
    omega_lo = 1.0 / (12.0 * m + 1.0) - 1.0 / n2 - 1.0 / n3
    omega_hi = 1.0 / (12.0 * m) - 1.0 / (n2 + 1.0) - 1.0 / (n3 + 1.0)
    return BoundPair(base + omega_lo, base + omega_hi)


def _check_tail_args(m, a, theta):
    if not 0.5 <= theta < a < 1.0:
        raise ValueError(f"need 1/2 <= theta < a < 1, got theta={theta}, a={a}")
    if m < 1:
        raise ValueError("m must be positive")


def chernoff_tail(m: int, a: float, theta: float) -> float:
    """exp(-m T(a, theta)), an upper bound on P(X >= m a)."""
    _check_tail_args(m, a, theta)
    return math.exp(-m * entropy_T(a, theta))


def tail_sandwich(m: int, a: float, theta: float) -> BoundPair:
    """Entropy-based sandwich on P(X >= m a) for a above theta.

    ``m a`` is rounded to the nearest integer k and the bounds are evaluated
    at a = k / m, so they refer to the same lattice point as the exact tail.
    """
    _check_tail_args(m, a, theta)
    k = int(round(m * a))
    a = k / m
    if not theta < a < 1.0:
        raise ValueError("rounded m a leaves the open interval (m theta, m)")
    log_core = -m * entropy_T(a, theta) - 0.5 * math.log(2.0 * math.pi * m * a * (1.0 - a))
    lower = math.exp(log_core)
    upper = math.exp(log_core + 1.0 / (12.0 * m)) * a * (1.0 - theta) / (a - theta)
    return BoundPair(lower, upper)


def carter_gamma(eps: float) -> float:
    """((1+e)log(1+e) + (1-e)log(1-e) - e^2) / (2 e^4), increasing on [0, 1)."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    if eps < 0.5:
        e2 = eps * eps
        total, term_pow, r = 0.0, 1.0, 0
        while True:
            term = term_pow / ((2 * r + 3) * (2 * r + 4))
            total += term
            if term < 1e-16:
                return total
            term_pow *= e2
            r += 1
    # closed form: no cancellation once eps is not small
    num = (1 + eps) * math.log1p(eps) + (1 - eps) * math.log1p(-eps) - eps * eps
    return num / (2.0 * eps ** 4)


def carter_tail(m: int, k: int) -> CarterDecomposition:
    if m < 28:
        raise ValueError("m must be at least 28")
    if not m / 2 < k <= m - 1:
        raise ValueError(f"k must satisfy m/2 < k <= m-1, got {k}")
    M = m - 1
    K = k - 1
    eps = (2.0 * K - M) / M
    if eps < 0:
        # k = (m+1)/2 for odd m puts K exactly at M/2
        eps = 0.0
    gam = carter_gamma(eps)
    core = -M * eps ** 4 * gam - 0.5 * math.log1p(-eps * eps)
    z = eps * math.sqrt(M)
    log_approx = float(special.log_ndtr(-z)) + core
    return CarterDecomposition(
        epsilon=eps,
        gamma_eps=gam,
        approx=math.exp(log_approx),
        a_m_core=core,
        log_approx=log_approx,
    )


def _log_mckay_lower(m, theta, k):
    sigma = math.sqrt(m * theta * (1.0 - theta))
    z = (k - m * theta) / sigma
    if m == 1:
        lp = 0.0 if k == 1 else -math.inf  # Bin(0, theta) is a point mass at 0
    else:
        lp = log_pmf(BinomParams(m - 1, theta), k - 1)
    log_y = 0.5 * math.log(math.pi / 2.0) + math.log(special.erfcx(z / math.sqrt(2.0)))
    return math.log(sigma) + lp + log_y, sigma, z


def mckay_bounds(m: int, theta: float, k: int, log: bool = False) -> BoundPair:
    """Sandwich from the representation sigma * Bin(k-1; m-1, theta) * Y(z) * exp(E/sigma).

    With ``log=True`` both ends are natural logs, which avoids underflow deep
    in the tail.
    """
    _check_theta_open(theta)
    if not m * theta <= k <= m:
        raise ValueError("need m theta <= k <= m")
    if k == m * theta:
        raise ValueError("z must be positive")
    lo, sigma, z = _log_mckay_lower(m, theta, k)
    hi = lo + min(math.sqrt(math.pi / 8.0), 1.0 / z) / sigma
    if log:
        return BoundPair(lo, hi)
    return BoundPair(math.exp(lo), math.exp(hi))


def slud_lower(m: int, theta: float, k: int) -> float:
    """Normal lower bound on P(X >= k) when k is at or below the mean.

    The standardisation uses sqrt(m theta), without the (1 - theta) factor.
    """
    _check_theta_open(theta)
    if k > m * theta:
        raise ValueError("need k <= m theta")
    return gauss_survival((k - m * theta) / math.sqrt(m * theta))


def mills_ratio_bounds(m: int, theta: float, k: int) -> BoundPair:
    """Bounds on P(X >= k) / P(X = k) above the mean."""
    _check_theta_open(theta)
    if not m * theta < k <= m:
        raise ValueError("need m theta < k <= m")
    return BoundPair(k / m, k * (1.0 - theta) / (k - m * theta))


def inv_survival_asymptotic(m: int, y: float) -> BoundPair:
    """Leading-order bracket for the inverse tail of Bin(m, 1/2)."""
    if m < 28:
        raise ValueError("m must be at least 28")
    if not 0.0 < y < 0.5:
        raise ValueError("y must lie in (0, 1/2)")
    L = math.log(1.0 / y)
    inner = L - 0.5 * math.log(L) - math.log(4.0 * math.sqrt(math.pi)) if L > 0 else 0.0
    lower = m / 2 + math.sqrt(0.5 * m * max(0.0, inner))
    upper = m / 2 + math.sqrt(m * L / 2.0)
    return BoundPair(lower, upper)


def _third_order(p, x):
    # eps^3 coefficient of the Taylor remainder, evaluated at p + x
    d = p + x - 0.5
    return 8.0 * (2.0 * p + 2.0 * x - 1.0) / (3.0 * (1.0 - 4.0 * d * d) ** 2)


def entropy_sandwich(p: float, eps: float) -> BoundPair:
    """Bounds on T(p + eps, p) from a third-order Taylor expansion.

    The remainder is eps^3 h'''(x) / 6 for some x between 0 and eps, and
    h''' is increasing, so the remainder is bracketed by its values at the
    two ends of that interval.
    """
    if not 0.5 <= p < 1.0:
        raise ValueError("p must lie in [1/2, 1)")
    if not -p < eps < 1.0 - p:
        raise ValueError("eps must lie in (-p, 1-p)")
    quad = eps * eps / (2.0 * p * (1.0 - p))
    if eps == 0.0:
        return BoundPair(0.0, 0.0)
    cube = eps ** 3
    if eps > 0:
        return BoundPair(quad, quad + cube * _third_order(p, eps))
    if eps >= 0.5 - p:
        return BoundPair(quad + cube * _third_order(p, 0.0), quad)
    return BoundPair(quad + cube * _third_order(p, 0.0), quad + cube * _third_order(p, eps))
