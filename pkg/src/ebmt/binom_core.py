"""Log-space binomial and standard normal utilities.

Binomial log densities use Loader's saddle-point decomposition
(``stirlerr`` + ``bd0``), which keeps relative error near machine precision
for trial counts in the millions where naive log-gamma differences lose
about ``log10(m)`` digits.

Tail probabilities follow the inclusive convention ``survival(k) = P(X >= k)``
everywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LN_2PI = math.log(2.0 * math.pi)

# Stirling series coefficients for the error term of log(n!)
_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0

_TAIL_CHUNK = 4096
_INV_SLACK = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class BinomParams:
    """Trial count ``m`` and success probability ``theta``."""

    m: int
    theta: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")


def _check_params(m, theta):
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")


# ---------------------------------------------------------------------------
# Loader's saddle point pieces, vectorised over real arguments
# ---------------------------------------------------------------------------

def stirlerr(n):
    """log(n!) - log(sqrt(2 pi n) (n/e)^n) for real n > 0."""
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n <= 15.0
    if np.any(small):
        ns = n[small]
        with np.errstate(divide="ignore", invalid="ignore"):
            out[small] = special.gammaln(ns + 1.0) - (ns + 0.5) * np.log(ns) + ns - LN_SQRT_2PI
    big = ~small
    if np.any(big):
        nb = n[big]
        nn = nb * nb
        val = np.where(
            nb > 500, (_S0 - _S1 / nn) / nb,
            np.where(
                nb > 80, (_S0 - (_S1 - _S2 / nn) / nn) / nb,
                np.where(
                    nb > 35, (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / nb,
                    (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / nb,
                ),
            ),
        )
        out[big] = val
    return out


def bd0(x, npr):
    """Deviance term x log(x/np) + np - x, accurate when x is close to np."""
    x = np.asarray(x, dtype=float)
    npr = np.asarray(npr, dtype=float)
    x, npr = np.broadcast_arrays(x, npr)
    out = np.empty(x.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.abs(x - npr) < 0.1 * (x + npr)
        far = ~near
        out[far] = x[far] * np.log(x[far] / npr[far]) + npr[far] - x[far]
        if np.any(near):
            xn, pn = x[near], npr[near]
            v = (xn - pn) / (xn + pn)
            s = (xn - pn) * v
            ej = 2.0 * xn * v
            v2 = v * v
            # |v| < 0.1 so v2 < 0.01; 12 terms reach far below double precision
            for j in range(1, 13):
                ej = ej * v2
                s = s + ej / (2 * j + 1)
            out[near] = s
    return out


def log_pmf_array(m, theta, x):
    """Vectorised natural-log binomial density, real ``x`` in [0, m] allowed.

    Integer ``x`` gives the usual probability mass; real ``x`` gives the
    gamma-function continuation used by the threshold inversions.
    """
    x = np.asarray(x, dtype=float)
    m = float(m)
    theta = float(theta)
    q = 1.0 - theta
    out = np.full(x.shape, -np.inf)
    inside = (x >= 0) & (x <= m)
    if theta == 0.0:
        out[x == 0] = 0.0
        return out
    if q == 0.0:
        out[x == m] = 0.0
        return out
    if theta == 0.5:
        # fold onto the lower half so log_pmf(x) == log_pmf(m - x) exactly
        x = np.minimum(x, m - x)
    lo = inside & (x == 0)
    hi = inside & (x == m)
    mid = inside & ~lo & ~hi
    if np.any(lo):
        out[lo] = m * math.log1p(-theta)
    if np.any(hi):
        out[hi] = m * math.log1p(-q)
    if np.any(mid):
        xm = x[mid]
        lc = (
            stirlerr(np.array([m]))[0]
            - stirlerr(xm)
            - stirlerr(m - xm)
            - bd0(xm, m * theta)
            - bd0(m - xm, m * q)
        )
        lf = _LN_2PI + np.log(xm) + np.log1p(-xm / m)
        out[mid] = lc - 0.5 * lf
    return out


# ---------------------------------------------------------------------------
# Scalar API
# ---------------------------------------------------------------------------

def log_pmf(p: BinomParams, x: int) -> float:
    """ln P(X = x) for X ~ Bin(p.m, p.theta)."""
    if int(x) != x or not 0 <= x <= p.m:
        raise ValueError(f"x must be an integer in [0, {p.m}], got {x!r}")
    return float(log_pmf_array(p.m, p.theta, np.array([x]))[0])


def pmf(p: BinomParams, x: int) -> float:
    return math.exp(log_pmf(p, x))


def _upper_sum(m, theta, k):
    """P(X >= k) summed from k upward; intended for k above the mean."""
    if k > m:
        return 0.0
    terms = []
    total = 0.0
    start = k
    while start <= m:
        stop = min(m, start + _TAIL_CHUNK - 1)
        chunk = np.exp(log_pmf_array(m, theta, np.arange(start, stop + 1)))
        terms.append(chunk)
        total += float(chunk.sum())
        if chunk[-1] <= 1e-20 * total or chunk[-1] == 0.0:
            break
        start = stop + 1
    return math.fsum(np.concatenate(terms))


def _lower_sum(m, theta, k):
    """P(X <= k) summed from k downward; intended for k below the mean."""
    if k < 0:
        return 0.0
    terms = []
    total = 0.0
    stop = k
    while stop >= 0:
        start = max(0, stop - _TAIL_CHUNK + 1)
        chunk = np.exp(log_pmf_array(m, theta, np.arange(stop, start - 1, -1)))
        terms.append(chunk)
        total += float(chunk.sum())
        if chunk[-1] <= 1e-20 * total or chunk[-1] == 0.0:
            break
        stop = start - 1
    return math.fsum(np.concatenate(terms))


def _degenerate_tail(p, k, upper):
    # point mass at 0 (theta = 0) or at m (theta = 1)
    atom = 0 if p.theta == 0.0 else p.m
    if upper:
        return 1.0 if atom >= k else 0.0
    return 1.0 if atom <= k else 0.0


def survival(p: BinomParams, k: int) -> float:
    """Inclusive upper tail P(X >= k), for 0 <= k <= m + 1."""
    if int(k) != k or not 0 <= k <= p.m + 1:
        raise ValueError(f"k must be an integer in [0, {p.m + 1}], got {k!r}")
    k = int(k)
    if k == 0:
        return 1.0
    if k == p.m + 1:
        return 0.0
    if p.theta in (0.0, 1.0):
        return _degenerate_tail(p, k, upper=True)
    if k > p.m * p.theta:
        return _upper_sum(p.m, p.theta, k)
    return 1.0 - _lower_sum(p.m, p.theta, k - 1)


def log_survival(p: BinomParams, k: int) -> float:
    """ln P(X >= k); stays finite where ``survival`` underflows."""
    if int(k) != k or not 0 <= k <= p.m + 1:
        raise ValueError(f"k must be an integer in [0, {p.m + 1}], got {k!r}")
    k = int(k)
    if k <= p.m * p.theta or p.theta in (0.0, 1.0):
        s = survival(p, k)
        return math.log(s) if s > 0 else -math.inf
    lp = log_pmf_array(p.m, p.theta, np.arange(k, p.m + 1))
    return float(special.logsumexp(lp))


def cdf(p: BinomParams, k: int) -> float:
    """P(X <= k), for -1 <= k <= m."""
    if int(k) != k or not -1 <= k <= p.m:
        raise ValueError(f"k must be an integer in [-1, {p.m}], got {k!r}")
    k = int(k)
    if k == -1:
        return 0.0
    if k == p.m:
        return 1.0
    if p.theta in (0.0, 1.0):
        return _degenerate_tail(p, k, upper=False)
    if k < p.m * p.theta:
        return _lower_sum(p.m, p.theta, k)
    return 1.0 - _upper_sum(p.m, p.theta, k + 1)


def survival_array(m: int, theta: float) -> np.ndarray:
    """Inclusive survival P(X >= k) for every k in 0..m+1.

    Each side of the mean is accumulated from its own far tail in extended
    precision, so small tail values keep full relative accuracy.
    """
    _check_params(m, theta)
    out = np.zeros(m + 2)
    if theta in (0.0, 1.0):
        p = BinomParams(m, theta)
        out[: m + 1] = [_degenerate_tail(p, k, True) for k in range(m + 1)]
        return out
    probs = np.exp(log_pmf_array(m, theta, np.arange(m + 1))).astype(np.longdouble)
    upper = np.cumsum(probs[::-1])[::-1]          # P(X >= k)
    lower = np.cumsum(probs)                        # P(X <= k)
    ks = np.arange(m + 1)
    use_upper = ks > m * theta
    res = np.empty(m + 1, dtype=np.longdouble)
    res[use_upper] = upper[use_upper]
    # P(X >= k) = 1 - P(X <= k - 1)
    lower_shift = np.concatenate([[np.longdouble(0.0)], lower[:-1]])
    res[~use_upper] = 1.0 - lower_shift[~use_upper]
    out[: m + 1] = res.astype(float)
    out[0] = 1.0
    return out


def inv_survival(p: BinomParams, y: float) -> int:
    """Smallest k with P(X >= k) <= y.

    The comparison allows a few ulps of slack so that exact boundary values
    such as y = 5/16 for Bin(4, 1/2) land on the inclusive side.
    """
    if not 0.0 < y <= 1.0:
        raise ValueError(f"y must lie in (0, 1], got {y!r}")
    cut = y * (1.0 + _INV_SLACK)
    lo, hi = 0, p.m + 1  # survival(hi) = 0 <= y always
    if survival(p, lo) <= cut:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if survival(p, mid) <= cut:
            hi = mid
        else:
            lo = mid
    return hi


def log_coeff_continuous(m: int, x):
    """ln C(m, x) through the gamma function, real x in [0, m]."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0) | (xa > m)):
        raise ValueError(f"x must lie in [0, {m}]")
    # ln C(m, x) = ln phi_{1/2}(x) + m ln 2
    val = log_pmf_array(m, 0.5, xa) + m * math.log(2.0)
    return float(val) if np.ndim(x) == 0 else val


def entropy_T(a: float, p: float) -> float:
    """Binary relative entropy a log(a/p) + (1-a) log((1-a)/(1-p))."""
    if not 0.0 <= a <= 1.0 or not 0.0 <= p <= 1.0:
        raise ValueError("a and p must lie in [0, 1]")
    return float(special.xlogy(a, a) - special.xlogy(a, p)
                 + special.xlogy(1 - a, 1 - a) - special.xlogy(1 - a, 1 - p))


def gauss_pdf(z):
    return np.exp(-0.5 * np.square(z)) / math.sqrt(2.0 * math.pi) if np.ndim(z) else \
        math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def gauss_survival(z):
    """Upper tail of the standard normal, 1 - Phi(z)."""
    if np.ndim(z):
        return 0.5 * special.erfc(np.asarray(z) / math.sqrt(2.0))
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def gauss_mills(z):
    """Y(z) = (1 - Phi(z)) / phi(z), stable for large z."""
    return math.sqrt(math.pi / 2.0) * special.erfcx(np.asarray(z) / math.sqrt(2.0))
