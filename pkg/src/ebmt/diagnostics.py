"""Exact moments of the score terms and the weight equations built on them.

All expectations are finite sums over the lattice 0..m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .binom_core import log_pmf_array
from .eb_model import _beta_w_from_lr, _lattice


@dataclass(frozen=True)
class MomentReport:
    m_tilde: float
    m1: float
    m2: float
    at: Tuple[int, float, float]


def _check_w(w):
    if not 0.0 < w <= 1.0:
        raise ValueError("w must lie in (0, 1]")


def _weights(m, theta):
    return np.exp(log_pmf_array(m, theta, np.arange(m + 1)))


def m_tilde(m: int, w: float) -> float:
    """-E_{1/2} beta(X, w)."""
    _check_w(w)
    log_phi, lr = _lattice(int(m))
    return -math.fsum((_beta_w_from_lr(lr, w) * np.exp(log_phi)).tolist())


def m1(m: int, theta: float, w: float) -> float:
    """E_theta beta(X, w)."""
    _check_w(w)
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if theta == 0.5:
        return -m_tilde(m, w)
    _, lr = _lattice(int(m))
    return math.fsum((_beta_w_from_lr(lr, w) * _weights(m, theta)).tolist())


def m2(m: int, theta: float, w: float) -> float:
    """E_theta beta(X, w)^2."""
    _check_w(w)
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    _, lr = _lattice(int(m))
    return math.fsum((_beta_w_from_lr(lr, w) ** 2 * _weights(m, theta)).tolist())


def moment_report(m: int, theta: float, w: float) -> MomentReport:
    return MomentReport(m_tilde(m, w), m1(m, theta, w), m2(m, theta, w), (int(m), theta, w))


def _bisect_increasing(f, lo, hi, tol=1e-14, max_iter=200):
    """Root of increasing f on [lo, hi] given f(lo) <= 0 <= f(hi)."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)) or mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_weight_bounds(truth, m: int, kappa: float) -> Tuple[Optional[float], Optional[float]]:
    """Roots w1, w2 of sum_signals m1(theta_j, w) = (1 -/+ kappa)(n - s0) m_tilde(w).

    Both are searched on [1/n, 1/log n] through the decreasing ratio
    sum m1 / m_tilde; a side without a sign change returns None.
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    truth = np.asarray(truth, dtype=float)
    n = truth.size
    if n < 3:
        raise ValueError("need n >= 3 so that 1/n < 1/log n")
    thetas, mult = np.unique(truth[truth != 0.5], return_counts=True)
    s0 = int(mult.sum())
    if s0 == 0:
        return None, None
    lo, hi = 1.0 / n, 1.0 / math.log(n)

    def ratio(w):
        total = math.fsum(c * m1(m, th, w) for th, c in zip(thetas, mult))
        return total / m_tilde(m, w)

    r_lo, r_hi = ratio(lo), ratio(hi)

    def solve(target):
        if not r_hi <= target <= r_lo:
            return None
        return _bisect_increasing(lambda w: target - ratio(w), lo, hi)

    w1 = solve((1.0 - kappa) * (n - s0))
    w2 = solve((1.0 + kappa) * (n - s0))
    return w1, w2


def solve_w0(m: int, n: int, delta_n: float) -> float:
    """Root of n w m_tilde(w) = delta_n, with 1.1 <= delta_n <= n/10."""
    if not 1.1 <= delta_n <= n / 10.0:
        raise ValueError("delta_n must lie in [1.1, n/10]")
    f = lambda w: n * w * m_tilde(m, w) - delta_n
    lo, hi = 1.0 / n, 1.0
    if f(lo) >= 0:
        return lo
    if f(hi) < 0:
        raise ValueError("n w m_tilde(w) never reaches delta_n on [1/n, 1]")
    return _bisect_increasing(f, lo, hi)
