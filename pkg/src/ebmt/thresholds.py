"""Rejection thresholds of the three posterior procedures.

A statistic is at most t exactly when a likelihood ratio on the upper half
[m/2, m] drops to r(w, t) = w t / ((1 - w)(1 - t)). Each ratio is decreasing
in the count, so rejecting means |x - m/2| >= m * threshold, where
threshold = eta(r) - 1/2 and eta inverts the ratio (scaled by 1/m).

phi/g is inverted on its gamma-function continuation. The tail ratio
Bbar/Gbar only exists on the lattice and is interpolated linearly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .binom_core import log_pmf_array
from .eb_model import STAT_TABLES, _log_tail_ratio, cl_log_factor

ETA_TOL = 1e-10
TIE_WINDOW = 1e-9

REJECT_ALL = "reject_all"
REJECT_NONE = "reject_none"


def r_of(w: float, t: float) -> float:
    if not (0.0 < w < 1.0 and 0.0 < t < 1.0):
        raise ValueError("w and t must lie in (0, 1)")
    return w * t / ((1.0 - w) * (1.0 - t))


def zeta(m: int, w: float) -> float:
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    if w == 0.0:
        return math.inf
    return math.sqrt(math.log(1.0 / w) / (2.0 * m))


def _log_phi_over_g(m, x):
    """Continuous log(phi/g) for real x in [0, m]."""
    return float(log_pmf_array(m, 0.5, np.array([float(x)]))[0]) + math.log(m + 1.0)


def _bisect_decreasing(f, target, lo, hi, tol):
    """Root of f(x) = target for f decreasing on [lo, hi] with f(lo) > target >= f(hi)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _invert_log_ratio(m, log_u):
    """(x, clamp) with log(phi/g)(x) = log_u on [m/2, m]."""
    top = _log_phi_over_g(m, m / 2)
    bottom = _log_phi_over_g(m, m)
    if log_u >= top:
        return m / 2, REJECT_ALL
    if log_u < bottom:
        return float(m), REJECT_NONE
    if log_u == bottom:
        return float(m), None
    x = _bisect_decreasing(lambda v: _log_phi_over_g(m, v), log_u, m / 2, float(m), ETA_TOL * m)
    return x, None


def _eta_l_info(m, u):
    if u <= 0:
        return 1.0, REJECT_NONE
    x, clamp = _invert_log_ratio(m, math.log(u))
    return x / m, clamp


def _eta_cl_info(m, u):
    if u <= 0:
        return 1.0, REJECT_NONE
    x, clamp = _invert_log_ratio(m, math.log(u) + cl_log_factor(m))
    return x / m, clamp


def _q_lattice(m, exclusive=False):
    """(ks, R) for k = ceil(m/2)..m with R(k) = Bbar(k)/Gbar(k)."""
    ks = np.arange(math.ceil(m / 2), m + 1)
    R = np.exp(-_log_tail_ratio(m, exclusive)[ks])
    return ks, R


def _eta_q_info(m, u):
    ks, R = _q_lattice(m)
    if u <= 0 or u < R[-1]:
        return 1.0, REJECT_NONE
    if u >= R[0]:
        return float(ks[0] / m), REJECT_ALL
    # first lattice point with R <= u; R is decreasing along ks
    i = int(np.argmax(R <= u))
    a, b = R[i - 1], R[i]
    frac = (a - u) / (a - b)
    return float((ks[i - 1] + frac) / m), None


def eta_l(m: int, u: float, with_flag: bool = False):
    """(1/m) (phi/g)^{-1}(u) on the upper half, in [1/2, 1]."""
    eta, flag = _eta_l_info(m, u)
    return (eta, flag) if with_flag else eta


def eta_cl(m: int, u: float, with_flag: bool = False):
    """eta_l at sqrt(2)(1+m)u/sqrt(pi m)."""
    eta, flag = _eta_cl_info(m, u)
    return (eta, flag) if with_flag else eta


def eta_q(m: int, u: float, with_flag: bool = False):
    """(1/m) (Bbar/Gbar)^{-1}(u) by linear interpolation between lattice points."""
    eta, flag = _eta_q_info(m, u)
    return (eta, flag) if with_flag else eta


def log_beta_continuous(m: int, x: float) -> float:
    """log(1 + beta(x)) = log g - log phi on the continuous extension."""
    return -_log_phi_over_g(m, x)


def xi(m: int, w: float) -> float:
    """Solution of beta(m/2 + m xi) = 1/w on [0, 1/2]."""
    if not 0.0 < w < 1.0:
        raise ValueError("w must lie in (0, 1)")
    target = math.log1p(1.0 / w)
    top = log_beta_continuous(m, m)
    if target > top * (1 + 1e-15):
        raise ValueError("1/w exceeds beta(m); no solution on [0, 1/2]")
    if target >= top:
        return 0.5
    f = lambda s: -log_beta_continuous(m, m / 2 + m * s)
    return _bisect_decreasing(f, -target, 0.0, 0.5, ETA_TOL)


def nu(m: int) -> float:
    """Solution of beta(m/2 + m nu) = 0."""
    if m < 2:
        raise ValueError("m must be at least 2")
    f = lambda s: -log_beta_continuous(m, m / 2 + m * s)
    return _bisect_decreasing(f, 0.0, 0.0, 0.5, ETA_TOL)


def _log_c(m):
    # log(sqrt(2)(m+1)/sqrt(pi m))
    return 0.5 * math.log(2.0) + math.log(m + 1.0) - 0.5 * math.log(math.pi * m)


def xi_asymptotic(m: int, w: float) -> float:
    return math.sqrt((math.log1p(1.0 / w) + _log_c(m)) / (2.0 * m))


def nu_asymptotic(m: int) -> float:
    return math.sqrt(_log_c(m) / (2.0 * m))


@dataclass(frozen=True)
class ThresholdSet:
    m: int
    w: float
    t: float
    r_wt: float
    zeta: float
    xi: Optional[float]
    nu: float
    t_l: float
    t_cl: float
    t_q: float
    clamp_l: Optional[str] = None
    clamp_cl: Optional[str] = None
    clamp_q: Optional[str] = None

    def threshold(self, procedure: str):
        return {
            "ell": (self.t_l, self.clamp_l),
            "cl": (self.t_cl, self.clamp_cl),
            "q": (self.t_q, self.clamp_q),
        }[procedure]

    def reject(self, procedure: str, x) -> np.ndarray:
        """Reject when |x - m/2| >= m * threshold.

        Counts within ``TIE_WINDOW * m`` of the boundary are settled by
        evaluating the statistic itself.
        """
        thr, clamp = self.threshold(procedure)
        x = np.asarray(x, dtype=np.int64)
        dist = np.abs(x - self.m / 2)
        if clamp == REJECT_NONE:
            return np.zeros(x.shape, dtype=bool)
        if clamp == REJECT_ALL:
            return np.ones(x.shape, dtype=bool)
        edge = self.m * thr
        out = dist >= edge
        near = np.abs(dist - edge) <= TIE_WINDOW * self.m
        if np.any(near):
            table = STAT_TABLES[procedure](self.m, self.w)
            out[near] = table[x[near]] <= self.t
        return out


def threshold_set(m: int, w: float, t: float) -> ThresholdSet:
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    r = r_of(w, t)
    el, fl = _eta_l_info(m, r)
    ec, fc = _eta_cl_info(m, r)
    eq, fq = _eta_q_info(m, r)
    try:
        x = xi(m, w)
    except ValueError:
        x = None
    return ThresholdSet(
        m=int(m), w=w, t=t, r_wt=r,
        zeta=zeta(m, w), xi=x, nu=nu(m) if m >= 2 else math.nan,
        t_l=el - 0.5, t_cl=ec - 0.5, t_q=eq - 0.5,
        clamp_l=fl, clamp_cl=fc, clamp_q=fq,
    )


def asymptotic_thresholds(m: int, w: float, t: float):
    """Leading-order (t_l, t_cl, t_q); an entry is None outside its domain."""
    r = r_of(w, t)
    L = math.log(1.0 / r)
    t_l = t_cl = t_q = None
    if L + _log_c(m) > 0:
        t_l = math.sqrt((L + _log_c(m)) / (2.0 * m))
    if L > 0:
        t_cl = math.sqrt(L / (2.0 * m))
    if L > 1:
        t_q = math.sqrt((L - math.log(math.sqrt(L))) / (2.0 * m))
    return t_l, t_cl, t_q
