"""Spike-and-slab model for binomial counts with a point null at 1/2.

Each object j contributes X_j ~ Bin(m_j, theta_j). The prior puts mass
1 - w on theta_j = 1/2 and spreads w uniformly on [0, 1], so the slab
marginal of X_j is the constant 1 / (m_j + 1).

Everything is driven by the log likelihood ratio

    lr(x) = log g(x) - log phi(x),      beta(x) = exp(lr(x)) - 1,

tabulated once per trial count on the lattice 0..m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .binom_core import log_pmf_array, survival_array

CL_FACTOR_LOG = 0.5 * math.log(2.0 / math.pi)


@dataclass(frozen=True)
class CountsDataset:
    """Success counts with per-object trial counts and optional truth."""

    counts: np.ndarray
    trials: np.ndarray
    truth: Optional[np.ndarray] = None
    ids: Optional[tuple] = None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        trials = np.asarray(self.trials)
        if trials.ndim == 0:
            trials = np.full(counts.shape, int(trials))
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("counts must be a non-empty vector")
        if trials.shape != counts.shape:
            raise ValueError("counts and trials must have the same length")
        if not (np.all(counts == np.round(counts)) and np.all(trials == np.round(trials))):
            raise ValueError("counts and trials must be integers")
        counts = counts.astype(np.int64)
        trials = trials.astype(np.int64)
        if np.any(trials < 1):
            raise ValueError("trial counts must be positive")
        if np.any((counts < 0) | (counts > trials)):
            raise ValueError("every count must lie in [0, m_j]")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "trials", trials)
        if self.truth is not None:
            truth = np.asarray(self.truth, dtype=float)
            if truth.shape != counts.shape:
                raise ValueError("truth must match counts in length")
            object.__setattr__(self, "truth", truth)
        if self.ids is not None and len(self.ids) != counts.size:
            raise ValueError("ids must match counts in length")

    @classmethod
    def homogeneous(cls, counts: Sequence[int], m: int, truth=None) -> "CountsDataset":
        counts = np.asarray(counts)
        return cls(counts, np.full(counts.shape, int(m)), truth)

    @property
    def n(self) -> int:
        return int(self.counts.size)

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.trials == self.trials[0]))


@dataclass(frozen=True)
class WeightEstimate:
    w_hat: float
    at_lower_boundary: bool
    at_upper_boundary: bool
    score_at_w: float
    iterations: int


# ---------------------------------------------------------------------------
# lattice tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _lattice(m: int):
    """(log phi, lr) on 0..m for the null Bin(m, 1/2); read-only arrays."""
    x = np.arange(m + 1)
    log_phi = log_pmf_array(m, 0.5, x)
    lr = -math.log(m + 1.0) - log_phi
    log_phi.setflags(write=False)
    lr.setflags(write=False)
    return log_phi, lr


@lru_cache(maxsize=64)
def _log_tail_ratio(m: int, exclusive: bool):
    """log(Gbar(u) / Bbar(u)) for u = 0..m, Bbar inclusive under the null."""
    S = survival_array(m, 0.5)[: m + 1]
    log_phi, _ = _lattice(m)
    with np.errstate(divide="ignore"):
        log_S = np.log(S)
    tiny = S < 1e-280
    if np.any(tiny):
        acc = np.logaddexp.accumulate(log_phi[::-1])[::-1]
        log_S[tiny] = acc[tiny]
    u = np.arange(m + 1)
    with np.errstate(divide="ignore"):
        log_G = np.log((m - u + (0 if exclusive else 1)) / (m + 1.0))
    out = log_G - log_S
    out.setflags(write=False)
    return out


def _fold(m, x):
    """max(x, m - x): distance from the centre expressed as an upper count."""
    x = np.asarray(x)
    return np.maximum(x, m - x)


def _check_x(m, x):
    xa = np.asarray(x)
    if np.any((xa < 0) | (xa > m)) or np.any(xa != np.round(xa)):
        raise ValueError(f"x must be integers in [0, {m}]")
    return xa.astype(np.int64)


def _check_m(m):
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def _scalar_or_array(x, val):
    return float(val) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------------------
# slab marginals and beta functions
# ---------------------------------------------------------------------------

def g_slab(m: int) -> float:
    m = _check_m(m)
    return 1.0 / (m + 1.0)


def g_slab_alpha(m: int, x: int, alpha: int) -> float:
    """Beta(alpha, alpha)-slab marginal of a count x out of m."""
    m = _check_m(m)
    if not 0 <= x <= m:
        raise ValueError("x must lie in [0, m]")
    if alpha < 1 or int(alpha) != alpha:
        raise ValueError("alpha must be a positive integer")
    gl = special.gammaln
    val = (
        gl(m + 1) - gl(x + 1) - gl(m - x + 1)
        + gl(2 * alpha) + gl(x + alpha) + gl(m - x + alpha)
        - 2 * gl(alpha) - gl(m + 2 * alpha)
    )
    return float(np.exp(val))


def slab_posterior_params(x: int, m: int) -> tuple:
    """Beta parameters of the slab posterior for theta given x of m."""
    m = _check_m(m)
    if not 0 <= x <= m:
        raise ValueError("x must lie in [0, m]")
    return (x + 1, m - x + 1)


def log_ratio(m: int, x):
    """lr(x) = log g - log phi(x) on the lattice."""
    m = _check_m(m)
    xi = _check_x(m, x)
    return _scalar_or_array(x, _lattice(m)[1][xi])


def beta_fn(m: int, x):
    return _scalar_or_array(x, np.expm1(log_ratio(m, x)))


def _beta_w_from_lr(lr, w):
    lr = np.asarray(lr, dtype=float)
    out = np.empty(lr.shape)
    pos = lr > 0
    # for large lr divide through by exp(lr) so nothing overflows
    e = np.exp(-lr[pos])
    em1 = -np.expm1(-lr[pos])
    out[pos] = em1 / (e + w * em1)
    b = np.expm1(lr[~pos])
    out[~pos] = b / (1.0 + w * b)
    return out


def beta_w(m: int, x, w: float):
    """beta(x) / (1 + w beta(x))."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    return _scalar_or_array(x, _beta_w_from_lr(log_ratio(m, x), w))


def _log1p_wbeta(lr, w):
    # log(1 + w beta) = log((1 - w) + w exp(lr))
    if w == 0.0:
        return np.zeros_like(lr)
    if w == 1.0:
        return np.array(lr, dtype=float)
    return np.logaddexp(math.log1p(-w), math.log(w) + lr)


# ---------------------------------------------------------------------------
# grouped sufficient statistics
# ---------------------------------------------------------------------------

def _groups(d: CountsDataset, general: bool = False):
    """[(m, xs, multiplicities)] with m ascending and xs ascending within m.

    Objects sharing (m_j, x_j) contribute identical terms, so likelihood and
    score only need each distinct pair once, weighted by its multiplicity.
    ``general`` forces the per-trial-count path even for equal m_j.
    """
    if d.is_homogeneous and not general:
        return [_homogeneous_group(int(d.trials[0]), d.counts)]
    out = []
    for m in np.unique(d.trials):
        out.append(_homogeneous_group(int(m), d.counts[d.trials == m]))
    return out


def _homogeneous_group(m, counts):
    bc = np.bincount(counts, minlength=m + 1)
    xs = np.flatnonzero(bc)
    return m, xs, bc[xs].astype(float)


def _score_terms(groups, w):
    parts = [mult * _beta_w_from_lr(_lattice(m)[1][xs], w) for m, xs, mult in groups]
    return np.concatenate(parts)


def _score_from_groups(groups, w):
    return math.fsum(_score_terms(groups, w).tolist())


def log_marginal(d: CountsDataset, w: float, general: bool = False) -> float:
    """sum_j [log phi_j(X_j) + log(1 + w beta_j(X_j))]."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    terms = []
    for m, xs, mult in _groups(d, general):
        log_phi, lr = _lattice(m)
        terms.append(mult * (log_phi[xs] + _log1p_wbeta(lr[xs], w)))
    return math.fsum(np.concatenate(terms).tolist())


def score(d: CountsDataset, w: float, general: bool = False) -> float:
    """Derivative of ``log_marginal`` in w."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    return _score_from_groups(_groups(d, general), w)


def mmle(d: CountsDataset, tol: float = 1e-12, general: bool = False) -> WeightEstimate:
    """Maximiser of the marginal likelihood over [1/n, 1].

    The score is strictly decreasing, so its sign at the two ends decides
    the boundary cases and bisection finds the interior root. Bisection
    continues past ``tol`` while the score is still visibly non-zero, down
    to the resolution of doubles.
    """
    n = d.n
    if n < 1:
        raise ValueError("empty dataset")
    groups = _groups(d, general)
    lo, hi = 1.0 / n, 1.0
    s_lo = _score_from_groups(groups, lo)
    if s_lo <= 0.0:
        return WeightEstimate(lo, True, False, s_lo, 0)
    s_hi = _score_from_groups(groups, hi)
    if s_hi >= 0.0:
        return WeightEstimate(hi, False, True, s_hi, 0)
    small = 1e-9 * n
    it = 0
    mid, s_mid = 0.5 * (lo + hi), None
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s_mid = _score_from_groups(groups, mid)
        it += 1
        if s_mid == 0.0:
            break
        if s_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol and abs(s_mid) <= small:
            break
    mid = 0.5 * (lo + hi) if s_mid != 0.0 else mid
    return WeightEstimate(mid, False, False, _score_from_groups(groups, mid), it)


# ---------------------------------------------------------------------------
# per-observation statistics
# ---------------------------------------------------------------------------

def _logit(w):
    if w <= 0.0:
        return -math.inf
    if w >= 1.0:
        return math.inf
    return math.log(w) - math.log1p(-w)


def _posterior_null(log_odds_alt):
    """1 / (1 + exp(log_odds_alt)), with the infinite limits handled."""
    return special.expit(-np.asarray(log_odds_alt, dtype=float))


def _check_w(w):
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")


def l_table(m: int, w: float) -> np.ndarray:
    """ell-values for every x in 0..m."""
    m = _check_m(m)
    _check_w(w)
    lr = _lattice(m)[1]
    with np.errstate(invalid="ignore"):
        return _stat_from_log_odds(_logit(w), lr)


def cl_log_factor(m: int) -> float:
    """log of sqrt(2 / (pi m)) (1 + m)."""
    return CL_FACTOR_LOG - 0.5 * math.log(m) + math.log(m + 1.0)


def cl_table(m: int, w: float) -> np.ndarray:
    m = _check_m(m)
    _check_w(w)
    lr = _lattice(m)[1]
    return _stat_from_log_odds(_logit(w), lr + cl_log_factor(m))


def q_table(m: int, w: float, exclusive_tail: bool = False) -> np.ndarray:
    """q-values for every x in 0..m.

    The tail is taken at u = max(x, m - x). By default the slab tail is the
    inclusive (m - u + 1)/(m + 1); ``exclusive_tail`` switches to
    (m - u)/(m + 1), which makes q = 1 at x in {0, m}.
    """
    m = _check_m(m)
    _check_w(w)
    ltr = _log_tail_ratio(m, bool(exclusive_tail))
    u = _fold(m, np.arange(m + 1))
    return _stat_from_log_odds(_logit(w), ltr[u])


def _stat_from_log_odds(logit_w, log_ratio_alt):
    # null posterior = 1 / (1 + exp(logit w + log ratio)); the w = 0 and
    # w = 1 limits are 1 and 0 whenever the ratio is finite and non-zero
    if math.isinf(logit_w):
        r = np.asarray(log_ratio_alt, dtype=float)
        out = np.where(np.isneginf(r), 1.0, 1.0 if logit_w < 0 else 0.0)
        return out.astype(float)
    return _posterior_null(logit_w + np.asarray(log_ratio_alt))


def l_value(m: int, x, w: float):
    xi = _check_x(m, x)
    return _scalar_or_array(x, l_table(m, w)[xi])


def cl_value(m: int, x, w: float):
    xi = _check_x(m, x)
    return _scalar_or_array(x, cl_table(m, w)[xi])


def q_value(m: int, x, w: float, exclusive_tail: bool = False):
    xi = _check_x(m, x)
    return _scalar_or_array(x, q_table(m, w, exclusive_tail)[xi])


STAT_TABLES = {"ell": l_table, "cl": cl_table, "q": q_table}


def statistic(d: CountsDataset, procedure: str, w: float, exclusive_tail: bool = False,
              general: bool = False) -> np.ndarray:
    """Per-object statistic using each object's own trial count."""
    if procedure not in STAT_TABLES:
        raise ValueError(f"unknown procedure {procedure!r}")
    kw = {"exclusive_tail": exclusive_tail} if procedure == "q" else {}
    if d.is_homogeneous and not general:
        return STAT_TABLES[procedure](int(d.trials[0]), w, **kw)[d.counts]
    out = np.empty(d.n)
    for m in np.unique(d.trials):
        sel = d.trials == m
        out[sel] = STAT_TABLES[procedure](int(m), w, **kw)[d.counts[sel]]
    return out
