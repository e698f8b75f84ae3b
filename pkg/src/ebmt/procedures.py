"""Multiple-testing decisions and their error rates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .binom_core import survival_array
from .eb_model import CountsDataset, STAT_TABLES, _fold, _lattice, mmle, statistic
from .thresholds import r_of, threshold_set

PROCEDURES = ("ell", "cl", "q", "bh")
POSTERIOR_PROCEDURES = ("ell", "cl", "q")


@dataclass(frozen=True)
class ProcedureDecision:
    procedure: str
    t: float
    w_used: float
    reject: np.ndarray
    statistic: np.ndarray

    @property
    def n_rejected(self) -> int:
        return int(self.reject.sum())


@dataclass(frozen=True)
class ConfusionCounts:
    fd: int
    td: int
    fn: int
    tn: int
    n_signals: int
    n_nulls: int


def _check_t(t):
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t!r}")


def decide(d: CountsDataset, procedure: str, t: float, w_override: Optional[float] = None,
           exclusive_tail: bool = False, general: bool = False) -> ProcedureDecision:
    """Reject object j when its statistic is at most t.

    The weight is the marginal maximum likelihood estimate unless
    ``w_override`` is given; all three posterior procedures share it.
    """
    _check_t(t)
    if procedure == "bh":
        return bh_decide(d, t)
    if procedure not in POSTERIOR_PROCEDURES:
        raise ValueError(f"unknown procedure {procedure!r}")
    if w_override is None:
        w = mmle(d, general=general).w_hat
    else:
        if not 0.0 < w_override <= 1.0:
            raise ValueError("w must lie in (0, 1]")
        w = float(w_override)
    stat = statistic(d, procedure, w, exclusive_tail=exclusive_tail, general=general)
    return ProcedureDecision(procedure, t, w, stat <= t, stat)


def decide_by_threshold(d: CountsDataset, procedure: str, t: float, w: float) -> np.ndarray:
    """Same decisions as :func:`decide`, made by comparing |x - m/2| with m * threshold."""
    _check_t(t)
    out = np.empty(d.n, dtype=bool)
    for m in np.unique(d.trials):
        sel = d.trials == m
        ts = threshold_set(int(m), w, t)
        out[sel] = ts.reject(procedure, d.counts[sel])
    return out


@lru_cache(maxsize=64)
def _p_table(m: int) -> np.ndarray:
    S = survival_array(m, 0.5)
    u = _fold(m, np.arange(m + 1))
    p = np.minimum(1.0, 2.0 * S[u])
    if m % 2 == 0:
        p[m // 2] = 1.0
    p.setflags(write=False)
    return p


def p_value_two_sided(m: int, x) -> float:
    """Exact two-sided p-value of x under Bin(m, 1/2), doubling the far tail."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    xa = np.asarray(x)
    if np.any((xa < 0) | (xa > m)):
        raise ValueError("x must lie in [0, m]")
    val = _p_table(int(m))[xa.astype(np.int64)]
    return float(val) if np.ndim(x) == 0 else val


def bh_decide(d: CountsDataset, t: float) -> ProcedureDecision:
    """Benjamini-Hochberg step-up at level t."""
    _check_t(t)
    p = np.empty(d.n)
    for m in np.unique(d.trials):
        sel = d.trials == m
        p[sel] = _p_table(int(m))[d.counts[sel]]
    n = d.n
    order = np.argsort(p, kind="stable")
    crit = t * np.arange(1, n + 1) / n
    ok = np.flatnonzero(p[order] <= crit)
    reject = np.zeros(n, dtype=bool)
    if ok.size:
        reject[order[: ok[-1] + 1]] = True
    return ProcedureDecision("bh", t, math.nan, reject, p)


def confusion(dec: ProcedureDecision, truth) -> ConfusionCounts:
    if truth is None:
        raise ValueError("truth labels are required")
    truth = np.asarray(truth, dtype=float)
    if truth.shape != dec.reject.shape:
        raise ValueError("truth and decisions differ in length")
    null = truth == 0.5
    rej = dec.reject
    fd = int(np.sum(rej & null))
    td = int(np.sum(rej & ~null))
    fn = int(np.sum(~rej & ~null))
    tn = int(np.sum(~rej & null))
    return ConfusionCounts(fd, td, fn, tn, td + fn, fd + tn)


def fdp(c: ConfusionCounts) -> float:
    return c.fd / max(1, c.fd + c.td)


def fnp(c: ConfusionCounts) -> float:
    return c.fn / max(1, c.n_signals)


def risk(c: ConfusionCounts) -> float:
    return fdp(c) + fnp(c)


def null_rejection_prob(procedure: str, m: int, w: float, t: float) -> float:
    """Exact P(statistic <= t) when theta = 1/2."""
    if procedure not in POSTERIOR_PROCEDURES:
        raise ValueError(f"unknown procedure {procedure!r}")
    r_of(w, t)  # validates (w, t)
    stat = STAT_TABLES[procedure](int(m), w)
    log_phi, _ = _lattice(int(m))
    rej = stat <= t
    return math.fsum(np.exp(log_phi[rej]).tolist())
