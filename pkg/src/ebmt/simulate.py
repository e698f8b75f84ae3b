"""Seeded Monte Carlo comparison of the testing procedures.

Scenarios are the full factorial of (m, s_frac, theta0), enumerated in that
nesting order. Replicate ``r`` of scenario ``i`` draws from a PCG64 generator
seeded with ``mix64(master_seed, i, r)``. Streams therefore do not depend
on the worker count or scheduling, and results are reassembled by index.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .eb_model import CountsDataset, STAT_TABLES, mmle
from .procedures import PROCEDURES, _p_table

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

RNG_SCHEME = {
    "generator": "numpy.random.PCG64",
    "seed": "mix64(master_seed, scenario_index, replicate_index)",
    "mix64": (
        "z = splitmix64(master_seed ^ splitmix64(scenario_index)); "
        "z = splitmix64(z ^ splitmix64(replicate_index))"
    ),
    "splitmix64": (
        "z = (x + 0x9E3779B97F4A7C15) mod 2^64; "
        "z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64; "
        "z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64; "
        "return z ^ (z >> 31)"
    ),
    "scenario_order": "m outer, s_frac middle, theta0 inner; all zero-based",
}


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(master_seed: int, scenario_index: int, replicate_index: int) -> int:
    z = splitmix64((master_seed & MASK64) ^ splitmix64(scenario_index))
    return splitmix64(z ^ splitmix64(replicate_index))


def replicate_rng(master_seed: int, scenario_index: int, replicate_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix64(master_seed, scenario_index, replicate_index)))


def default_theta0_grid() -> List[float]:
    return [round(0.5 + 0.02 * k, 2) for k in range(1, 26)]


@dataclass
class ExperimentConfig:
    n: int = 2000
    m_values: List[int] = field(default_factory=lambda: [85, 200, 1000])
    s_frac_values: List[float] = field(default_factory=lambda: [0.001, 0.1, 0.5])
    theta0_grid: List[float] = field(default_factory=default_theta0_grid)
    t_levels: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2])
    procedures: List[str] = field(default_factory=lambda: list(PROCEDURES))
    replicates: int = 200
    master_seed: int = 20240101

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ValueError("replicates must be a positive integer")
        if not self.m_values or any(int(m) != m or m < 1 for m in self.m_values):
            raise ValueError("m_values must be positive integers")
        for s in self.s_frac_values:
            k = s * self.n
            if not 0.0 <= s <= 1.0 or abs(k - round(k)) > 1e-9:
                raise ValueError(f"s_frac {s} does not give a whole number of signals at n={self.n}")
        if any(not 0.5 < th <= 1.0 for th in self.theta0_grid):
            raise ValueError("theta0 values must lie in (0.5, 1]")
        if any(not 0.0 < t < 1.0 for t in self.t_levels):
            raise ValueError("t levels must lie in (0, 1)")
        bad = [p for p in self.procedures if p not in PROCEDURES]
        if bad:
            raise ValueError(f"unknown procedures {bad}")
        if not 0 <= int(self.master_seed) <= MASK64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def scenarios(self) -> List[Tuple[int, float, float]]:
        return list(itertools.product(self.m_values, self.s_frac_values, self.theta0_grid))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = set(cls.__dataclass_fields__)
        extra = set(data) - names
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class MetricsRow:
    procedure: str
    t: float
    m: int
    s_frac: float
    theta0: float
    replicates: int
    fdr_mean: float
    fdr_mcse: float
    fnr_mean: float
    fnr_mcse: float
    risk_mean: float


@dataclass
class MetricsReport:
    rows: List[MetricsRow]
    w_hats: Dict[Tuple[int, float, float], np.ndarray] = field(default_factory=dict)

    def select(self, **kw) -> List[MetricsRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in kw.items())]

    def get(self, procedure, t, m, s_frac, theta0) -> MetricsRow:
        for r in self.rows:
            if (r.procedure, r.t, r.m, r.s_frac, r.theta0) == (procedure, t, m, s_frac, theta0):
                return r
        raise KeyError((procedure, t, m, s_frac, theta0))


def n_signals(n: int, s_frac: float) -> int:
    return int(round(s_frac * n))


def generate_scenario(n: int, m: int, s_frac: float, theta0: float,
                      rng: np.random.Generator) -> CountsDataset:
    """First s_n objects are signals at theta0, the rest nulls at 1/2."""
    s = n_signals(n, s_frac)
    counts = np.empty(n, dtype=np.int64)
    counts[:s] = rng.binomial(m, theta0, size=s)
    counts[s:] = rng.binomial(m, 0.5, size=n - s)
    truth = np.full(n, 0.5)
    truth[:s] = theta0
    return CountsDataset(counts, np.full(n, m), truth)


def _bh_rejections(p_sorted: np.ndarray, t: float) -> int:
    n = p_sorted.size
    ok = np.flatnonzero(p_sorted <= t * np.arange(1, n + 1) / n)
    return int(ok[-1] + 1) if ok.size else 0


def _replicate(cfg: ExperimentConfig, scen_idx: int, rep_idx: int, m: int, s_frac: float,
               theta0: float):
    """fdp and fnp for every (procedure, t), plus the estimated weight."""
    rng = replicate_rng(cfg.master_seed, scen_idx, rep_idx)
    d = generate_scenario(cfg.n, m, s_frac, theta0, rng)
    signal = d.truth != 0.5
    s = int(signal.sum())
    need_w = any(p != "bh" for p in cfg.procedures)
    w = mmle(d).w_hat if need_w else math.nan
    fdp = np.empty((len(cfg.procedures), len(cfg.t_levels)))
    fnp = np.empty_like(fdp)
    for i, proc in enumerate(cfg.procedures):
        if proc == "bh":
            p = _p_table(m)[d.counts]
            order = np.argsort(p, kind="stable")
            for j, t in enumerate(cfg.t_levels):
                k = _bh_rejections(p[order], t)
                rej = np.zeros(d.n, dtype=bool)
                rej[order[:k]] = True
                fdp[i, j], fnp[i, j] = _rates(rej, signal, s)
        else:
            stat = STAT_TABLES[proc](m, w)[d.counts]
            for j, t in enumerate(cfg.t_levels):
                fdp[i, j], fnp[i, j] = _rates(stat <= t, signal, s)
    return fdp, fnp, w


def _rates(rej, signal, s):
    td = int(np.count_nonzero(rej & signal))
    fd = int(np.count_nonzero(rej)) - td
    return fd / max(1, fd + td), (s - td) / max(1, s)


def run_scenario(cfg: ExperimentConfig, scen_idx: int):
    m, s_frac, theta0 = cfg.scenarios()[scen_idx]
    R = cfg.replicates
    P, T = len(cfg.procedures), len(cfg.t_levels)
    fdp = np.empty((R, P, T))
    fnp = np.empty((R, P, T))
    w = np.empty(R)
    for r in range(R):
        fdp[r], fnp[r], w[r] = _replicate(cfg, scen_idx, r, m, s_frac, theta0)
    return fdp, fnp, w


def _run_scenario_star(args):
    return run_scenario(*args)


def _mean_mcse(v: np.ndarray) -> Tuple[float, float]:
    R = v.size
    mean = math.fsum(v.tolist()) / R
    if R == 1:
        return mean, 0.0
    var = math.fsum(((v - mean) ** 2).tolist()) / (R - 1)
    return mean, math.sqrt(var / R)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> MetricsReport:
    cfg.validate()
    scen = cfg.scenarios()
    jobs = [(cfg, i) for i in range(len(scen))]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_scenario_star, jobs))
    else:
        results = [run_scenario(*j) for j in jobs]
    rows = []
    w_hats = {}
    for (m, s_frac, theta0), (fdp, fnp, w) in zip(scen, results):
        w_hats[(m, s_frac, theta0)] = w
        for i, proc in enumerate(cfg.procedures):
            for j, t in enumerate(cfg.t_levels):
                fm, fse = _mean_mcse(fdp[:, i, j])
                nm, nse = _mean_mcse(fnp[:, i, j])
                rk = math.fsum((fdp[:, i, j] + fnp[:, i, j]).tolist()) / cfg.replicates
                rows.append(MetricsRow(proc, t, m, s_frac, theta0, cfg.replicates,
                                       fm, fse, nm, nse, rk))
    return MetricsReport(rows, w_hats)
