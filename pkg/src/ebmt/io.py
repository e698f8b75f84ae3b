"""CSV and JSON readers/writers."""
from __future__ import annotations

import csv
import json
from collections import OrderedDict
from pathlib import Path
from typing import Iterable, List

import numpy as np

from .eb_model import CountsDataset
from .procedures import ProcedureDecision
from .simulate import RNG_SCHEME, ExperimentConfig, MetricsReport, MetricsRow

RESULT_COLUMNS = [
    "procedure", "t", "m", "s_frac", "theta0", "replicates",
    "fdr_mean", "fdr_mcse", "fnr_mean", "fnr_mcse", "risk_mean",
]
_FLOAT_COLUMNS = {"t", "s_frac", "theta0", "fdr_mean", "fdr_mcse", "fnr_mean", "fnr_mcse", "risk_mean"}


class InputError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".6g")


def _read_rows(path, expected: List[str]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header != expected:
            raise InputError(f"{path}:1: expected header {','.join(expected)}, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise InputError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def _int(path, lineno, name, value):
    try:
        return int(value)
    except ValueError:
        raise InputError(f"{path}:{lineno}: {name} must be an integer, got {value!r}") from None


def read_counts_csv(path) -> CountsDataset:
    """Counts file with header ``id,x,m``."""
    ids, xs, ms = [], [], []
    for lineno, (oid, x, m) in _read_rows(path, ["id", "x", "m"]):
        x = _int(path, lineno, "x", x)
        m = _int(path, lineno, "m", m)
        if m < 1 or not 0 <= x <= m:
            raise InputError(f"{path}:{lineno}: need m >= 1 and 0 <= x <= m")
        ids.append(oid)
        xs.append(x)
        ms.append(m)
    return CountsDataset(np.array(xs), np.array(ms), ids=tuple(ids))


def read_labels_csv(path) -> CountsDataset:
    """Long-format worker labels aggregated to per-object counts.

    Objects keep the order of their first appearance.
    """
    agg: "OrderedDict[str, list]" = OrderedDict()
    for lineno, (_worker, obj, label) in _read_rows(path, ["worker", "object", "label"]):
        if label not in ("0", "1"):
            raise InputError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
        slot = agg.setdefault(obj, [0, 0])
        slot[0] += int(label)
        slot[1] += 1
    xs = np.array([v[0] for v in agg.values()])
    ms = np.array([v[1] for v in agg.values()])
    return CountsDataset(xs, ms, ids=tuple(agg.keys()))


def write_counts_csv(d: CountsDataset, path) -> None:
    ids = d.ids if d.ids is not None else [str(i) for i in range(d.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "m"])
        for oid, x, m in zip(ids, d.counts, d.trials):
            w.writerow([oid, int(x), int(m)])


def write_decisions_csv(d: CountsDataset, dec: ProcedureDecision, path) -> None:
    ids = d.ids if d.ids is not None else [str(i) for i in range(d.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "m", "statistic", "reject"])
        for oid, x, m, s, r in zip(ids, d.counts, d.trials, dec.statistic, dec.reject):
            w.writerow([oid, int(x), int(m), fmt(s), int(r)])


def read_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(data)


def write_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def write_results_csv(report: MetricsReport, path, cfg: ExperimentConfig = None) -> None:
    """Results table; with ``cfg`` a ``<path>.meta.json`` sidecar records seed and RNG scheme."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in report.rows:
            w.writerow([
                r.procedure, fmt(r.t), r.m, fmt(r.s_frac), fmt(r.theta0), r.replicates,
                fmt(r.fdr_mean), fmt(r.fdr_mcse), fmt(r.fnr_mean), fmt(r.fnr_mcse),
                fmt(r.risk_mean),
            ])
    if cfg is not None:
        meta = {"config": cfg.to_dict(), "rng": RNG_SCHEME}
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def read_results_csv(path) -> MetricsReport:
    rows = []
    for lineno, vals in _read_rows(path, RESULT_COLUMNS):
        rec = dict(zip(RESULT_COLUMNS, vals))
        try:
            for k in _FLOAT_COLUMNS:
                rec[k] = float(rec[k])
            rec["m"] = int(rec["m"])
            rec["replicates"] = int(rec["replicates"])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        rows.append(MetricsRow(**rec))
    return MetricsReport(rows)


def write_rows_csv(header: Iterable[str], rows: Iterable[Iterable], path=None, stream=None) -> None:
    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in row])

    if path is not None:
        with open(path, "w", newline="") as fh:
            _emit(fh)
    else:
        _emit(stream)
