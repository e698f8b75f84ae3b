"""Command-line entry point: ``ebmt simulate|decide|thresholds|diagnose|plot``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import diagnostics as dg
from .io import (
    InputError,
    read_config,
    read_counts_csv,
    read_labels_csv,
    read_results_csv,
    write_decisions_csv,
    write_results_csv,
    write_rows_csv,
)
from .plotting import render_svg
from .procedures import PROCEDURES, decide
from .simulate import ExperimentConfig, run_experiment
from .thresholds import asymptotic_thresholds, threshold_set


def _cmd_simulate(args):
    cfg = read_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.master_seed = args.seed
        cfg.validate()
    report = run_experiment(cfg, threads=args.threads)
    write_results_csv(report, args.out, cfg)
    if args.svg:
        render_svg(report, args.svg)
    return 0


def _cmd_decide(args):
    d = read_labels_csv(args.input) if args.labels else read_counts_csv(args.input)
    dec = decide(d, args.procedure, args.t, w_override=args.w,
                 exclusive_tail=args.qvalue_exclusive_tail)
    write_decisions_csv(d, dec, args.out)
    if args.procedure != "bh":
        print(f"w={dec.w_used:.6g} rejected={dec.n_rejected}/{d.n}", file=sys.stderr)
    else:
        print(f"rejected={dec.n_rejected}/{d.n}", file=sys.stderr)
    return 0


_THRESHOLD_FIELDS = ["m", "w", "t", "r_wt", "zeta", "xi", "nu", "t_l", "t_cl", "t_q",
                     "t_l_asym", "t_cl_asym", "t_q_asym"]


def _cmd_thresholds(args):
    ts = threshold_set(args.m, args.w, args.t)
    asym = asymptotic_thresholds(args.m, args.w, args.t)
    vals = [ts.m, ts.w, ts.t, ts.r_wt, ts.zeta, ts.xi, ts.nu, ts.t_l, ts.t_cl, ts.t_q, *asym]
    vals = ["" if v is None else v for v in vals]
    if args.csv:
        write_rows_csv(_THRESHOLD_FIELDS, [vals], stream=sys.stdout)
    else:
        width = max(len(f) for f in _THRESHOLD_FIELDS)
        for name, v in zip(_THRESHOLD_FIELDS, vals):
            shown = f"{v:.6g}" if isinstance(v, float) else str(v)
            print(f"{name:<{width}}  {shown}")
        for name, flag in (("t_l", ts.clamp_l), ("t_cl", ts.clamp_cl), ("t_q", ts.clamp_q)):
            if flag:
                print(f"# {name} clamped: {flag}")
    return 0


def _cmd_diagnose(args):
    thetas = args.theta or [0.5]
    rows = []
    for th in thetas:
        rep = dg.moment_report(args.m, th, args.w)
        rows.append(["moments", args.m, th, args.w, rep.m_tilde, rep.m1, rep.m2, ""])
    if args.n is not None and args.delta is not None:
        rows.append(["w0", args.m, "", "", "", "", "", dg.solve_w0(args.m, args.n, args.delta)])
    if args.n is not None and args.signals is not None and args.theta:
        truth = np.full(args.n, 0.5)
        truth[: args.signals] = args.theta[-1]
        w1, w2 = dg.solve_weight_bounds(truth, args.m, args.kappa)
        rows.append(["w1", args.m, args.theta[-1], "", "", "", "", "" if w1 is None else w1])
        rows.append(["w2", args.m, args.theta[-1], "", "", "", "", "" if w2 is None else w2])
    write_rows_csv(["quantity", "m", "theta", "w", "m_tilde", "m1", "m2", "value"], rows,
                   stream=sys.stdout)
    return 0


def _cmd_plot(args):
    render_svg(read_results_csv(args.input), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ebmt", description="Empirical Bayes multiple testing for binomial counts.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the Monte Carlo experiment grid")
    s.add_argument("--config", help="experiment config JSON (defaults when omitted)")
    s.add_argument("--out", required=True, help="results CSV path")
    s.add_argument("--svg", help="also render an SVG chart here")
    s.add_argument("--seed", type=int, help="override master_seed")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("decide", help="apply a procedure to observed counts")
    s.add_argument("--procedure", choices=PROCEDURES, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--input", required=True, help="counts CSV (id,x,m) or labels CSV with --labels")
    s.add_argument("--labels", action="store_true", help="input is worker,object,label")
    s.add_argument("--out", required=True)
    s.add_argument("--w", type=float, help="fixed weight instead of the MMLE")
    s.add_argument("--qvalue-exclusive-tail", action="store_true",
                   help="use the slab tail (m-u)/(m+1) in q-values")
    s.set_defaults(func=_cmd_decide)

    s = sub.add_parser("thresholds", help="print rejection thresholds")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--w", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=_cmd_thresholds)

    s = sub.add_parser("diagnose", help="exact score moments and weight equations")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--w", type=float, required=True)
    s.add_argument("--theta", type=float, action="append", help="repeatable")
    s.add_argument("--n", type=int, help="number of objects for w0/w1/w2")
    s.add_argument("--delta", type=float, help="right-hand side for w0")
    s.add_argument("--signals", type=int, help="signal count at the last --theta for w1/w2")
    s.add_argument("--kappa", type=float, default=0.5)
    s.set_defaults(func=_cmd_diagnose)

    s = sub.add_parser("plot", help="render a results CSV as SVG")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"ebmt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
