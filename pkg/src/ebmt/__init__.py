"""Empirical Bayes multiple testing for sparse binomial count sequences."""
from .binom_core import BinomParams, cdf, inv_survival, log_pmf, pmf, survival
from .eb_model import CountsDataset, WeightEstimate, cl_value, l_value, mmle, q_value
from .procedures import ProcedureDecision, bh_decide, confusion, decide, fdp, fnp, risk
from .simulate import ExperimentConfig, MetricsReport, run_experiment
from .thresholds import ThresholdSet, threshold_set

__all__ = [
    "BinomParams", "cdf", "inv_survival", "log_pmf", "pmf", "survival",
    "CountsDataset", "WeightEstimate", "cl_value", "l_value", "mmle", "q_value",
    "ProcedureDecision", "bh_decide", "confusion", "decide", "fdp", "fnp", "risk",
    "ExperimentConfig", "MetricsReport", "run_experiment",
    "ThresholdSet", "threshold_set",
]
__version__ = "0.1.0"
