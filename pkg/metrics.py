"""
Rate statistics of allocations and the tables written by the experiment harness.

Per-trial table columns: algo,trial,N,highest,mean,worst,stddev,unassigned
Summary table columns: algo,N,trials,highest,mean,worst,stddev,unassigned,total,mean_ci_low,mean_ci_high
Worst-rate curve columns: N followed by one column per algorithm
Paired test columns: N,statistic,better,worse,mean_difference,pvalue

Rates are Mbit/s per subchannel. Summary rows average the per-trial statistics.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.stats

# Configure logging
logger = logging.getLogger(__name__)

ALGORITHMS = ("exhaustive", "proposed", "greedy", "random")
TRIAL_COLUMNS = ["algo", "trial", "N", "highest", "mean", "worst", "stddev", "unassigned"]
SUMMARY_COLUMNS = [
    "algo", "N", "trials", "highest", "mean", "worst", "stddev", "unassigned", "total", "mean_ci_low", "mean_ci_high",
]
PAIRED_COLUMNS = ["N", "statistic", "better", "worse", "mean_difference", "pvalue"]
FLOAT_FORMAT = "%.6f"


@dataclass(frozen=True)
class RateSummary:
    """Fleet rate statistics for one allocation; unassigned vehicles are counted, not rated"""
    highest: float
    mean: float
    worst: float
    stddev: float
    unassigned: int
    total: float = 0.0

    def to_dict(self):
        return {
            "highest": self.highest,
            "mean": self.mean,
            "worst": self.worst,
            "stddev": self.stddev,
            "unassigned": self.unassigned,
            "total": self.total,
        }

    def to_json(self):
        """`to_dict` with undefined statistics as None, so the document stays valid JSON"""
        return {key: None if isinstance(value, float) and np.isnan(value) else value
                for key, value in self.to_dict().items()}


def summarize(allocation, cost):
    """Highest, mean, worst and population standard deviation of the granted rates"""
    rates = np.array(list(allocation.rates(cost).values()))
    unassigned = len(allocation.unassigned)
    if rates.size == 0:
        return RateSummary(np.nan, np.nan, np.nan, np.nan, unassigned, 0.0)
    return RateSummary(
        highest=float(rates.max()),
        mean=float(rates.mean()),
        worst=float(rates.min()),
        stddev=float(rates.std()),
        unassigned=unassigned,
        total=float(rates.sum()),
    )


def _ordered(frame, by):
    frame = frame.copy()
    frame["algo"] = pd.Categorical(frame["algo"], categories=list(ALGORITHMS), ordered=True)
    frame = frame.sort_values(by, kind="mergesort").reset_index(drop=True)
    frame["algo"] = frame["algo"].astype(str)
    return frame


def trials_frame(records):
    """Per-trial records (dicts with TRIAL_COLUMNS plus `total`) as a table sorted by N, trial, algorithm"""
    frame = pd.DataFrame.from_records(records, columns=TRIAL_COLUMNS + ["total"])
    return _ordered(frame, ["N", "trial", "algo"])


def confidence_interval(values, confidence=0.95):
    """Student-t interval of the mean"""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return np.nan, np.nan
    mean = values.mean()
    sem = scipy.stats.sem(values)
    if sem == 0:
        return mean, mean
    return scipy.stats.t.interval(confidence, values.size - 1, loc=mean, scale=sem)


def aggregate_trials(trials):
    """Average every per-trial statistic per (algorithm, N)"""
    rows = []
    for (algo, n), group in trials.groupby(["algo", "N"], sort=False):
        low, high = confidence_interval(group["mean"].to_numpy())
        rows.append({
            "algo": algo,
            "N": n,
            "trials": len(group),
            "highest": group["highest"].mean(),
            "mean": group["mean"].mean(),
            "worst": group["worst"].mean(),
            "stddev": group["stddev"].mean(),
            "unassigned": group["unassigned"].mean(),
            "total": group["total"].mean(),
            "mean_ci_low": low,
            "mean_ci_high": high,
        })
    summary = pd.DataFrame.from_records(rows, columns=SUMMARY_COLUMNS)
    return _ordered(summary, ["N", "algo"])


def worst_rate_curve(trials):
    """Mean worst-vehicle rate per fleet size N (rows) and algorithm (columns)"""
    curve = trials.pivot_table(index="N", columns="algo", values="worst", aggfunc="mean")
    columns = [algo for algo in ALGORITHMS if algo in curve.columns]
    curve = curve[columns].sort_index()
    curve.columns.name = None
    return curve


def paired_differences(trials, first, second, column, n=None):
    """Per-trial `column` of algorithm `first` minus that of `second`, matched on (N, trial)"""
    if n is not None:
        trials = trials[trials["N"] == n]
    wide = trials.pivot_table(index=["N", "trial"], columns="algo", values=column, dropna=False)
    return (wide[first] - wide[second]).dropna()


def paired_pvalue(trials, better, worse, column, n=None):
    """One-sided paired t-test p-value for mean(better - worse) > 0"""
    diff = paired_differences(trials, better, worse, column, n)
    if diff.size < 2 or np.allclose(diff, diff.iloc[0]):
        # no spread: the test is degenerate, decide on the sign alone
        return 0.0 if diff.size and diff.iloc[0] > 0 else 1.0
    return float(scipy.stats.ttest_1samp(diff, 0.0, alternative="greater").pvalue)


def write_table(frame, path, index=False):
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")


def paired_tests(trials, statistics=("mean", "worst")):
    """Per N, test each algorithm against the next one in ALGORITHMS order that ran alongside it"""
    rows = []
    for n in sorted(trials["N"].unique()):
        at_n = trials[trials["N"] == n]
        present = set(at_n["algo"])
        algos = [algo for algo in ALGORITHMS if algo in present]
        for better, worse in zip(algos, algos[1:]):
            for column in statistics:
                diff = paired_differences(at_n, better, worse, column)
                rows.append({
                    "N": int(n),
                    "statistic": column,
                    "better": better,
                    "worse": worse,
                    "mean_difference": diff.mean() if diff.size else np.nan,
                    "pvalue": paired_pvalue(at_n, better, worse, column),
                })
    return pd.DataFrame.from_records(rows, columns=PAIRED_COLUMNS)
