"""Empirical diagnostics: TV against exact tables, integrated autocorrelation
times, and two-seed Kolmogorov-Smirnov consistency."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .oracle import ExactDistribution


@dataclass
class TraceSeries:
    values: np.ndarray
    seed: Optional[int] = None
    kernel: str = ""
    params: dict = field(default_factory=dict)
    name: str = "energy"

    def __len__(self) -> int:
        return len(self.values)

    def after_burn_in(self, burn_in: Optional[int] = None) -> np.ndarray:
        """Drop the first half of the trace unless ``burn_in`` is given."""
        b = len(self.values) // 2 if burn_in is None else burn_in
        return np.asarray(self.values)[b:]


@dataclass
class MixingReport:
    instance: str
    statistic: float
    samples: int
    threshold: float
    verdict: bool
    method: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def histogram(samples: np.ndarray, size: int) -> np.ndarray:
    counts = np.bincount(np.asarray(samples, dtype=np.int64), minlength=size)
    if counts.shape[0] > size:
        raise ValueError("sample outside the state space")
    return counts / counts.sum()


def empirical_tv(samples: np.ndarray, exact: ExactDistribution) -> float:
    """Half the l1 distance between the sample histogram and the exact table."""
    samples = np.asarray(samples, dtype=np.int64)
    keys, counts = np.unique(samples, return_counts=True)
    emp = counts / counts.sum()
    union = np.union1d(keys, exact.states)
    e_map = dict(zip(keys.tolist(), emp.tolist()))
    p = exact.on(union)
    q = np.array([e_map.get(int(k), 0.0) for k in union])
    return 0.5 * float(np.abs(p - q).sum())


def autocorrelation_function(x: np.ndarray, max_lag: Optional[int] = None) -> np.ndarray:
    """Normalized autocorrelation ``rho(t)`` via FFT; constant series give ``rho = [1, 0, ...]``."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    y = x - x.mean()
    var = y @ y / n
    m = n if max_lag is None else min(n, max_lag + 1)
    if var == 0:
        out = np.zeros(m)
        out[0] = 1.0
        return out
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:m] / n
    return acov / var


def autocorrelation_time(series: TraceSeries | np.ndarray, c: float = 5.0) -> float:
    """Integrated autocorrelation ``tau = 1 + 2 sum_{t=1}^{W} rho(t)`` with automatic
    windowing: ``W`` is the smallest lag with ``W >= c * tau(W)``.

    An i.i.d. series gives about 1; a period-2 alternating series gives the
    windowed sum of ``(-1)^t`` terms, which is a defined but unphysical value.
    """
    x = series.values if isinstance(series, TraceSeries) else series
    rho = autocorrelation_function(x)
    tau = 1.0
    for w in range(1, len(rho)):
        tau += 2 * rho[w]
        if w >= c * tau:
            return float(tau)
    return float(tau)


def ks_consistency(a: np.ndarray, b: np.ndarray, alpha: float = 0.01, instance: str = "",
                   detail: Optional[dict] = None) -> MixingReport:
    """Two-sample KS test; the verdict passes when ``p-value >= alpha``."""
    res = stats.ks_2samp(a, b)
    d = {"p_value": float(res.pvalue)}
    if detail:
        d.update(detail)
    return MixingReport(instance, float(res.statistic), int(min(len(a), len(b))), alpha,
                        bool(res.pvalue >= alpha), "ks_2samp", d)


def two_seed_consistency(run: Callable[[int], np.ndarray], seeds: Sequence[int], steps: int,
                         alpha: float = 0.01, burn_in: Optional[int] = None, instance: str = "") -> MixingReport:
    """Run the observable trace ``run(seed)`` for two seeds and KS-compare the
    post-burn-in halves (burn-in defaults to half the budget)."""
    if len(seeds) != 2:
        raise ValueError("exactly two seeds are required")
    traces = [TraceSeries(np.asarray(run(s))[:steps], seed=s) for s in seeds]
    a, b = (t.after_burn_in(burn_in) for t in traces)
    return ks_consistency(a, b, alpha, instance,
                          {"seeds": list(seeds), "steps": steps, "burn_in": steps // 2 if burn_in is None else burn_in,
                           "means": [float(a.mean()), float(b.mean())]})


def write_trace_csv(path, columns: dict[str, np.ndarray]) -> None:
    """CSV with a leading ``step`` column followed by the given observables."""
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + names)
        for t in range(n):
            w.writerow([t + 1] + [_fmt(columns[k][t]) for k in names])


def _fmt(v) -> str:
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return repr(float(v))


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
