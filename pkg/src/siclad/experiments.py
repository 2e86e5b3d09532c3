"""Monte Carlo harness: synthetic data, error/power rates, and timing sweeps.

Each trial draws row-i.i.d. Gaussian data, shifts a uniformly chosen set of
rows by the configured amount in every coordinate, runs the full
detect-then-test pipeline, and records one raw row per (hypothesis, method).
Rates aggregate over hypotheses, not trials: a tested hypothesis is null
exactly when its row was not among the planted ones, the false positive rate
is rejections among tested nulls, and the true positive rate is rejections
among tested planted rows.  Skipped hypotheses never enter a denominator;
they are counted separately.

Trials are keyed by ``(seed, trial)`` through ``numpy.random.default_rng``,
so any execution order -- or parallel execution -- produces identical tables.
The worker count comes from the SICLAD_JOBS environment variable (default 1).
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from statistics import fmean, median

import numpy as np

from .dbscan import detect_anomalies
from .errors import SicladError
from .hypothesis import direction_1d, direction_md, line_parameterization
from .model import CovarianceModel, DataMatrix, DbscanParams, build_covariance
from .pipeline import METHODS, si_clad
from .pvalue import selective_p
from .region import SignContext, line_search

JOBS_ENV_VAR = "SICLAD_JOBS"


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully specified synthetic study; every field has a physical meaning.

    ``delta`` is the anomaly mean shift applied to every coordinate of each
    planted row; ``anomaly_count`` defaults to n // 3.  Exactly one of
    ``sigma2`` (independent noise) or ``rho`` (unit-variance feature
    correlation rho^|k-l|) describes the covariance.
    """

    n: int = 100
    d: int = 1
    delta: float = 0.0
    anomaly_count: int | None = None
    sigma2: float | None = 1.0
    rho: float | None = None
    eps: float = 0.2
    min_pts: int = 5
    trials: int = 500
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    delta_step: float = 1e-3
    span: float = 20.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if (self.sigma2 is None) == (self.rho is None):
            raise ValueError("specify exactly one of sigma2 or rho")
        if self.planted_count >= self.n:
            raise ValueError(
                f"anomaly_count {self.planted_count} must be below n={self.n}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown method(s) {unknown}")

    @property
    def planted_count(self) -> int:
        return self.n // 3 if self.anomaly_count is None else self.anomaly_count

    @property
    def params(self) -> DbscanParams:
        return DbscanParams(eps=self.eps, min_pts=self.min_pts)

    def covariance(self) -> CovarianceModel:
        if self.rho is not None:
            return build_covariance("ar1", n=self.n, d=self.d, rho=self.rho)
        return build_covariance("scalar", n=self.n, d=self.d, sigma2=self.sigma2)


def gen_synthetic(cfg: ExperimentConfig, trial: int) -> tuple[DataMatrix, np.ndarray]:
    """One trial's data and its sorted planted-anomaly indices.

    Deterministic in (cfg.seed, trial) alone; trials may run in any order.
    """
    rng = np.random.default_rng([cfg.seed, trial])
    planted = np.sort(rng.choice(cfg.n, size=cfg.planted_count, replace=False))
    if cfg.rho is not None:
        k = np.arange(cfg.d)
        xi = cfg.rho ** np.abs(k[:, None] - k[None, :])
        x = rng.standard_normal((cfg.n, cfg.d)) @ np.linalg.cholesky(xi).T
    else:
        x = rng.standard_normal((cfg.n, cfg.d)) * np.sqrt(cfg.sigma2)
    x[planted] += cfg.delta
    return DataMatrix(x), planted


def _trial_rows(cfg: ExperimentConfig, trial: int) -> list[dict]:
    """Raw per-(hypothesis, method) records for one trial."""
    x, planted = gen_synthetic(cfg, trial)
    planted_set = set(planted.tolist())
    report = si_clad(x, cfg.covariance(), cfg.params, cfg.methods,
                     delta=cfg.delta_step, span=cfg.span)
    skip_reasons = {(s.j, s.method): s.reason for s in report.skips}
    rows = []
    for r in report.results:
        for m in cfg.methods:
            p = r.p_values.get(m)
            rows.append({
                "trial": trial,
                "index": int(r.j),
                "null": r.j not in planted_set,
                "method": m,
                "p_value": None if p is None else float(p),
                "rejected": bool(p is not None and p <= cfg.alpha),
                "skip_reason": skip_reasons.get((r.j, m), ""),
            })
    return rows


def _run_trials(cfg: ExperimentConfig) -> list[dict]:
    n_jobs = int(os.environ.get(JOBS_ENV_VAR, "1"))
    if n_jobs != 1:
        from joblib import Parallel, delayed
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_trial_rows)(cfg, t) for t in range(cfg.trials))
    else:
        chunks = [_trial_rows(cfg, t) for t in range(cfg.trials)]
    return [row for chunk in chunks for row in chunk]


@dataclass(frozen=True)
class RateTable:
    """Aggregated rates plus the raw rows they were computed from."""

    mode: str
    sweep_param: str
    summary: tuple[dict, ...]
    raw: tuple[dict, ...] = field(repr=False)


def run_rate_experiment(cfg: ExperimentConfig, mode: str,
                        sweep_param: str | None = None,
                        sweep_values=None) -> RateTable:
    """FPR or TPR per method, optionally swept over one config parameter.

    ``mode='fpr'`` requires delta == 0 and rates rejections among tested null
    hypotheses; ``mode='tpr'`` requires delta > 0 and rates rejections among
    tested planted hypotheses.  A (method, value) cell with zero tested
    hypotheses reports rate None -- missing data rather than 0/0.
    """
    if mode not in ("fpr", "tpr"):
        raise ValueError(f"mode must be 'fpr' or 'tpr', got {mode!r}")
    if mode == "fpr" and cfg.delta != 0.0:
        raise ValueError("fpr mode requires delta == 0")
    if mode == "tpr" and not cfg.delta > 0.0:
        raise ValueError("tpr mode requires delta > 0")
    if sweep_param is None:
        sweep_param, sweep_values = "n", [cfg.n]
    elif not sweep_values:
        raise ValueError("sweep_values required when sweep_param is given")

    want_null = mode == "fpr"
    summary: list[dict] = []
    raw: list[dict] = []
    for value in sweep_values:
        swept = replace(cfg, **{sweep_param: value})
        rows = _run_trials(swept)
        for row in rows:
            row[sweep_param] = value
        raw.extend(rows)
        for m in cfg.methods:
            pool = [r for r in rows if r["method"] == m and r["null"] == want_null]
            tested = [r for r in pool if r["p_value"] is not None]
            rejected = int(sum(r["rejected"] for r in tested))
            summary.append({
                "mode": mode,
                "method": m,
                sweep_param: value,
                "rate": rejected / len(tested) if tested else None,
                "rejected": rejected,
                "tested": len(tested),
                "skipped": len(pool) - len(tested),
                "trials": swept.trials,
            })
    return RateTable(mode=mode, sweep_param=sweep_param,
                     summary=tuple(summary), raw=tuple(raw))


def bench(cfg: ExperimentConfig, sweep_param: str = "n",
          sweep_values=(50, 100, 150, 200)) -> list[dict]:
    """Wall-clock cost of one selective p-value, swept over n or d.

    For every testable hypothesis the timer wraps the whole chain -- contrast,
    line, region search, truncated p-value.  The interval columns count the
    candidate intervals the search examines while building the region (every
    cell visited by the walk and its gap probes), which is the region's
    interval count before adjacent accepted cells merge; the merged region is
    usually just a handful of pieces and carries no cost signal.
    """
    if sweep_param not in ("n", "d"):
        raise ValueError(f"bench sweeps n or d, got {sweep_param!r}")
    out = []
    for value in sweep_values:
        swept = replace(cfg, **{sweep_param: value})
        params = swept.params
        cov = swept.covariance()
        durations: list[float] = []
        n_intervals: list[int] = []
        for trial in range(swept.trials):
            x, _ = gen_synthetic(swept, trial)
            det = detect_anomalies(x, params)
            for j in det.anomalies.tolist():
                t0 = time.perf_counter()
                try:
                    if swept.d == 1:
                        eta = direction_1d(swept.n, j, det.anomalies)
                        ctx = None
                    else:
                        eta, signs, _ = direction_md(x, j, det.anomalies)
                        ctx = SignContext(j=j, signs=signs, inliers=det.inliers)
                    line = line_parameterization(x.vec(), eta, cov)
                    search = line_search(line, params, det.anomalies, swept.n,
                                         swept.d, sign_context=ctx,
                                         delta=swept.delta_step, span=swept.span)
                    selective_p(search.region, line.z_obs, line.sd)
                except SicladError:
                    continue
                durations.append(time.perf_counter() - t0)
                n_intervals.append(search.steps)
        out.append({
            "param": sweep_param,
            "value": value,
            "median_seconds": median(durations) if durations else None,
            "mean_seconds": fmean(durations) if durations else None,
            "median_intervals": median(n_intervals) if n_intervals else None,
            "mean_intervals": fmean(n_intervals) if n_intervals else None,
            "p_values": len(durations),
            "trials": swept.trials,
        })
    return out
