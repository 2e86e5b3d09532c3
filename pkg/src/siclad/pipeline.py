"""End-to-end detect-then-test: one call from a data matrix to p-values.

For every detected anomaly j the pipeline builds the deviation contrast,
decomposes the data along it, and computes the requested p-values:

* ``selective``   -- truncated to the full set of line positions that
  reproduce the detection (the exact conditional test);
* ``oc``          -- truncated to just the single cell around the observation
  (valid but over-conditioned, hence less powerful);
* ``naive``       -- the unconditional two-sided normal test;
* ``bonferroni``  -- naive corrected by the 2^n ways a selection could have
  come out, the only worst-case-valid classical correction here;
* ``none``        -- no test at all: every detection counts as a rejection
  (p = 0), the yardstick for how badly selection bias inflates errors.

Hypotheses that cannot be tested (degenerate direction, unnormalizable
region mass) are reported as skips with the reason, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dbscan import DetectionResult, detect_anomalies
from .errors import DegenerateDirectionError, MassUnderflowError, RegionConsistencyError
from .hypothesis import direction_1d, direction_md, line_parameterization
from .model import CovarianceModel, DataMatrix, DbscanParams
from .pvalue import bonferroni_p, naive_p, oc_p, selective_p
from .region import DEFAULT_DELTA, DEFAULT_SPAN, IntervalSet, SignContext, line_search

METHODS = ("selective", "oc", "naive", "bonferroni", "none")


@dataclass(frozen=True)
class HypothesisResult:
    """Everything computed for one detected anomaly."""

    j: int
    z_obs: float | None
    sd: float | None
    signs: np.ndarray | None
    p_values: dict[str, float] = field(default_factory=dict)
    region: IntervalSet | None = None
    observed_cell: tuple[float, float] | None = None
    search_steps: int = 0


@dataclass(frozen=True)
class SkipRecord:
    """A (hypothesis, method) pair that could not produce a p-value."""

    j: int
    method: str
    reason: str


@dataclass(frozen=True)
class SicladReport:
    """Detection output plus per-anomaly test results and skips."""

    n: int
    d: int
    params: DbscanParams
    methods: tuple[str, ...]
    detection: DetectionResult
    results: tuple[HypothesisResult, ...]
    skips: tuple[SkipRecord, ...]

    @property
    def anomalies(self) -> np.ndarray:
        return self.detection.anomalies

    def result_for(self, j: int) -> HypothesisResult | None:
        for r in self.results:
            if r.j == j:
                return r
        return None

    def rejections(self, alpha: float) -> dict[str, list[int]]:
        """Indices rejected at level alpha, per method."""
        out: dict[str, list[int]] = {m: [] for m in self.methods}
        for r in self.results:
            for m, p in r.p_values.items():
                if p <= alpha:
                    out[m].append(r.j)
        return out


def si_clad(x, cov: CovarianceModel, params: DbscanParams,
            methods=("selective",), *, delta: float = DEFAULT_DELTA,
            span: float = DEFAULT_SPAN) -> SicladReport:
    """Detect anomalies in x and test each one with the requested methods."""
    xm = x if isinstance(x, DataMatrix) else DataMatrix(np.asarray(x, dtype=float))
    methods = tuple(methods)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}; choose from {METHODS}")
    if not methods:
        raise ValueError("at least one method is required")
    if (cov.n, cov.d) != (xm.n, xm.d):
        raise ValueError(
            f"covariance is for n={cov.n}, d={cov.d} but data is {xm.n}x{xm.d}")

    det = detect_anomalies(xm, params)
    needs_direction = [m for m in methods if m != "none"]
    needs_region = any(m in ("selective", "oc") for m in methods)

    results: list[HypothesisResult] = []
    skips: list[SkipRecord] = []
    for j in det.anomalies.tolist():
        p_values: dict[str, float] = {}
        if "none" in methods:
            p_values["none"] = 0.0  # detection is the rejection

        line = None
        signs = None
        sign_ctx = None
        if needs_direction:
            try:
                if xm.d == 1:
                    eta = direction_1d(xm.n, j, det.anomalies)
                else:
                    eta, signs, _ = direction_md(xm, j, det.anomalies)
                    sign_ctx = SignContext(j=j, signs=signs, inliers=det.inliers)
                line = line_parameterization(xm.vec(), eta, cov)
            except DegenerateDirectionError as exc:
                skips.extend(SkipRecord(j, m, str(exc)) for m in needs_direction)
                results.append(HypothesisResult(
                    j=j, z_obs=None, sd=None, signs=signs, p_values=p_values))
                continue

        search = None
        if needs_region:
            try:
                search = line_search(line, params, det.anomalies, xm.n, xm.d,
                                     sign_context=sign_ctx, delta=delta, span=span)
            except RegionConsistencyError as exc:
                for m in ("selective", "oc"):
                    if m in methods:
                        skips.append(SkipRecord(j, m, str(exc)))

        for m in methods:
            if m in p_values:
                continue
            try:
                if m == "selective" and search is not None:
                    p_values[m] = selective_p(search.region, line.z_obs, line.sd)
                elif m == "oc" and search is not None:
                    p_values[m] = oc_p(line.z_obs, line.sd, search.observed_cell)
                elif m == "naive":
                    p_values[m] = naive_p(line.z_obs, line.sd)
                elif m == "bonferroni":
                    p_values[m] = bonferroni_p(line.z_obs, line.sd, xm.n)
            except MassUnderflowError as exc:
                skips.append(SkipRecord(j, m, str(exc)))

        results.append(HypothesisResult(
            j=j, z_obs=line.z_obs, sd=line.sd, signs=signs, p_values=p_values,
            region=None if search is None else search.region,
            observed_cell=None if search is None else search.observed_cell,
            search_steps=0 if search is None else search.steps))

    return SicladReport(n=xm.n, d=xm.d, params=params, methods=methods,
                        detection=det, results=tuple(results), skips=tuple(skips))
