"""Anomaly detection with valid post-detection inference.

DBSCAN flags anomalies; because the same data chooses the hypotheses, naive
p-values for "is this point's mean shifted?" are wildly anti-conservative.
This package computes the exact truncated-normal p-value conditional on the
detection outcome, which provably controls the false positive rate at the
nominal level.

Typical use::

    from siclad import DbscanParams, build_covariance, si_clad

    cov = build_covariance("scalar", n=len(x), d=x.shape[1], sigma2=1.0)
    report = si_clad(x, cov, DbscanParams(eps=0.2, min_pts=5),
                     methods=("selective",))
    for r in report.results:
        print(r.j, r.p_values["selective"])
"""

from .dbscan import DetectionResult, detect_anomalies
from .errors import (DegenerateDirectionError, IngestionError,
                     MassUnderflowError, RegionConsistencyError, SicladError)
from .experiments import ExperimentConfig, RateTable, bench, gen_synthetic, run_rate_experiment
from .hypothesis import LineParam, direction_1d, direction_md, line_parameterization
from .model import (CovarianceModel, DataMatrix, DbscanParams,
                    build_covariance, load_observations)
from .pipeline import METHODS, HypothesisResult, SicladReport, SkipRecord, si_clad
from .pvalue import bonferroni_p, gaussian_interval_mass, naive_p, oc_p, selective_p
from .region import (IntervalSet, RegionSearchResult, SignContext,
                     feasible_component_at, line_search, over_conditioned_region,
                     pair_quadratic, quadratic_solution_set)

__version__ = "0.1.0"

__all__ = [
    "CovarianceModel",
    "DataMatrix",
    "DbscanParams",
    "DegenerateDirectionError",
    "DetectionResult",
    "ExperimentConfig",
    "HypothesisResult",
    "IngestionError",
    "IntervalSet",
    "LineParam",
    "MassUnderflowError",
    "METHODS",
    "RateTable",
    "RegionConsistencyError",
    "RegionSearchResult",
    "SicladError",
    "SicladReport",
    "SignContext",
    "SkipRecord",
    "bench",
    "bonferroni_p",
    "build_covariance",
    "detect_anomalies",
    "direction_1d",
    "direction_md",
    "feasible_component_at",
    "gaussian_interval_mass",
    "gen_synthetic",
    "line_parameterization",
    "line_search",
    "load_observations",
    "naive_p",
    "oc_p",
    "over_conditioned_region",
    "pair_quadratic",
    "quadratic_solution_set",
    "run_rate_experiment",
    "selective_p",
    "si_clad",
]
