"""Test directions for detected anomalies and the induced line through the data.

For an anomaly j the tested quantity is its deviation from the mean of the
non-anomalous points.  In one dimension the direction is

    eta = e_j - (1/m) * 1_inliers,            m = number of inliers,

so eta^T x = X_j - mean(inliers).  In d > 1 dimensions the per-feature
deviations are collapsed with their observed signs,

    eta = (1/d) * sum_k s_k * (e_(j,k) - (1/m) * 1_(inliers,k)),
    s_k = sign(X_jk - mean_k(inliers)),  sign(0) = 0,

which makes eta^T vec(X) the mean absolute deviation of X_j from the inlier
centroid -- a nonnegative statistic.  Conditioning on the sign vector s keeps
the statistic linear along the line.

Decomposing x along eta with covariance Sigma gives x = a + b*z with
z = eta^T x, b = Sigma eta / (eta^T Sigma eta), and a = x - b*z; every
candidate data set explored by the region search lives on this line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError
from .model import CovarianceModel, DataMatrix

VARIANCE_FLOOR = 1e-12


def _inlier_indices(n: int, j: int, anomalies: np.ndarray) -> np.ndarray:
    anomalies = np.asarray(anomalies, dtype=int)
    if not 0 <= j < n:
        raise ValueError(f"index {j} out of range for n={n}")
    if j not in anomalies:
        raise ValueError(f"index {j} is not among the detected anomalies")
    inliers = np.setdiff1d(np.arange(n), anomalies)
    if inliers.size == 0:
        raise DegenerateDirectionError(
            "every point was flagged anomalous; no inliers to compare against")
    return inliers


def direction_1d(n: int, j: int, anomalies: np.ndarray) -> np.ndarray:
    """Contrast picking out X_j minus the inlier mean (d = 1)."""
    inliers = _inlier_indices(n, j, anomalies)
    eta = np.zeros(n)
    eta[j] = 1.0
    eta[inliers] -= 1.0 / inliers.size
    return eta


def direction_md(x: DataMatrix, j: int, anomalies: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray, float]:
    """Signed mean-absolute-deviation contrast for d > 1.

    Returns ``(eta, signs, gamma)`` where ``eta`` lives in vec space (length
    n*d), ``signs`` is the per-feature sign vector in {-1, 0, +1}^d, and
    ``gamma = eta^T vec(x) >= 0`` is the observed statistic.  Raises
    :class:`DegenerateDirectionError` when X_j coincides with the inlier mean
    in every feature (all signs zero).
    """
    n, d = x.n, x.d
    inliers = _inlier_indices(n, j, anomalies)
    centroid = x.values[inliers].mean(axis=0)
    deviation = x.values[j] - centroid
    signs = np.sign(deviation)
    if not signs.any():
        raise DegenerateDirectionError(
            f"anomaly {j} coincides with the inlier mean in every feature")
    eta = np.zeros((n, d))
    eta[j, :] = signs / d
    eta[np.ix_(inliers, np.arange(d))] -= signs / (d * inliers.size)
    eta_vec = eta.ravel(order="F")
    gamma = float(np.abs(deviation).sum() / d)
    return eta_vec, signs, gamma


@dataclass(frozen=True)
class LineParam:
    """The line x = a + b*z with z = eta^T x, plus the null scale of z."""

    a: np.ndarray
    b: np.ndarray
    z_obs: float
    var: float

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.var))

    def point_at(self, z: float) -> np.ndarray:
        return self.a + self.b * z


def line_parameterization(x_vec: np.ndarray, eta: np.ndarray,
                          cov: CovarianceModel) -> LineParam:
    """Decompose the data along eta; errors out when eta carries no variance."""
    x_vec = np.asarray(x_vec, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if x_vec.shape != eta.shape:
        raise ValueError(f"shape mismatch: x {x_vec.shape} vs eta {eta.shape}")
    sigma_eta = cov.product(eta)
    var = float(np.dot(eta, sigma_eta))
    if var <= VARIANCE_FLOOR:
        raise DegenerateDirectionError(
            f"test direction has (near-)zero variance: {var:.3e}")
    b = sigma_eta / var
    z_obs = float(np.dot(eta, x_vec))
    a = x_vec - b * z_obs
    return LineParam(a=a, b=b, z_obs=z_obs, var=var)
