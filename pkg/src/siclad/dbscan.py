"""Density-based detection: cores, borders, and the noise set used as anomalies.

Neighborhoods are self-inclusive Euclidean balls compared on squared
distances, so a point on the boundary (dist == eps) counts as a neighbor.
A point is *core* when its neighborhood holds at least ``min_pts`` points
(itself included), *border* when it is non-core but within ``eps`` of some
core, and *noise* otherwise.  The noise set is the anomaly set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import DataMatrix, DbscanParams

ROLE_CORE = "core"
ROLE_BORDER = "border"
ROLE_NOISE = "noise"


def eps_neighborhoods(x: DataMatrix | np.ndarray, eps: float) -> np.ndarray:
    """Boolean adjacency A[i, j] = (||X_i - X_j||^2 <= eps^2); diagonal is True."""
    pts = x.values if isinstance(x, DataMatrix) else np.asarray(x, float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return d2 <= eps * eps


def core_mask(adjacency: np.ndarray, min_pts: int) -> np.ndarray:
    """Points whose (self-inclusive) neighborhood has at least min_pts members."""
    return adjacency.sum(axis=1) >= min_pts


def noise_mask(adjacency: np.ndarray, min_pts: int) -> np.ndarray:
    """Non-core points with no core in their neighborhood.

    This is the anomaly indicator implied by the role definitions; it does not
    depend on how clusters are grown, so it can be evaluated from an adjacency
    matrix alone (the hot path of the region search relies on that).
    """
    core = core_mask(adjacency, min_pts)
    reach = adjacency @ core > 0
    return ~core & ~reach


@dataclass(frozen=True)
class DetectionResult:
    """Roles, cluster labels (-1 for noise), and the sorted anomaly indices."""

    roles: np.ndarray
    labels: np.ndarray
    anomalies: np.ndarray

    @property
    def n(self) -> int:
        return self.roles.shape[0]

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def inliers(self) -> np.ndarray:
        """Sorted indices of non-anomalous points."""
        return np.setdiff1d(np.arange(self.n), self.anomalies)


def detect_anomalies(x: DataMatrix | np.ndarray, params: DbscanParams) -> DetectionResult:
    """Run the full clustering and return roles, labels, and the noise set.

    Clusters are grown breadth-first from unlabeled core points scanned in
    ascending index order, and neighbors are visited in ascending index order,
    so labels are a deterministic function of the row order.  Border points
    keep the label of the first cluster that reaches them.
    """
    adj = eps_neighborhoods(x, params.eps)
    n = adj.shape[0]
    core = core_mask(adj, params.min_pts)
    reach = adj @ core > 0

    labels = np.full(n, -1, dtype=int)
    cluster = 0
    for seed in range(n):
        if not core[seed] or labels[seed] != -1:
            continue
        labels[seed] = cluster
        queue = deque([seed])
        while queue:
            u = queue.popleft()
            if not core[u]:
                continue  # borders are claimed but never expanded
            for v in np.flatnonzero(adj[u]):
                if labels[v] == -1:
                    labels[v] = cluster
                    queue.append(v)
        cluster += 1

    roles = np.where(core, ROLE_CORE, np.where(reach, ROLE_BORDER, ROLE_NOISE))
    anomalies = np.flatnonzero(~core & ~reach)
    return DetectionResult(roles=roles, labels=labels, anomalies=anomalies)
