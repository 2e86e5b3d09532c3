"""Spot the odd points out: density-based anomaly detection on a toy set.

A point is an anomaly when it is neither dense itself (fewer than min_pts
neighbors within eps, counting itself) nor within eps of any dense point.
"""

import numpy as np

from siclad import DataMatrix, DbscanParams, detect_anomalies

rng = np.random.default_rng(7)

# two tight clusters and three stragglers
cluster_a = rng.normal(0.0, 0.15, size=(12, 2))
cluster_b = rng.normal(3.0, 0.15, size=(12, 2))
stragglers = np.array([[1.5, 1.5], [-2.0, 0.5], [3.0, -2.0]])
x = np.vstack([cluster_a, cluster_b, stragglers])

det = detect_anomalies(DataMatrix(x), DbscanParams(eps=0.6, min_pts=4))

print(f"{det.n} points, {det.n_clusters} clusters")
for i, (role, label) in enumerate(zip(det.roles, det.labels)):
    tag = f"cluster {label}" if label >= 0 else "--"
    print(f"  point {i:2d}  ({x[i, 0]:+5.2f}, {x[i, 1]:+5.2f})  {role:<6} {tag}")
print("anomalies:", det.anomalies.tolist())
