"""Look inside the machinery: the truncation region along the test line.

For one detected anomaly the data is decomposed as a + b*z so that z is the
test statistic.  Sliding z re-runs the detection at every position; the
region collects exactly those z where the same anomaly set comes back.  The
p-value is the two-sided tail mass of N(0, sd^2) inside that region, and the
single interval around z_obs is what the over-conditioned variant uses.
"""

import numpy as np

from siclad import (DataMatrix, DbscanParams, SignContext, build_covariance,
                    detect_anomalies, direction_1d, line_parameterization,
                    line_search, oc_p, selective_p)

n = 40
rng = np.random.default_rng(11)
x = rng.standard_normal(n) * 0.5
x[5] += 2.4  # one planted outlier

params = DbscanParams(eps=0.3, min_pts=4)
xm = DataMatrix(x)
det = detect_anomalies(xm, params)
print("anomalies:", det.anomalies.tolist())

j = int(det.anomalies[0])
cov = build_covariance("scalar", n=n, d=1, sigma2=0.25)
eta = direction_1d(n, j, det.anomalies)
line = line_parameterization(xm.vec(), eta, cov)
search = line_search(line, params, det.anomalies, n, 1)

print(f"\ntesting index {j}: z_obs={line.z_obs:.4f}, sd={line.sd:.4f}")
print(f"window [{search.z_min:.2f}, {search.z_max:.2f}], "
      f"{search.steps} cells examined")
print(f"region ({len(search.region)} intervals):")
for lo, hi in search.region:
    mark = "  <-- contains z_obs" if lo <= line.z_obs <= hi else ""
    print(f"  [{lo:+9.4f}, {hi:+9.4f}]{mark}")

# a crude picture: 72 columns spanning the window, # where z is in the region
cols = 72
grid = np.linspace(search.z_min, search.z_max, cols)
row = "".join("#" if search.region.contains(float(z)) else "." for z in grid)
pos = int((line.z_obs - search.z_min) / (search.z_max - search.z_min) * (cols - 1))
print("\n" + row)
print(" " * pos + "^ z_obs")

p_full = selective_p(search.region, line.z_obs, line.sd)
p_cell = oc_p(line.z_obs, line.sd, search.observed_cell)
print(f"\nselective p (whole region):      {p_full:.5f}")
print(f"over-conditioned p (one cell):   {p_cell:.5f}")
