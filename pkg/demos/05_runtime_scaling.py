"""How the cost of one selective p-value grows with the sample size.

Each hypothesis pays for a walk across its search window: the more points,
the more pair boundaries the walk crosses, so both the wall-clock time and
the number of candidate intervals examined grow with n.
"""

from siclad import ExperimentConfig, bench

cfg = ExperimentConfig(n=100, d=1, delta=4.0, anomaly_count=5, sigma2=1.0,
                       eps=0.2, min_pts=5, trials=3, seed=0)
rows = bench(cfg, "n", (50, 100, 150, 200))

print(f"{'n':>4} {'median ms':>10} {'mean ms':>9} "
      f"{'median intervals':>17} {'p-values':>9}")
for row in rows:
    print(f"{row['value']:>4} {row['median_seconds'] * 1e3:>10.2f} "
          f"{row['mean_seconds'] * 1e3:>9.2f} "
          f"{row['median_intervals']:>17.0f} {row['p_values']:>9}")
