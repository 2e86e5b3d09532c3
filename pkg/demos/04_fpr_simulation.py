"""A miniature of the calibration study: false positive rates under the null.

Fifty null trials (no planted anomalies).  Every rejection is by definition
a false positive; the selective method should reject about alpha of the
tested hypotheses while the naive z-test rejects most of them.  The full
study (500 trials, more methods) runs via the experiments module or the CLI.
"""

from siclad import ExperimentConfig, run_rate_experiment

cfg = ExperimentConfig(n=100, d=1, delta=0.0, sigma2=1.0, eps=0.2, min_pts=5,
                       trials=50, alpha=0.05, seed=1,
                       methods=("selective", "oc", "naive", "bonferroni"))
table = run_rate_experiment(cfg, "fpr")

print(f"{cfg.trials} null trials, alpha={cfg.alpha}")
print(f"{'method':<12} {'FPR':>7} {'rejected':>9} {'tested':>7}")
for row in table.summary:
    print(f"{row['method']:<12} {row['rate']:>7.3f} "
          f"{row['rejected']:>9} {row['tested']:>7}")
