"""Command-line front end: detection, inference, experiments, benchmarks.

Four subcommands wrap the library: ``detect`` (anomaly detection only),
``test`` (detection plus p-values), ``experiment fpr|tpr`` (Monte Carlo rate
tables) and ``bench`` (timing sweeps).  Output is JSON or CSV with a stable
schema; indices in all output are 1-based.

Exit codes: 0 success, 2 ingestion failure, 3 usage error, 4 numerical
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .dbscan import detect_anomalies
from .errors import IngestionError, SicladError
from .experiments import ExperimentConfig, bench, run_rate_experiment
from .model import DbscanParams, build_covariance, load_observations
from .pipeline import METHODS, si_clad


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is taken by ingestion errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _methods_list(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [m for m in items if m not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {bad or [text]}; choose from {', '.join(METHODS)}")
    return items


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_io_flags(p):
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")


def _add_data_flags(p):
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--has-header", action="store_true",
                   help="skip the first row of --input (and --cov-file)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--min-pts", type=int, required=True)


def _add_cov_flags(p, required: bool):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--sigma2", type=float, help="independent noise variance")
    g.add_argument("--rho", type=float,
                   help="AR(1) feature correlation rho^|k-l|, unit variance")
    g.add_argument("--cov-file", metavar="CSV",
                   help="explicit d x d feature covariance")


def _add_test_flags(p):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--methods", type=_methods_list, default=("selective",),
                   metavar="M1,M2,...")
    p.add_argument("--z-span", type=float, default=20.0,
                   help="search window half-width in null sd units")
    p.add_argument("--delta-step", type=float, default=1e-3,
                   help="walk step past each cell boundary")


def _add_experiment_flags(p, deltas: bool):
    p.add_argument("--n", type=_int_list, default=(100,), metavar="N1,N2,...")
    p.add_argument("--d", type=int, default=1)
    if deltas:
        p.add_argument("--delta", type=_float_list, required=True,
                       metavar="D1,D2,...", help="anomaly mean shift(s)")
    p.add_argument("--rho", type=_float_list, default=None, metavar="R1,R2,...",
                   help="AR(1) feature correlation(s); default independent noise")
    p.add_argument("--sigma2", type=float, default=None,
                   help="independent noise variance (default 1)")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--min-pts", type=int, default=5)
    p.add_argument("--anomaly-count", type=int, default=None,
                   help="planted rows per trial (default n // 3)")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", type=_methods_list, default=("selective",),
                   metavar="M1,M2,...")
    p.add_argument("--z-span", type=float, default=20.0)
    p.add_argument("--delta-step", type=float, default=1e-3)
    p.add_argument("--raw-out", metavar="PATH",
                   help="also write per-hypothesis rows as CSV to PATH")


def build_parser() -> _Parser:
    parser = _Parser(prog="siclad")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="flag anomalies, no inference")
    _add_data_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("test", help="detect, then p-values per anomaly")
    _add_data_flags(p)
    _add_cov_flags(p, required=True)
    _add_test_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("experiment", help="Monte Carlo error/power rates")
    esub = p.add_subparsers(dest="mode", required=True)
    for mode in ("fpr", "tpr"):
        ep = esub.add_parser(mode)
        _add_experiment_flags(ep, deltas=(mode == "tpr"))
        _add_io_flags(ep)
        ep.set_defaults(func=cmd_experiment, mode=mode)

    p = sub.add_parser("bench", help="time the selective test, sweep n or d")
    p.add_argument("--n", type=_int_list, default=None, metavar="N1,N2,...",
                   help="sample sizes to sweep (default 50,100,150,200)")
    p.add_argument("--d", type=_int_list, default=None, metavar="D1,D2,...",
                   help="sweep dimension instead of sample size")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--min-pts", type=int, default=5)
    p.add_argument("--anomaly-count", type=int, default=None)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-span", type=float, default=20.0)
    p.add_argument("--delta-step", type=float, default=1e-3)
    _add_io_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


# ---------------------------------------------------------------------------
# serialization helpers


def _finite_or_none(v: float) -> float | None:
    return None if math.isinf(v) else float(v)


def _region_payload(region) -> list[list[float | None]] | None:
    if region is None:
        return None
    return [[_finite_or_none(lo), _finite_or_none(hi)]
            for lo, hi in region.intervals.tolist()]


def _emit(payload, headers, rows, args) -> None:
    """Write JSON (payload) or CSV (headers+rows) to --out or stdout."""
    if args.output == "json":
        text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    else:
        import io
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(headers)
        w.writerows([["" if v is None else v for v in row] for row in rows])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_cov(args, n: int, d: int):
    if args.sigma2 is not None:
        return build_covariance("scalar", n=n, d=d, sigma2=args.sigma2)
    if args.rho is not None:
        return build_covariance("ar1", n=n, d=d, rho=args.rho)
    xi = load_observations(args.cov_file, has_header=args.has_header).values
    if xi.shape != (d, d):
        raise IngestionError(
            f"covariance file must be {d}x{d} to match the data, "
            f"got {xi.shape[0]}x{xi.shape[1]}")
    try:
        return build_covariance("feature", n=n, d=d, matrix=xi)
    except ValueError as exc:
        raise IngestionError(f"covariance file: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_detect(args) -> int:
    x = load_observations(args.input, has_header=args.has_header)
    det = detect_anomalies(x, DbscanParams(eps=args.eps, min_pts=args.min_pts))
    labels = [None if l < 0 else int(l) + 1 for l in det.labels.tolist()]
    payload = {
        "n": x.n,
        "d": x.d,
        "eps": args.eps,
        "min_pts": args.min_pts,
        "anomalies": [j + 1 for j in det.anomalies.tolist()],
        "n_clusters": det.n_clusters,
        "roles": det.roles.tolist(),
        "labels": labels,
    }
    rows = [[i + 1, role, lab] for i, (role, lab)
            in enumerate(zip(payload["roles"], labels))]
    _emit(payload, ["index", "role", "cluster"], rows, args)
    return 0


def cmd_test(args) -> int:
    x = load_observations(args.input, has_header=args.has_header)
    cov = _load_cov(args, x.n, x.d)
    params = DbscanParams(eps=args.eps, min_pts=args.min_pts)
    report = si_clad(x, cov, params, args.methods,
                     delta=args.delta_step, span=args.z_span)

    results = []
    for r in report.results:
        results.append({
            "index": r.j + 1,
            "z_obs": r.z_obs,
            "sd": r.sd,
            "signs": None if r.signs is None else [int(s) for s in r.signs],
            "p_values": {m: float(r.p_values[m])
                         for m in args.methods if m in r.p_values},
            "rejected": {m: bool(p <= args.alpha) for m, p in r.p_values.items()},
            "region": _region_payload(r.region),
            "observed_cell": (None if r.observed_cell is None else
                              [_finite_or_none(r.observed_cell[0]),
                               _finite_or_none(r.observed_cell[1])]),
        })
    payload = {
        "n": x.n,
        "d": x.d,
        "eps": args.eps,
        "min_pts": args.min_pts,
        "alpha": args.alpha,
        "methods": list(args.methods),
        "anomalies": [j + 1 for j in report.anomalies.tolist()],
        "results": results,
        "skips": [{"index": s.j + 1, "method": s.method, "reason": s.reason}
                  for s in report.skips],
        "rejected": {m: [j + 1 for j in js]
                     for m, js in report.rejections(args.alpha).items()},
    }

    skip_reasons = {(s.j, s.method): s.reason for s in report.skips}
    rows = []
    for r in report.results:
        for m in args.methods:
            p = r.p_values.get(m)
            rows.append([r.j + 1, m, r.z_obs, r.sd, p,
                         p is not None and p <= args.alpha,
                         skip_reasons.get((r.j, m), "")])
    _emit(payload, ["index", "method", "z_obs", "sd", "p_value", "rejected",
                    "skip_reason"], rows, args)
    return 0


def _experiment_config(args, mode: str):
    """Base config plus the swept parameter/values, from comma-list flags."""
    sweeps = {"n": tuple(args.n)}
    if mode == "tpr":
        sweeps["delta"] = tuple(args.delta)
    if args.rho is not None:
        if args.sigma2 is not None:
            raise _UsageError("specify at most one of --sigma2 and --rho")
        sweeps["rho"] = tuple(args.rho)
    multi = [k for k, v in sweeps.items() if len(v) > 1]
    if len(multi) > 1:
        raise _UsageError(f"only one parameter may sweep; got lists for {multi}")
    sweep_param = multi[0] if multi else None

    sigma2 = args.sigma2
    if sigma2 is None and args.rho is None:
        sigma2 = 1.0
    cfg = ExperimentConfig(
        n=sweeps["n"][0], d=args.d,
        delta=sweeps["delta"][0] if mode == "tpr" else 0.0,
        anomaly_count=args.anomaly_count, sigma2=sigma2,
        rho=sweeps["rho"][0] if args.rho is not None else None,
        eps=args.eps, min_pts=args.min_pts, trials=args.trials,
        alpha=args.alpha, seed=args.seed, methods=args.methods,
        delta_step=args.delta_step, span=args.z_span)
    values = sweeps[sweep_param] if sweep_param else None
    return cfg, sweep_param, values


def cmd_experiment(args) -> int:
    try:
        cfg, sweep_param, values = _experiment_config(args, args.mode)
    except (ValueError, _UsageError) as exc:
        print(f"siclad experiment: error: {exc}", file=sys.stderr)
        return 3
    table = run_rate_experiment(cfg, args.mode, sweep_param, values)
    key = table.sweep_param
    headers = ["mode", "method", key, "rate", "rejected", "tested",
               "skipped", "trials"]
    rows = [[r[h] for h in headers] for r in table.summary]
    if args.raw_out:
        raw_headers = ["trial", "index", "null", "method", "p_value",
                       "rejected", "skip_reason", key]
        with open(args.raw_out, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(raw_headers)
            for r in table.raw:
                w.writerow(["" if r[h] is None else r[h] for h in raw_headers])
    payload = {"mode": table.mode, "sweep_param": key,
               "summary": list(table.summary)}
    _emit(payload, headers, rows, args)
    return 0


def cmd_bench(args) -> int:
    if args.d is not None:
        if args.n is not None and len(args.n) > 1:
            print("siclad bench: error: sweep either --n or --d, not both",
                  file=sys.stderr)
            return 3
        sweep_param, values = "d", args.d
        base_n = args.n[0] if args.n else 100
    else:
        sweep_param, values = "n", args.n or (50, 100, 150, 200)
        base_n = values[0]
    sigma2 = args.sigma2
    if sigma2 is None and args.rho is None:
        sigma2 = 1.0
    try:
        cfg = ExperimentConfig(
            n=base_n, d=1, delta=args.delta,
            anomaly_count=args.anomaly_count, sigma2=sigma2, rho=args.rho,
            eps=args.eps, min_pts=args.min_pts, trials=args.trials,
            seed=args.seed, methods=("selective",),
            delta_step=args.delta_step, span=args.z_span)
    except ValueError as exc:
        print(f"siclad bench: error: {exc}", file=sys.stderr)
        return 3
    rows = bench(cfg, sweep_param, values)
    headers = ["param", "value", "median_seconds", "mean_seconds",
               "median_intervals", "mean_intervals", "p_values", "trials"]
    _emit({"sweep_param": sweep_param, "rows": rows},
          headers, [[r[h] for h in headers] for r in rows], args)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IngestionError as exc:
        print(f"siclad: ingestion error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"siclad: ingestion error: {exc}", file=sys.stderr)
        return 2
    except SicladError as exc:
        print(f"siclad: numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
