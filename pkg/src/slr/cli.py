"""Command line entry point: ``slr bench`` and ``slr register``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import bench
from .io import load_point_cloud, write_results
from .model import PointCloud
from .registration import RegistrationScene, reconstruct_model, register


def _summary_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".summary.csv"


def cmd_bench(args) -> int:
    spec = bench.load_spec(args.spec)
    if args.preset:
        spec = bench.apply_preset(spec, args.preset)
    if args.trials is not None:
        spec.trials = args.trials
        spec.__post_init__()
    if args.seed is not None:
        spec.seed = args.seed
    rows = bench.run_experiment(spec, workers=args.workers)
    write_results(rows, args.out, args.format)
    summary = bench.summarize(rows)
    with open(_summary_path(args.out), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=bench.SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in summary:
            w.writerow({k: (format(v, ".9g") if isinstance(v, float) else v) for k, v in rec.items()})
    failed = sum(r.error is not None for r in rows)
    print(f"{len(rows)} rows written to {args.out} ({failed} with errors)")
    for rec in summary:
        if rec["statistic"] == "median":
            print(f"  {rec['method']:>10s}  {spec.swept}={rec['sweep_value']:<10g} "
                  f"perm_err={rec['perm_error_rate']:.4f}  nmse_db={rec['nmse_x_db']:.2f}")
    return 0


def cmd_register(args) -> int:
    Q = load_point_cloud(args.model)
    P = load_point_cloud(args.image)
    if args.sigma2:
        rng = np.random.default_rng(args.seed)
        Q = PointCloud(Q.points + np.sqrt(args.sigma2) * rng.standard_normal(Q.points.shape))
    scene = RegistrationScene(P, Q)
    result = register(scene)
    Q_hat = reconstruct_model(scene, result)
    inv = result.perm.inverse().map
    np.set_printoptions(precision=6, suppress=True)
    print("rotation:")
    print(result.rotation)
    print("translation:", result.translation)
    print("rms residual:", float(np.sqrt(np.mean((Q_hat - Q.points) ** 2))))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q_index", "p_index", "x", "y", "z"])
            for i, (x, y, z) in enumerate(Q_hat):
                w.writerow([i, int(inv[i]), format(x, ".9g"), format(y, ".9g"), format(z, ".9g")])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slr", description="Shuffled linear regression tools")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a Monte-Carlo experiment described by an INI file")
    b.add_argument("spec", help="experiment file ([experiment], [fixed], [solver] sections)")
    b.add_argument("--preset", choices=["desk"], help="shrink the run to desk scale")
    b.add_argument("--trials", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--out", default="results.csv")
    b.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    b.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $SLR_THREADS or 1)")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("register", help="register an image point set P to a model Q")
    r.add_argument("model", help="model point set Q (.ply or .xyz)")
    r.add_argument("image", help="observed point set P (.ply or .xyz)")
    r.add_argument("--sigma2", type=float, default=0.0,
                   help="add N(0, sigma2) noise to the model coordinates first")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", help="CSV of the reconstructed model points")
    r.set_defaults(func=cmd_register)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"slr: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
