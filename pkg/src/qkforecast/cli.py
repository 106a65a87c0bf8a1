"""Command line interface.

Subcommands: run (full experiment), verify (self-check suites), kernels
(precompute kernel caches for one station), report (aggregate + figures),
synth (generate a synthetic station CSV).  Exit codes: 0 on success, 1 on
total failure, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, QkforecastError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkforecast",
        description="QFT-kernel ridge regression forecasting experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--jobs", type=int, default=None,
                       help="worker threads (default from config)")

    sub.add_parser("verify", help="run the self-check suites")

    p_kernels = sub.add_parser("kernels",
                               help="precompute kernel matrices for one station")
    p_kernels.add_argument("--config", required=True)
    p_kernels.add_argument("--station", required=True)

    p_report = sub.add_parser("report", help="aggregate a finished run directory")
    p_report.add_argument("--dir", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic station CSV")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--days", type=int, default=30)
    p_synth.add_argument("--seed", type=int, default=0)
    return parser


def cmd_run(args) -> int:
    from .experiment import load_config, run_experiment

    config = load_config(args.config)
    manifest = run_experiment(config, jobs=args.jobs)
    for code, record in sorted(manifest.stations.items()):
        timings = ", ".join(f"{k}={v:.1f}s" for k, v in record["timings_s"].items())
        print(f"{code}: ok ({timings})")
    for code, reason in sorted(manifest.failures.items()):
        print(f"{code}: FAILED ({reason})")
    if manifest.stations:
        print(f"manifest: {os.path.join(config.output_dir, 'manifest.json')}")
        return 0
    print("all stations failed", file=sys.stderr)
    return 1


def cmd_verify(_args) -> int:
    from .verify import run_all_suites

    results = run_all_suites()
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        failed += 0 if r.passed else 1
    return 0 if failed == 0 else 1


def cmd_kernels(args) -> int:
    from .experiment import GramCache, load_config, station_grams
    from .krr import save_kernel_matrix
    from .pipeline import make_windows, standardize, ingest_csv

    config = load_config(args.config)
    matches = [s for s in config.stations if s.code == args.station]
    if not matches:
        raise ConfigError(f"station {args.station!r} not in config")
    entry = matches[0]
    spec = config.split_spec()
    series = ingest_csv(entry.path, config.features, config.target,
                        station_code=entry.code)
    scaled, _ = standardize(series, spec)
    window_sets = make_windows(scaled, spec)
    out_dir = os.path.join(config.output_dir, "kernels", entry.code)
    os.makedirs(out_dir, exist_ok=True)
    cache = GramCache(None)  # compute fresh; files below are the product
    written = 0
    for family in config.kernels:
        blocks = station_grams(config, window_sets, family, cache, entry.code)
        for split, kernels in blocks.items():
            for feature, block in zip(config.features, kernels):
                name = f"{feature}_{family}_{split}_train.qkrn"
                save_kernel_matrix(os.path.join(out_dir, name), block)
                written += 1
    print(f"{entry.code}: wrote {written} kernel blocks to {out_dir}")
    return 0


def cmd_report(args) -> int:
    from .report import build_report

    bundle = build_report(args.dir)
    print(f"aggregate: {bundle.json_path}")
    print(f"stations:  {bundle.station_csv_path}")
    print(f"classes:   {bundle.class_csv_path}")
    for path in bundle.figure_paths:
        print(f"figure:    {path}")
    return 0


def cmd_synth(args) -> int:
    from .synth import STEPS_PER_DAY, generate_synthetic_station, write_station_csv

    if args.days < 1:
        raise ConfigError("--days must be >= 1")
    series = generate_synthetic_station(args.days * STEPS_PER_DAY, seed=args.seed)
    write_station_csv(args.out, series)
    print(f"wrote {len(series)} rows to {args.out}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "kernels": cmd_kernels,
    "report": cmd_report,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QkforecastError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
