"""Command-line entry point.

    dmnls run <config.toml>          execute one preset run
    dmnls groundstate <config.toml>  ground-state search (preset must match)
    dmnls exponents --d D --p P      print the exponent report as JSON
    dmnls batch <dir>                run every *.toml in dir (parallel)

Exit codes: 0 all checks pass, 1 a hard-fail check failed, 2 config error,
3 runtime error.  DMNLS_MAX_WORKERS caps batch parallelism.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import parse_config, ConfigError
from .exponents import exponent_report
from .runner import run, EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR


def _cmd_run(path, expect_preset=None):
    try:
        config = parse_config(path)
    except ConfigError as exc:
        print(f"config error in {path}:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if expect_preset is not None and config.preset != expect_preset:
        print(f"config error in {path}: preset is {config.preset!r}, "
              f"this subcommand runs preset {expect_preset!r}",
              file=sys.stderr)
        return EXIT_CONFIG_ERROR
    outcome = run(config)
    for check in outcome.checks:
        verdict = "PASS" if check.passed else "FAIL"
        print(f"[{verdict}] {check.name}: {check.value}")
    print(f"{config.preset}: status={outcome.status} "
          f"manifest={outcome.manifest_path}")
    return outcome.exit_code


def _cmd_exponents(d, p):
    rep = exponent_report(d, p)
    print(json.dumps(dataclasses.asdict(rep), indent=2))
    return 0


def _batch_worker(path):
    return str(path), _cmd_run(str(path))


def _cmd_batch(directory):
    configs = sorted(Path(directory).glob("*.toml"))
    if not configs:
        print(f"no *.toml configs found in {directory}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    workers = int(os.environ.get("DMNLS_MAX_WORKERS", "0")) or min(
        len(configs), os.cpu_count() or 1)
    results = {}
    if workers <= 1:
        for path in configs:
            results[str(path)] = _cmd_run(str(path))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for name, code in pool.map(_batch_worker, configs):
                results[name] = code
    for name in sorted(results):
        print(f"{name}: exit {results[name]}")
    return max(results.values())


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="dmnls",
        description="Dispersion-managed NLS simulation and verification lab")
    parser.add_argument("--version", action="version",
                        version=f"dmnls {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured preset")
    p_run.add_argument("config", help="path to a TOML run config")

    p_gs = sub.add_parser("groundstate",
                          help="run a ground_state-preset config")
    p_gs.add_argument("config", help="path to a TOML run config")

    p_exp = sub.add_parser("exponents",
                           help="print the exponent report for (d, p)")
    p_exp.add_argument("--d", type=int, required=True, help="dimension")
    p_exp.add_argument("--p", type=float, required=True,
                       help="nonlinearity power")

    p_batch = sub.add_parser("batch",
                             help="run every *.toml config in a directory")
    p_batch.add_argument("directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args.config)
        if args.command == "groundstate":
            return _cmd_run(args.config, expect_preset="ground_state")
        if args.command == "exponents":
            return _cmd_exponents(args.d, args.p)
        return _cmd_batch(args.directory)
    except Exception as exc:  # surface anything unexpected as exit 3
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
