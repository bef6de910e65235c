#!/usr/bin/env python3
"""Run the full verification suite: every preset, stock configuration.

Generates a minimal TOML config per preset under the output root, executes
them sequentially through the runner (the same path `dmnls run` takes), and
prints one line per check plus a final summary table.  Exit code is the worst
run's exit code (0 pass, 1 check failure, 2 config error, 3 runtime error).

    python3 scripts/run_verification_suite.py --out /tmp/verification
    python3 scripts/run_verification_suite.py --only free_sanity pce_check
"""
import argparse
import sys
import time
from pathlib import Path

from dmnls.config import PRESETS, config_from_dict
from dmnls.runner import run

# roughly increasing cost; the slow tail is all scattering-type runs
ORDER = (
    "free_sanity",
    "exponents_table",
    "ground_state",
    "pce_check",
    "time_reversal",
    "blowup_dichotomy",
    "small_data_scatter_intercritical",
    "small_data_scatter_subcritical",
    "nonscattering",
    "decay_rates",
    "large_data_scatter",
)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("verification_runs"),
                        help="output root (one subdirectory per preset)")
    parser.add_argument("--only", nargs="*", choices=PRESETS, default=None,
                        metavar="PRESET", help="subset of presets to run")
    args = parser.parse_args(argv)

    presets = [p for p in ORDER if args.only is None or p in args.only]
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for preset in presets:
        config = config_from_dict({"preset": preset,
                                   "output_dir": str(args.out / preset)})
        print(f"=== {preset}")
        t0 = time.perf_counter()
        outcome = run(config)
        wall = time.perf_counter() - t0
        for check in outcome.checks:
            verdict = "PASS" if check.passed else "FAIL"
            print(f"  [{verdict}] {check.name}: {check.value}")
        rows.append((preset, outcome.status, outcome.exit_code, wall))
        print(f"  -> {outcome.status} in {wall:.1f}s "
              f"({outcome.manifest_path})")

    width = max(len(p) for p, *_ in rows)
    print("\n" + "-" * (width + 30))
    for preset, status, code, wall in rows:
        print(f"{preset:<{width}}  {status:<12} exit {code}  {wall:7.1f}s")
    return max(code for _, _, code, _ in rows)


if __name__ == "__main__":
    sys.exit(main())
