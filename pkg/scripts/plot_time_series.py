#!/usr/bin/env python3
"""Plot diagnostics columns from a run's time_series.csv.

    python3 scripts/plot_time_series.py /tmp/runs/decay_rates \\
        --columns Ju_norm w_norm_p2 --logy --out decay.png

Requires matplotlib (install the package with the [plots] extra).
"""
import argparse
import sys
from pathlib import Path

from dmnls.io import read_time_series_csv


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run_dir", type=Path,
                        help="run output directory (or a CSV file directly)")
    parser.add_argument("--columns", nargs="+",
                        default=["mass", "energy_defocusing"])
    parser.add_argument("--logy", action="store_true")
    parser.add_argument("--out", type=Path, default=None,
                        help="output image (default: <run_dir>/series.png)")
    args = parser.parse_args(argv)

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required: pip install 'dmnls[plots]'",
              file=sys.stderr)
        return 2

    csv_path = args.run_dir if args.run_dir.suffix == ".csv" \
        else args.run_dir / "time_series.csv"
    series = read_time_series_csv(csv_path)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name in args.columns:
        ax.plot(series.t, series.column(name), label=name, linewidth=1.2)
    ax.set_xlabel("t")
    if args.logy:
        ax.set_yscale("log")
    ax.legend(frameon=False)
    ax.set_title(csv_path.parent.name)
    fig.tight_layout()
    out = args.out or csv_path.parent / "series.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
