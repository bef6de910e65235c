#!/usr/bin/env python3
"""Scan the focusing Gaussian family lambda * exp(-x^2) for collapse.

For each amplitude the data is evolved forward (and optionally backward)
with the adaptive stepper, and the run is classified by its termination
status; the printed table shows where the completing/collapsing boundary
sits and how the gradient growth behaves on either side of it.

    python3 scripts/amplitude_scan.py
    python3 scripts/amplitude_scan.py --p 10 --t-final 20 \\
        --amplitudes 0.3 0.6 1.2 1.8 2.4
"""
import argparse
import sys
import time

import numpy as np

from dmnls.dynamics import ModelParams, StepperConfig, evolve
from dmnls.spectral import gradient_norm_sq, make_field, make_grid


def classify(amplitude, args, direction=+1.0):
    g = make_grid(1, args.points, args.box)
    u0 = make_field(g, amplitude * np.exp(-g.x[0] ** 2))
    params = ModelParams(dimension=1, p=args.p, sign="focusing")
    stepper = StepperConfig(dt=args.dt, adaptive=True, tol=args.tol,
                            max_dt=args.dt, min_dt=args.min_dt,
                            blowup_gradient_factor=1e3)
    t_final = direction * args.t_final
    t0 = time.perf_counter()
    traj = evolve(u0, params, stepper, t_final, (t_final,),
                  boundary_mass_threshold=args.boundary_threshold)
    wall = time.perf_counter() - t0
    grad_ratio = float("nan")
    if traj.status == "completed":
        ratio_sq = gradient_norm_sq(traj.checkpoints[-1][1]) \
            / gradient_norm_sq(u0)
        grad_ratio = float(np.sqrt(ratio_sq))
    return traj.status, traj.blowup_time, grad_ratio, wall


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--amplitudes", nargs="+", type=float,
                        default=[0.3, 0.6, 1.2, 1.8, 2.4, 3.0])
    parser.add_argument("--p", type=float, default=10.0)
    parser.add_argument("--t-final", type=float, default=20.0)
    parser.add_argument("--points", type=int, default=2048)
    parser.add_argument("--box", type=float, default=256.0)
    parser.add_argument("--dt", type=float, default=1e-2)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--min-dt", type=float, default=1e-4,
                        help="dt underflow below this classifies collapse")
    parser.add_argument("--boundary-threshold", type=float, default=1e-2)
    parser.add_argument("--both-directions", action="store_true",
                        help="also classify each amplitude backward in time")
    args = parser.parse_args(argv)

    directions = (+1.0, -1.0) if args.both_directions else (+1.0,)
    print(f"p = {args.p:g}, T = {args.t_final:g}, grid {args.points} points "
          f"on [-{args.box / 2:g}, {args.box / 2:g}]")
    print(f"{'lambda':>8} {'dir':>4} {'status':<14} {'t_detect':>9} "
          f"{'grad_ratio':>11} {'wall':>7}")
    for amplitude in args.amplitudes:
        for direction in directions:
            status, t_blow, ratio, wall = classify(amplitude, args, direction)
            t_text = "-" if t_blow is None else f"{t_blow:9.3f}"
            r_text = "-" if np.isnan(ratio) else f"{ratio:11.2f}"
            print(f"{amplitude:8.3f} {'+' if direction > 0 else '-':>4} "
                  f"{status:<14} {t_text:>9} {r_text:>11} {wall:6.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
