#!/usr/bin/env python3
"""Sweep a heralded pair source over trigger rates and tabulate alpha.

Builds the scenario in code (no config file needed), runs each sweep point,
and prints a CSV with the measured alpha, its error, the model expectation,
and the pull at each rate — ready to pipe into a plotting tool:

    python3 scripts/rate_sweep.py --pair-rate 5000 --multipliers 1 4 16 64 \
        --acquisitions 100 > sweep.csv
"""

from __future__ import annotations

import argparse
import sys

from coincsim.scenario import ScenarioConfig, oracle_per_point, run_scenario
from coincsim.sources import PdcSourceConfig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pair-rate", type=float, default=5000.0, help="base pair rate (Hz)")
    parser.add_argument(
        "--multipliers", type=float, nargs="+", default=[1, 2.5, 5, 10, 20, 40],
        help="pair-rate multipliers, one sweep point each",
    )
    parser.add_argument("--acquisitions", type=int, default=100, help="1 s acquisitions per point")
    parser.add_argument("--window-ns", type=float, default=7.0, help="gate window (ns)")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    args = parser.parse_args(argv)

    config = ScenarioConfig(
        source=PdcSourceConfig(pair_rate_hz=args.pair_rate),
        window_ps=round(args.window_ns * 1000),
        acquisitions=args.acquisitions,
        master_seed=args.seed,
        multipliers=tuple(args.multipliers),
        label="trigger-rate sweep",
    )
    expected = oracle_per_point(config)
    result = run_scenario(config, jobs=args.jobs)

    print("trigger_rate_cps,alpha,sigma,expected_alpha,pull")
    for point, model in zip(result.points, expected):
        est = point.estimate
        pull = (est.alpha - model) / est.sigma
        print(
            f"{point.rate_cps:.6g},{est.alpha:.6g},{est.sigma:.6g},"
            f"{model:.6g},{pull:.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
