"""Command-line entry points.

Three subcommands:

* ``simulate``: run a configured scenario and write the results table.
* ``analyze``: gate and count a recorded time-tag file (CSV or TTAG1) and
  write a one-point results table.
* ``oracle``: print the model-predicted alpha for each sweep point of a
  configuration, for comparing simulated output against expectation.

Exit codes: 0 success, 2 configuration problem, 3 malformed input data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, DataFormatError, UndefinedEstimateError
from .estimators import alpha_estimate
from .events import Channel
from .gating import GatePolicy, count_gates, make_gates_from_trigger
from .scenario import (
    RESULTS_HEADER,
    emit_results_csv,
    oracle_per_point,
    parse_config,
    run_scenario,
)
from .timetags import TimetagFormat, parse_timetag_file

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

_GATE_CHANNELS = {"T": Channel.TRIGGER, "G": Channel.GATE_GEN}


def _read_config(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config(text)


def _write_out(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, master_seed=args.seed)
    result = run_scenario(config, jobs=args.jobs)
    _write_out(args.out, emit_results_csv(result))
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA
    stream = parse_timetag_file(data, args.format, duration_ps=args.duration_ps)
    window_ps = round(args.window_ns * 1000)
    if window_ps <= 0:
        raise ConfigError("--window-ns must be positive")
    gate_channel = _GATE_CHANNELS[args.gate_channel]
    policy = GatePolicy.ALLOW_OVERLAP if args.allow_overlap else GatePolicy.DROP_OVERLAPPING
    gates = make_gates_from_trigger(stream.select_channel(gate_channel), window_ps, policy)
    counts = count_gates(gates, stream.select_channel(Channel.D1), stream.select_channel(Channel.D2))
    est = alpha_estimate(counts)
    seconds = stream.duration_ps * 1e-12
    rate = len(gates) / seconds
    lines = [
        RESULTS_HEADER,
        f"1,{_g6(rate)},{counts.n_gates},{counts.n1},{counts.n2},{counts.nc},"
        f"{_g6(est.alpha)},{_g6(est.sigma)}",
    ]
    _write_out(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    expected = oracle_per_point(config)
    lines = ["point,expected_alpha"]
    lines.extend(f"{i},{_g6(a)}" for i, a in enumerate(expected, start=1))
    _write_out(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coincsim",
        description="Gated photon-coincidence simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured scenario")
    sim.add_argument("--config", required=True, help="scenario configuration file")
    sim.add_argument("--out", default="-", help="results CSV path ('-' for stdout)")
    sim.add_argument("--seed", type=int, default=None, help="override run.master_seed")
    sim.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sim.set_defaults(func=_cmd_simulate)

    ana = sub.add_parser("analyze", help="gate and count a time-tag file")
    ana.add_argument("--input", required=True, help="time-tag file to analyze")
    ana.add_argument(
        "--format", choices=[f.value for f in TimetagFormat], required=True,
        help="input file format",
    )
    ana.add_argument("--window-ns", type=float, default=7.0, help="gate window (ns)")
    ana.add_argument(
        "--gate-channel", choices=sorted(_GATE_CHANNELS), default="T",
        help="channel whose events open gates",
    )
    ana.add_argument(
        "--duration-ps", type=int, default=None,
        help="override the observation duration recorded/inferred from the file",
    )
    ana.add_argument(
        "--allow-overlap", action="store_true",
        help="keep gates that overlap an earlier gate instead of dropping them",
    )
    ana.add_argument("--out", default="-", help="results CSV path ('-' for stdout)")
    ana.set_defaults(func=_cmd_analyze)

    orc = sub.add_parser("oracle", help="print model-expected alpha per sweep point")
    orc.add_argument("--config", required=True, help="scenario configuration file")
    orc.add_argument("--out", default="-", help="output path ('-' for stdout)")
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, UndefinedEstimateError) as exc:
        print(f"input data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
