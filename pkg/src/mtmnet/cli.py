"""Command line front end.

    mtmnet sweep        --config FILE [--seed N] [--output CSV]
    mtmnet run          --config FILE [--seed N] [--output TRACE_DIR]
    mtmnet connectivity --config FILE [--seed N] [--output CSV]
    mtmnet summarize    --config FILE [--output CSV]

Results go to stdout, diagnostics to stderr. Exit status is 0 on success, 1 on
a runtime failure and 2 on a usage or configuration error. Set
``MTMNET_LOG_LEVEL`` (e.g. ``DEBUG``) for more logging.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence

from .config import RunConfig, load_config
from .errors import ConfigurationError, DivergenceError, SummaryError
from .harness import WITH_MTM, build_world, emit_csv, improvement_summary, read_csv, run_sweep
from .metric import total_mtm
from .radio import poisson_boolean_connected
from .scheduler import run_schedule

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
COMMANDS = ("sweep", "run", "connectivity", "summarize")
LOG_ENV = "MTMNET_LOG_LEVEL"

log = logging.getLogger("mtmnet")


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


@dataclass(frozen=True)
class CliCommand:
    command: str
    config: Path
    seed: Optional[int] = None
    output: Optional[str] = None


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() owns the exit code
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _parser() -> _Parser:
    p = _Parser(prog="mtmnet", description="Multi-channel hybrid ad-hoc network simulator.")
    sub = p.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}", parser_class=_Parser)
    helps = {
        "sweep": "run the with/without-metric load sweep and write the CSV table",
        "run": "schedule one network and report the outcome",
        "connectivity": "Boolean-model connectivity over a radius sweep",
        "summarize": "improvement summary of an existing sweep CSV",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("--config", required=True, type=Path, help="INI configuration file")
        if name != "summarize":
            s.add_argument("--seed", type=_seed, help="override the configured seed(s)")
        s.add_argument("--output", help="override the output location")
    return p


def parse_args(argv: Sequence[str]) -> CliCommand:
    parser = _parser()
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        raise UsageError("a subcommand is required", parser.format_usage())
    if not ns.config.is_file():
        raise UsageError(f"config file not found: {ns.config}", parser.format_usage())
    return CliCommand(ns.command, ns.config, getattr(ns, "seed", None), ns.output)


def _with_overrides(cfg: RunConfig, cmd: CliCommand) -> RunConfig:
    sweep = cfg.sweep
    if cmd.seed is not None:
        sweep = replace(sweep, seeds=(cmd.seed,))
    if cmd.output is not None and cmd.command in ("sweep", "summarize"):
        sweep = replace(sweep, output_path=cmd.output)
    return replace(cfg, sweep=sweep)


def _print_summary(table, out) -> None:
    summary = improvement_summary(table)
    print("load,traffic_gain_percent,max_hops_gain_percent", file=out)
    for load, traffic, hops in summary.per_load:
        print(f"{load:g},{traffic:.3f},{hops:.3f}", file=out)
    print(
        f"max traffic gain {summary.max_traffic_gain_percent:.1f}% at load {summary.argmax_load:g}; "
        f"max hops gain {summary.max_hops_gain_percent:.1f}%",
        file=out,
    )


def _sweep(cfg: RunConfig, cmd: CliCommand, out) -> int:
    if not cfg.sweep.output_path:
        raise ConfigurationError("no output path: set [harness] output_path or pass --output")
    table = run_sweep(cfg.sweep)
    emit_csv(table, cfg.sweep.output_path)
    diverged = {(r.variant, r.seed) for r in table.rows if r.termination == "diverged"}
    if diverged:
        log.warning("%d run(s) hit the round budget: %s", len(diverged), sorted(diverged))
    print(f"wrote {len(table)} rows to {cfg.sweep.output_path}", file=out)
    _print_summary(table, out)
    return EXIT_OK


def _run(cfg: RunConfig, cmd: CliCommand, out) -> int:
    sweep = cfg.sweep
    seed = sweep.seeds[0]
    world = build_world(sweep, seed)
    status = EXIT_OK
    print("variant,seed,total_mtm,rounds,termination", file=out)
    for variant in sweep.variants:
        try:
            assignment, trace = run_schedule(world, seed, variant == WITH_MTM, sweep.limits)
            termination = trace.termination
        except DivergenceError as err:
            log.error("%s seed %d: %s", variant, seed, err)
            assignment, trace, termination = err.assignment, err.trace, "diverged"
            status = EXIT_RUNTIME
        if cmd.output:
            Path(cmd.output).mkdir(parents=True, exist_ok=True)
            trace.write_jsonl(Path(cmd.output) / f"trace_{variant}_{seed}.jsonl")
        print(f"{variant},{seed},{total_mtm(assignment, world):.6f},{trace.rounds_used},{termination}", file=out)
    return status


def _connectivity(cfg: RunConfig, cmd: CliCommand, out) -> int:
    sweep = cfg.sweep
    seed = sweep.seeds[0]
    topology = build_world(sweep, seed).topology
    rows = [(r, *poisson_boolean_connected(topology, r)) for r in cfg.radii]
    header = ("radius", "connected", "component_count", "giant_fraction")
    lines = [header] + [(f"{r:g}", str(c).lower(), str(k), f"{g:.6f}") for r, c, k, g in rows]
    if cmd.output:
        with open(cmd.output, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(lines)
    for line in lines:
        print(",".join(line), file=out)
    return EXIT_OK


def _summarize(cfg: RunConfig, cmd: CliCommand, out) -> int:
    path = cfg.sweep.output_path
    if not path:
        raise ConfigurationError("no table to summarize: set [harness] output_path or pass --output")
    _print_summary(read_csv(path), out)
    return EXIT_OK


HANDLERS = {"sweep": _sweep, "run": _run, "connectivity": _connectivity, "summarize": _summarize}


def execute(cmd: CliCommand, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = _with_overrides(load_config(cmd.config), cmd)
    except ConfigurationError as err:
        print(f"mtmnet: configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return HANDLERS[cmd.command](cfg, cmd, out)
    except ConfigurationError as err:
        print(f"mtmnet: configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SummaryError, RuntimeError, ValueError) as err:
        print(f"mtmnet: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as err:
        sys.stderr.write(err.usage)
        print(f"mtmnet: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
