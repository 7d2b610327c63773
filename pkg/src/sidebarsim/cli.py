"""Command line front end.

Subcommands:

* run        simulate one scenario and print its metrics and trace digest
* compare    simulate all scenarios and print ratios against monolithic
* trace      print the canonical event trace of one run
* config     print the effective configuration and its fingerprint
* calibrate  grid-search transfer constants and write the winning config

Exit codes: 0 on success, 1 for configuration or simulation failures, 2 for
bad command line usage. Output is deterministic byte for byte for a fixed
command line and config.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources

from .calibrate import CalibrationGrid, calibrate
from .costmodel import SimConfig
from .errors import ConfigurationError, NoFeasiblePointError, SimulationError, UsageError
from .scenarios import (
    SCENARIO_NAMES,
    ScenarioResult,
    relative_to_monolithic,
    run_all,
    run_scenario,
)
from .simcore import serialize_trace
from .workload import ActivationKind, activation_from_key

FORMATS = ("text", "json", "csv")


def load_config(path: str | None) -> SimConfig:
    """Load `path`, or the packaged default configuration."""
    if path is not None:
        return SimConfig.from_file(path)
    packaged = resources.files("sidebarsim").joinpath("default.cfg")
    with resources.as_file(packaged) as real_path:
        return SimConfig.from_file(real_path)


def _run_record(result: ScenarioResult, clock_hz: float) -> dict:
    m = result.metrics
    return {
        "scenario": result.scenario,
        "activation": result.activation.key,
        "seed": result.seed,
        "latency_cycles": m.latency_cycles,
        "bus_bytes": m.bus_bytes,
        "sidebar_bytes": m.sidebar_bytes,
        "dram_energy_pj": m.dram_energy_pj,
        "sidebar_energy_pj": m.sidebar_energy_pj,
        "data_energy_pj": m.data_energy_pj,
        "accelerator_energy_pj": m.accelerator_energy_pj,
        "edp_joule_seconds": m.edp_joule_seconds(clock_hz),
        "digest": result.digest,
        "logits": [float(v) for v in result.logits],
    }


def _emit_records(records: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        json.dump(records if len(records) != 1 else records[0], out,
                  indent=2, sort_keys=True)
        out.write("\n")
        return
    if fmt == "csv":
        columns = [k for k in records[0] if k != "logits"]
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([_plain(record[c]) for c in columns])
        return
    for index, record in enumerate(records):
        if index:
            out.write("\n")
        width = max(len(k) for k in record)
        for key, value in record.items():
            if key == "logits":
                value = "[" + ", ".join(repr(v) for v in value) + "]"
            out.write(f"{key:<{width}}  {_plain(value)}\n")


def _plain(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cmd_run(args, out) -> int:
    config = load_config(args.config)
    kind = activation_from_key(args.activation)
    result = run_scenario(
        config, args.scenario, kind, args.seed, elu_alpha=args.elu_alpha
    )
    _emit_records([_run_record(result, config.transfer.clock_hz)], args.format, out)
    return 0


def _cmd_compare(args, out) -> int:
    config = load_config(args.config)
    kinds = [activation_from_key(k.strip()) for k in args.activations.split(",")]
    records = []
    for kind in kinds:
        results = run_all(config, kind, args.seed, elu_alpha=args.elu_alpha)
        rel = relative_to_monolithic(results, config.transfer.clock_hz)
        for name in SCENARIO_NAMES:
            m = results[name].metrics
            records.append(
                {
                    "activation": kind.key,
                    "scenario": name,
                    "latency_cycles": m.latency_cycles,
                    "latency_ratio": rel[name].latency_ratio,
                    "data_energy_pj": m.data_energy_pj,
                    "data_energy_ratio": rel[name].data_energy_ratio,
                    "edp_joule_seconds": m.edp_joule_seconds(
                        config.transfer.clock_hz
                    ),
                    "edp_ratio": rel[name].edp_ratio,
                    "digest": results[name].digest,
                }
            )
    if args.format == "text":
        _emit_table(records, out)
    else:
        _emit_records(records, args.format, out)
    return 0


def _emit_table(records: list[dict], out) -> None:
    columns = list(records[0])
    rows = [
        [
            f"{record[c]:.6g}" if isinstance(record[c], float) else str(record[c])
            for c in columns
        ]
        for record in records
    ]
    widths = [
        max(len(columns[i]), *(len(row[i]) for row in rows))
        for i in range(len(columns))
    ]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _cmd_trace(args, out) -> int:
    config = load_config(args.config)
    kind = activation_from_key(args.activation)
    result = run_scenario(
        config, args.scenario, kind, args.seed, elu_alpha=args.elu_alpha
    )
    text = serialize_trace(list(result.events), config)
    lines = text.splitlines()
    if args.limit is not None and args.limit < len(lines) - 2:
        kept = lines[: 1 + args.limit]
        kept.append(f"... {len(lines) - 2 - args.limit} more events")
        kept.append(lines[-1])
        lines = kept
    out.write("\n".join(lines) + "\n")
    return 0


def _cmd_config(args, out) -> int:
    config = load_config(args.config)
    out.write(config.canonical_text())
    out.write(f"fingerprint={config.fingerprint()}\n")
    return 0


def _cmd_calibrate(args, out) -> int:
    base = load_config(args.config)
    grid = CalibrationGrid.from_file(args.grid)
    result = calibrate(base, grid, seed=args.seed)
    result.config.to_file(args.out)
    out.write(
        f"feasible point after {result.points_tried} of "
        f"{grid.point_count()} candidates -> {args.out}\n"
    )
    for check in result.checks:
        out.write(check.describe() + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidebarsim",
        description=(
            "Deterministic co-simulation of a host CPU and neural network "
            "accelerators under monolithic, DMA-coupled, and shared-buffer "
            "coupling."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
            p.add_argument(
                "--activation",
                required=True,
                help="activation name, e.g. relu or softplus",
            )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--elu-alpha", type=float, default=1.0)
        p.add_argument("--config", default=None, help="config file path")

    p_run = sub.add_parser("run", help="simulate one scenario")
    common(p_run)
    p_run.add_argument("--format", choices=FORMATS, default="text")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="all scenarios vs monolithic")
    common(p_cmp, scenario=False)
    p_cmp.add_argument(
        "--activations",
        default="relu,softplus",
        help="comma-separated activation names",
    )
    p_cmp.add_argument("--format", choices=FORMATS, default="text")
    p_cmp.set_defaults(func=_cmd_compare)

    p_trace = sub.add_parser("trace", help="print the canonical event trace")
    common(p_trace)
    p_trace.add_argument("--limit", type=int, default=None)
    p_trace.set_defaults(func=_cmd_trace)

    p_cfg = sub.add_parser("config", help="print the effective configuration")
    p_cfg.add_argument("--config", default=None)
    p_cfg.set_defaults(func=_cmd_config)

    p_cal = sub.add_parser("calibrate", help="search a candidate grid")
    p_cal.add_argument("--grid", required=True, help="candidate grid file")
    p_cal.add_argument("--out", required=True, help="output config path")
    p_cal.add_argument("--seed", type=int, default=0)
    p_cal.add_argument("--config", default=None, help="base config file")
    p_cal.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, SimulationError, NoFeasiblePointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
