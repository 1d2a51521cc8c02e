"""Command line interface: validate configs, run sweeps, write preset configs.

Exit codes: 0 success, 2 validation failure, 3 model failure in every row.
The BEAMLINK_WORKERS environment variable overrides the configured worker
count; no other environment coupling exists.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import BeamlinkError, ConfigError
from .config import load_scenario
from .runner import all_rows_failed, emit_csv, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_MODEL = 3

PRESETS = {
    "indoor_owc_table1.json": {
        "scenario_kind": "indoor_siso_owc",
        "params": {"bandwidth_hz": 1e9},
        "sweep": [
            {"parameter_path": "tx_power_dbm",
             "values": [-15, -13, -11, -9, -7, -5, -3, -1, 0]},
            {"parameter_path": "tx_tilt_deg", "values": [0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15]},
        ],
        "metrics": ["snr", "cf", "channel_gain_db"],
        "monte_carlo": {"seed": 1, "samples": 1},
        "output_path": "indoor_owc_table1.csv",
    },
    "indoor_thz_table1.json": {
        "scenario_kind": "indoor_siso_thz",
        "params": {"bandwidth_hz": 1e9, "device": {"hpbw_deg": 8.0}},
        "sweep": [
            {"parameter_path": "tx_power_dbm",
             "values": [-15, -13, -11, -9, -7, -5, -3, -1, 1, 3, 5, 7, 10]},
            {"parameter_path": "tx_tilt_deg", "values": [0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15]},
        ],
        "metrics": ["sinr", "cf", "channel_gain_db"],
        "monte_carlo": {"seed": 1, "samples": 1},
        "output_path": "indoor_thz_table1.csv",
    },
    "indoor_network_cp.json": {
        "scenario_kind": "indoor_network",
        "params": {"technology": "thz", "hpbw_deg": 6.0, "gamma_th_db": 5.0,
                   "bandwidth_hz": 500e6},
        "sweep": [{"parameter_path": "nt_grid", "values": [1, 2, 3, 4, 6, 8, 10, 12, 15]}],
        "metrics": ["cp"],
        "monte_carlo": {"seed": 7, "samples": 200},
        "output_path": "indoor_network_cp.csv",
    },
    "outdoor_fso_weather.json": {
        "scenario_kind": "outdoor_fso",
        "params": {},
        "sweep": [
            {"parameter_path": "weather",
             "values": ["clear", "light_fog", "moderate_rain", "heavy_rain"]},
            {"parameter_path": "tx_power_dbm",
             "values": [-5, 0, 5, 10, 15, 20, 25, 30]},
        ],
        "metrics": ["outage"],
        "monte_carlo": {"seed": 11, "samples": 100000},
        "output_path": "outdoor_fso_weather.csv",
    },
    "outdoor_thz_humidity.json": {
        "scenario_kind": "outdoor_thz",
        "params": {"pointing_model": "angular"},
        "sweep": [
            {"parameter_path": "relative_humidity", "values": [0.1, 0.5, 0.9]},
            {"parameter_path": "tx_power_dbm", "values": [-5, 0, 5, 10, 15, 20]},
        ],
        "metrics": ["outage"],
        "monte_carlo": {"seed": 13, "samples": 100000},
        "output_path": "outdoor_thz_humidity.csv",
    },
    "uav_links.json": {
        "scenario_kind": "uav",
        "params": {"technology": "fso", "link_length_m": 200.0},
        "sweep": [
            {"parameter_path": "link_type", "values": ["g2u", "u2g", "u2u"]},
            {"parameter_path": "avg_snr_db", "values": [5, 10, 15, 20, 25, 30]},
        ],
        "metrics": ["outage"],
        "monte_carlo": {"seed": 17, "samples": 100000},
        "output_path": "uav_links.csv",
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamlink",
        description="Link-budget sweeps for terahertz and optical wireless channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a scenario config")
    p_validate.add_argument("config", help="path to the JSON scenario file")

    p_run = sub.add_parser("run", help="run a sweep and write the result CSV")
    p_run.add_argument("config", help="path to the JSON scenario file")
    p_run.add_argument("--output", help="override the configured output path")

    p_presets = sub.add_parser("presets", help="write example scenario configs")
    p_presets.add_argument("--output-dir", default=".", help="directory for preset files")
    return parser


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None
    try:
        return load_scenario(text)
    except ConfigError as exc:
        print(f"invalid configuration ({len(exc.errors)} problem(s)):", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
        return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        cfg = _load(args.config)
        if cfg is None:
            return EXIT_VALIDATION
        print(f"{args.config}: valid ({cfg.scenario_kind})")
        return EXIT_OK

    if args.command == "run":
        cfg = _load(args.config)
        if cfg is None:
            return EXIT_VALIDATION
        table = run_sweep(cfg)
        output = args.output or cfg.output_path
        if output:
            try:
                emit_csv(table, output)
            except BeamlinkError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_MODEL
            print(f"wrote {len(table.rows)} rows to {output}")
        else:
            sys.stdout.write(table.to_csv())
        if all_rows_failed(table):
            print("error: every sweep point failed; see the error column", file=sys.stderr)
            return EXIT_MODEL
        return EXIT_OK

    if args.command == "presets":
        out_dir = Path(args.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, preset in PRESETS.items():
            path = out_dir / name
            path.write_text(json.dumps(preset, indent=2) + "\n")
            print(f"wrote {path}")
        return EXIT_OK

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
