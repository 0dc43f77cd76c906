"""Batch command-line front-end.

``risalign run <config.json>`` executes one experiment and writes
``<experiment>.csv`` (or ``.json``) plus ``manifest.json`` into the output
directory; ``risalign validate <config.json>`` reports every configuration
violation without computing anything.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure. Outputs
are written only after the experiment finishes, and partially written files
are removed on failure, so an output directory never holds a truncated
result.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import load_config, run_experiment, validate_config
from .errors import ConfigError

CSV_COLUMNS = (
    "experiment", "method", "n", "l", "snr_db", "measurements",
    "mnap", "ci95", "extra",
)


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest representation that round-trips
    return str(value)


def write_rows_csv(rows, path: Path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_value(row[column]) for column in CSV_COLUMNS])


def write_rows_json(rows, path: Path):
    with open(path, "w") as handle:
        json.dump(rows, handle, indent=1)
        handle.write("\n")


def _apply_overrides(data: dict, args) -> dict:
    resolved = dict(data)
    if args.seed is not None:
        resolved["seed"] = args.seed
    if args.trials is not None:
        resolved["trials"] = args.trials
    if args.out is not None:
        resolved["output_dir"] = args.out
    return resolved


def _run(args) -> int:
    try:
        data = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    resolved = _apply_overrides(data, args)
    problems = validate_config(resolved)
    if problems:
        for problem in problems:
            print(f"config invalid - {problem}", file=sys.stderr)
        return 1

    out_dir = Path(resolved.get("output_dir", "."))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 1

    started = time.perf_counter()
    experiment = resolved["experiment"]
    fmt = resolved.get("format", "csv")
    result_path = out_dir / f"{experiment}.{'csv' if fmt == 'csv' else 'json'}"
    manifest_path = out_dir / "manifest.json"
    written: list[Path] = []
    try:
        result = run_experiment(resolved)
        written.append(result_path)  # track before writing so partials get removed
        if fmt == "csv":
            write_rows_csv(result.rows, result_path)
        else:
            write_rows_json(result.rows, result_path)
        manifest = {
            "artifact": "risalign",
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "wall_time_seconds": time.perf_counter() - started,
            "seed": resolved["seed"],
            "config": resolved,
            "outputs": [result_path.name],
        }
        written.append(manifest_path)
        with open(manifest_path, "w") as handle:
            json.dump(manifest, handle, indent=1)
            handle.write("\n")
    except Exception as exc:  # noqa: BLE001 - report and clean up any failure
        for path in written:
            path.unlink(missing_ok=True)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result_path} and {manifest_path}")
    return 0


def _validate(args) -> int:
    try:
        data = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    problems = validate_config(data)
    if problems:
        for problem in problems:
            print(f"config invalid - {problem}")
        return 1
    print("config ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risalign",
        description="Run measurement-only RIS phase-alignment experiments "
        "from a JSON config file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run an experiment config")
    run_parser.add_argument("config", help="path to the JSON config file")
    run_parser.add_argument("--seed", type=int, help="override the config seed")
    run_parser.add_argument("--trials", type=int, help="override the trial count")
    run_parser.add_argument("--out", help="override the output directory")
    run_parser.set_defaults(func=_run)

    validate_parser = sub.add_parser(
        "validate", help="statically validate a config without running it"
    )
    validate_parser.add_argument("config", help="path to the JSON config file")
    validate_parser.set_defaults(func=_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
