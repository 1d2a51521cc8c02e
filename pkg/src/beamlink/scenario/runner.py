"""Deterministic sweep execution and CSV emission.

Every sweep point is computed independently with an RngStream keyed by its
row index, so the result table is a pure function of (config, seed) no matter
how many workers run the sweep or in which order rows complete.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..errors import BeamlinkError
from .config import MC_METRICS, ScenarioConfig, sweep_rows
from .models import evaluate_point

WORKERS_ENV = "BEAMLINK_WORKERS"


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        if any(c in value for c in ',"\n'):
            return '"' + value.replace('"', '""') + '"'
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def metric_columns(cfg: ScenarioConfig) -> list[str]:
    cols = []
    for m in cfg.metrics:
        cols.append(m)
        if m in MC_METRICS:
            cols.append(f"{m}_stderr")
    return cols


def table_columns(cfg: ScenarioConfig) -> list[str]:
    return cfg.sweep_paths() + metric_columns(cfg) + ["error"]


def _evaluate_row(args):
    index, kind, params, metrics, seed, samples = args
    try:
        values = evaluate_point(kind, params, metrics, seed, samples, stream_id=index)
        return index, values, None
    except BeamlinkError as exc:
        return index, {}, f"{type(exc).__name__}: {exc}"


def worker_count(cfg: ScenarioConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return cfg.workers


def run_sweep(cfg: ScenarioConfig) -> ResultTable:
    """Evaluate every sweep point; per-point failures land in the error column."""
    tasks = [
        (i, cfg.scenario_kind, params, cfg.metrics, cfg.seed, cfg.samples)
        for i, (_, params) in enumerate(sweep_rows(cfg))
    ]
    sweep_values = [row for row, _ in sweep_rows(cfg)]

    workers = worker_count(cfg)
    results: dict[int, tuple[dict, str | None]] = {}
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, values, error in pool.map(_evaluate_row, tasks, chunksize=1):
                results[index] = (values, error)
    else:
        for task in tasks:
            index, values, error = _evaluate_row(task)
            results[index] = (values, error)

    metric_cols = metric_columns(cfg)
    rows = []
    for i, sweep_vals in enumerate(sweep_values):
        values, error = results[i]
        row = list(sweep_vals)
        for col in metric_cols:
            row.append(values.get(col))
        row.append(error or "")
        rows.append(row)
    return ResultTable(columns=table_columns(cfg), rows=rows)


def all_rows_failed(table: ResultTable) -> bool:
    if not table.rows:
        return False
    error_idx = table.columns.index("error")
    return all(row[error_idx] for row in table.rows)


def emit_csv(table: ResultTable, path: str) -> None:
    """Write the table as RFC-4180-style CSV with 17-significant-digit floats."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(table.to_csv())
    except OSError as exc:
        raise BeamlinkError(f"cannot write result CSV to {path}: {exc}") from exc
