"""Cartesian parameter sweeps over run configurations."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .conditions import evaluate_all
from .config import SweepConfig, build_config
from .dynamics import simulate
from .fields import initial_elsasser
from .norms import CSV_COLUMNS

__all__ = ["run_sweep", "sweep_columns", "write_sweep_table"]

log = logging.getLogger(__name__)

VARIANTS = ("2.1", "2.2", "2.7", "2.8")


def sweep_columns(sc: SweepConfig) -> list[str]:
    cols = ["point"] + [name for name, _ in sc.axes]
    cols += ["kappa", "lambda", "lambda_kappa_ratio", "epsilon0", "c0"]
    cols += [f"lhs_{v}" for v in VARIANTS] + [f"holds_{v}" for v in VARIANTS]
    if sc.mode == "simulate":
        cols += ["status", "steps"] + [f"final_{c}" for c in CSV_COLUMNS]
    cols.append("error")
    return cols


def _run_point(args) -> dict:
    index, base, overrides, mode = args
    row = {"point": index, **overrides, "error": ""}
    try:
        cfg = build_config({**base, **overrides})
        params = cfg.params
        initial = initial_elsasser(cfg.initial, cfg.grid, params)
        reports = evaluate_all(params, initial, cfg.conditions)
        row.update(
            kappa=params.kappa,
            **{"lambda": params.lam},
            lambda_kappa_ratio=params.lambda_kappa_ratio,
            epsilon0=cfg.conditions.epsilon0,
            c0=cfg.conditions.c0,
        )
        for v, rep in zip(VARIANTS, reports):
            row[f"lhs_{v}"] = rep.lhs
            row[f"holds_{v}"] = rep.holds
        if mode == "simulate":
            result = simulate(initial, params, cfg.integrator, cfg.conditions, cfg.digest)
            row["status"] = result.status
            row["steps"] = result.steps_taken
            last = result.series.last
            if last is not None:
                for c, v in zip(CSV_COLUMNS, last.csv_values()):
                    row[f"final_{c}"] = v
    except Exception as exc:  # recorded in-row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(sc: SweepConfig) -> list[dict]:
    """One row per grid point in a fixed order; identical output for identical input."""
    jobs = [(i, sc.base, point, sc.mode) for i, point in enumerate(sc.points())]
    if sc.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=sc.workers) as pool:
            rows = list(pool.map(_run_point, jobs))
    else:
        rows = [_run_point(job) for job in jobs]
    failed = sum(1 for r in rows if r["error"])
    if failed:
        log.warning("%d of %d sweep points failed", failed, len(rows))
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_sweep_table(rows: list[dict], columns: list[str], path_or_file) -> None:
    """Comma-separated table with a header line."""
    if isinstance(path_or_file, (str, Path)):
        with open(path_or_file, "w", newline="") as fh:
            write_sweep_table(rows, columns, fh)
        return
    writer = csv.writer(path_or_file, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
