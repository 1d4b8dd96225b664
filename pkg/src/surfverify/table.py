"""Batch runner with the layout of the reference results table (smallness / time columns)."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import METHODS, ConfigError, ExperimentConfig
from .runner import LongRunError, is_long, run_experiment

COLUMNS = ("row", "u0", "T*", "N", "h",
           "M1_small", "M2_small", "M3_small", "M1_time", "M2_time", "M3_time", "status")


def _cell_small(v) -> str:
    if v is None:
        return "--"
    return f"{v.smallness_time:.2f}" if v.smallness_time is not None else "--"


def _cell_time(v) -> str:
    if v is None:
        return "--"
    if v.time_criterion_met:
        return "ok"
    if math.isinf(v.valid_until):
        return "n/a"  # no failure, but the horizon stops short of T*
    return f"{v.valid_until:.2f}"


def _run_row(args) -> dict:
    name, cfg, allow_long = args
    row = {"row": name, "u0": "", "T*": "", "N": "", "h": "", "status": "ok"}
    for c in COLUMNS[5:11]:
        row[c] = ""
    if isinstance(cfg, ConfigError):
        row["status"] = f"error: {cfg}"
        return row
    row.update({"u0": str(cfg.initial_data), "T*": f"{cfg.t_star:.1f}", "N": str(cfg.n_modes),
                "h": f"{cfg.dt:g}"})
    try:
        report = run_experiment(cfg, allow_long=allow_long)
    except LongRunError:
        row["status"] = "skipped (needs --long)"
        return row
    except Exception as exc:  # recorded in-row; other rows continue
        row["status"] = f"error: {exc}"
        return row
    for i, m in enumerate(METHODS, start=1):
        v = report.verdicts.get(m)
        row[f"M{i}_small"] = _cell_small(v) if v is not None else ""
        row[f"M{i}_time"] = _cell_time(v) if v is not None else ""
    return row


def run_table(rows, out_dir, allow_long: bool = False, jobs: int | None = None,
              overrides: dict | None = None) -> list[dict]:
    """Run ``(name, config)`` rows; each row writes into ``out_dir/<name>``."""
    out_dir = Path(out_dir)
    tasks = []
    for name, cfg in rows:
        if isinstance(cfg, ExperimentConfig):
            try:
                cfg = cfg.with_overrides(**(overrides or {}))
                cfg = replace(cfg, output_dir=str(out_dir / name))
            except ConfigError as exc:
                cfg = exc
        tasks.append((name, cfg, allow_long))
    if not tasks:
        return []
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        return [_run_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_run_row, tasks))


def write_table_csv(path, results: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        w.writerows(results)


def render(results: list[dict]) -> str:
    """Plain-text table; ``ok`` in the time columns is shown as a check mark."""
    header = ["u(x,0)", "T*", "N", "h", "M1", "M2", "M3", "M1", "M2", "M3", ""]
    body = []
    for r in results:
        cells = [r["u0"] or r["row"], r["T*"], r["N"], r["h"],
                 r["M1_small"], r["M2_small"], r["M3_small"],
                 *("✓" if r[c] == "ok" else r[c] for c in ("M1_time", "M2_time", "M3_time")),
                 "" if r["status"] == "ok" else r["status"]]
        body.append(cells)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    buf = io.StringIO()
    top = " " * (sum(widths[:4]) + 3 * 3) + " | " + "Smallness".center(
        sum(widths[4:7]) + 6) + " | " + "Time".center(sum(widths[7:10]) + 6)
    buf.write(top.rstrip() + "\n")

    def line(cells):
        parts = [str(c).ljust(w) for c, w in zip(cells, widths)]
        return (" | ".join([" | ".join(parts[:4]), " | ".join(parts[4:7]),
                            " | ".join(parts[7:10])]) + "  " + parts[10]).rstrip()

    buf.write(line(header) + "\n")
    buf.write("-" * len(line(header)) + "\n")
    for cells in body:
        buf.write(line(cells) + "\n")
    return buf.getvalue()
