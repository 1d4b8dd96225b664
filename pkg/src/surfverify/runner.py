"""One experiment end to end: simulate, fold residuals, bound, decide."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import BoundSeries
from .config import ExperimentConfig
from .evolve import SolverConfig, iter_blocks, write_trajectory
from .residual import CoefficientSeries, series_from_blocks
from .verify import CONSTANTS, Verdict, method1, method2, method3, verdict

log = logging.getLogger(__name__)

BOUND_HEADER = "t,bound_sq,phi_h1,valid"


class LongRunError(RuntimeError):
    pass


def is_long(cfg: ExperimentConfig) -> bool:
    """h <= 1e-6 with a horizon beyond 1 (about 10^6 steps or more)."""
    return cfg.dt <= 1e-6 * (1 + 1e-9) and cfg.horizon > 1.0


@dataclass
class Report:
    config: ExperimentConfig
    verdicts: dict[str, Verdict]
    files: dict[str, str]
    timings: dict[str, float] = field(default_factory=dict)
    residual_stats: dict[str, float] = field(default_factory=dict)

    def record(self) -> dict:
        return {
            "config": self.config.as_text(),
            "verdicts": {m: v.record() for m, v in self.verdicts.items()},
            "files": self.files,
            "timings": self.timings,
            "residual": self.residual_stats,
        }


def compute_bounds(cfg: ExperimentConfig, series: CoefficientSeries, d0_sq: float = 0.0) -> dict[str, BoundSeries]:
    out = {}
    for m in cfg.methods:
        if m == "m1":
            out[m] = method1(d0_sq, series, CONSTANTS.kstar(cfg.kstar_mode))
        elif m == "m2":
            out[m] = method2(d0_sq, series)
        else:
            out[m] = method3(d0_sq, series, cfg.restart_stride)
    return out


def residual_stats(series: CoefficientSeries) -> dict[str, float]:
    rate = series.res_hm1_sq_int / series.h
    return {
        "res_hm1_total": float(np.sqrt(series.res_hm1_sq_int.sum())),
        "res_hm1_max": float(np.sqrt(rate.max())),
        "res_hm1_mean": float(np.sqrt(rate).mean()),
        "phixx_linf_max": float(max(series.phixx_linf_left.max(), series.phixx_linf_right.max())),
        "phixx_linf_sq_total": float(series.phixx_linf_sq_int.sum()),
        "intervals": len(series),
    }


def write_bound_csv(path, bound: BoundSeries, phi_h1: np.ndarray) -> None:
    valid = bound.valid
    with open(path, "w") as fh:
        fh.write(BOUND_HEADER + "\n")
        for t, v, p, ok in zip(bound.times.tolist(), bound.values.tolist(), phi_h1.tolist(),
                               valid.tolist()):
            fh.write(f"{t!r},{v!r},{p!r},{int(ok)}\n")


def read_bound_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2], data[:, 3].astype(bool)


def simulate_series(cfg: ExperimentConfig, snapshot_path=None) -> CoefficientSeries:
    solver = SolverConfig(cfg.n_modes, cfg.dt, cfg.horizon)
    blocks = iter_blocks(solver, cfg.initial_data)
    if snapshot_path is None:
        return series_from_blocks(blocks, cfg.dt, cfg.linf_mode)
    kept: list[np.ndarray] = []

    def tee():
        for n0, rows in blocks:
            for j in range(0 if n0 == 0 else 1, rows.shape[0]):
                if (n0 + j) % cfg.snapshot_stride == 0:
                    kept.append(rows[j])
            yield n0, rows

    series = series_from_blocks(tee(), cfg.dt, cfg.linf_mode)
    write_trajectory(snapshot_path, np.array(kept), cfg.dt * cfg.snapshot_stride)
    return series


def run_experiment(cfg: ExperimentConfig, allow_long: bool = False) -> Report:
    if is_long(cfg) and not allow_long:
        raise LongRunError(f"h = {cfg.dt:g} up to t = {cfg.horizon:g} is a long run; pass --long")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    timings: dict[str, float] = {}

    (out / "config.txt").write_text(cfg.as_text())
    files["config"] = str(out / "config.txt")

    t0 = time.perf_counter()
    traj_path = out / "trajectory.bin" if cfg.snapshot_stride > 0 else None
    series = simulate_series(cfg, traj_path)
    if traj_path is not None:
        files["trajectory"] = str(traj_path)
    timings["simulate_and_residual"] = time.perf_counter() - t0
    log.info("%d intervals in %.1fs", len(series), timings["simulate_and_residual"])

    series.to_csv(out / "series.csv")
    files["series"] = str(out / "series.csv")

    t0 = time.perf_counter()
    bounds = compute_bounds(cfg, series)
    timings["bounds"] = time.perf_counter() - t0

    tstar = cfg.t_star
    verdicts = {}
    for m, bound in bounds.items():
        path = out / f"bound_{m}.csv"
        write_bound_csv(path, bound, series.phi_h1)
        files[f"bound_{m}"] = str(path)
        verdicts[m] = verdict(series, cfg.initial_data, bound, tstar, CONSTANTS.eps0)

    summary = [verdicts[m].record() for m in cfg.methods]
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files["summary"] = str(out / "summary.json")

    report = Report(cfg, verdicts, files, timings, residual_stats(series))
    (out / "report.json").write_text(json.dumps(report.record(), indent=2, sort_keys=True) + "\n")
    return report


def format_time(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isinf(value)):
        return "--"
    return f"{value:.2f}"
