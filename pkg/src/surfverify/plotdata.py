"""Plot-ready CSV panels from a finished run directory.

Panels (one file each, at most ``MAX_ROWS`` data rows):

    bound_<m>.csv      t,bound_sq,valid
    smallness_<m>.csv  t,phi_h1,lower,upper,eps0   (‖φ‖_{H¹} ± sqrt(bound))
    phixx_linf.csv     t,phixx_linf
    res_hm1.csv        t_mid,res_hm1               (RMS of ‖RES‖_{H⁻¹} per interval)
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .config import METHODS
from .residual import CoefficientSeries
from .runner import read_bound_csv
from .verify import EPS0

MAX_ROWS = 10_000


class MissingArtifact(FileNotFoundError):
    pass


def _thin(n: int, limit: int = MAX_ROWS) -> np.ndarray:
    step = max(1, math.ceil(n / limit))
    idx = np.arange(0, n, step)
    if idx[-1] != n - 1:
        if idx.size >= limit:
            idx[-1] = n - 1
        else:
            idx = np.append(idx, n - 1)
    return idx


def _write(path: Path, header: str, columns) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*(np.asarray(c).tolist() for c in columns)):
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def export_panels(run_dir, out_dir=None) -> dict[str, str]:
    run_dir = Path(run_dir)
    series_path = run_dir / "series.csv"
    if not series_path.exists():
        raise MissingArtifact(f"{series_path} not found; is {run_dir} a completed run?")
    bound_paths = {m: run_dir / f"bound_{m}.csv" for m in METHODS}
    bound_paths = {m: p for m, p in bound_paths.items() if p.exists()}
    if not bound_paths:
        raise MissingArtifact(f"no bound_m*.csv files in {run_dir}")
    out_dir = Path(out_dir) if out_dir is not None else run_dir / "plot"
    out_dir.mkdir(parents=True, exist_ok=True)
    series = CoefficientSeries.from_csv(series_path)
    written = {}

    phi_h1 = None
    for m, path in bound_paths.items():
        t, bound, phi_h1, valid = read_bound_csv(path)
        idx = _thin(len(t))
        target = out_dir / f"bound_{m}.csv"
        _write(target, "t,bound_sq,valid", (t[idx], bound[idx], valid[idx].astype(int)))
        written[f"bound_{m}"] = str(target)
        with np.errstate(invalid="ignore"):
            d = np.sqrt(bound[idx])
        target = out_dir / f"smallness_{m}.csv"
        _write(target, "t,phi_h1,lower,upper,eps0",
               (t[idx], phi_h1[idx], np.maximum(phi_h1[idx] - d, 0.0), phi_h1[idx] + d,
                np.full(idx.size, EPS0)))
        written[f"smallness_{m}"] = str(target)

    t_nodes = series.times
    linf = np.concatenate((series.phixx_linf_left, series.phixx_linf_right[-1:]))
    idx = _thin(len(t_nodes))
    target = out_dir / "phixx_linf.csv"
    _write(target, "t,phixx_linf", (t_nodes[idx], linf[idx]))
    written["phixx_linf"] = str(target)

    mid = 0.5 * (series.t_start + series.t_end)
    rms = np.sqrt(series.res_hm1_sq_int / series.h)
    idx = _thin(len(mid))
    target = out_dir / "res_hm1.csv"
    _write(target, "t_mid,res_hm1", (mid[idx], rms[idx]))
    written["res_hm1"] = str(target)
    return written
