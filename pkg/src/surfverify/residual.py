"""Residual integrals of the piecewise-linear-in-time interpolant of a trajectory.

On [t_n, t_n + h] the interpolant is φ(s) = (1-s) φ_n + s φ_{n+1}, s ∈ [0, 1], and

    RES(s) = (φ_{n+1} - φ_n)/h + ∂ₓ⁴ φ(s) + (φ(s)_x²)_xx

lives on 2N modes. Each mode of RES is quadratic in s, so |RES_k(s)|²/k² is a
quartic and the 3-node Gauss-Legendre rule integrates ‖RES‖²_{H⁻¹} exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .spectral import ZeroMeanField, _derivative, _linf, _nonlinear, _sq_norm, wavenumbers

# Gauss-Legendre nodes/weights mapped to [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(3)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W

CSV_HEADER = ("t_start", "t_end", "res_hm1_sq_int", "phixx_linf_sq_int",
              "phixx_linf_left", "phixx_linf_right")


def _residual_coeffs(c0: np.ndarray, c1: np.ndarray, h: float, s: float) -> np.ndarray:
    band = c0.shape[-1]
    phi_s = (1.0 - s) * c0 + s * c1
    out = -_nonlinear(phi_s)
    k4 = wavenumbers(band) ** 4
    out[..., :band] += (c1 - c0) / h + k4 * phi_s
    return out


def residual_at(phi_n: ZeroMeanField, phi_np1: ZeroMeanField, h: float, s: float) -> ZeroMeanField:
    """RES of the linear interpolant at fractional time ``s`` of the interval."""
    band = max(phi_n.band, phi_np1.band)
    c0 = phi_n.resized(band).coeffs
    c1 = phi_np1.resized(band).coeffs
    return ZeroMeanField(_residual_coeffs(c0, c1, h, s))


@dataclass(frozen=True)
class IntervalData:
    t_start: float
    t_end: float
    res_hm1_sq_integral: float
    phixx_linf_sq_integral: float
    phixx_linf_endpoints: tuple[float, float]


def _block_columns(rows: np.ndarray, h: float, linf_mode: str):
    """Interval quantities for consecutive snapshot rows (shape (m+1, N))."""
    c0, c1 = rows[:-1], rows[1:]
    res = np.zeros(c0.shape[0])
    for s, w in zip(GL_NODES, GL_WEIGHTS):
        res += w * _sq_norm(_residual_coeffs(c0, c1, h, s), -1)
    res *= h
    linf = _linf(_derivative(rows, 2), linf_mode)
    left, right = linf[:-1], linf[1:]
    phixx = h * np.maximum(left, right) ** 2
    return res, phixx, left, right


def interval_data(phi_n: ZeroMeanField, phi_np1: ZeroMeanField, t_start: float, h: float,
                  linf_mode: str = "grid") -> IntervalData:
    band = max(phi_n.band, phi_np1.band)
    rows = np.stack([phi_n.resized(band).coeffs, phi_np1.resized(band).coeffs])
    res, phixx, left, right = _block_columns(rows, h, linf_mode)
    return IntervalData(t_start, t_start + h, float(res[0]), float(phixx[0]),
                        (float(left[0]), float(right[0])))


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Per-interval residual and ‖φ_xx‖_∞ data on a uniform grid of width ``h``.

    Interval ``i`` is ``[i*h, (i+1)*h]``. ``phi_h1`` holds ‖φ‖_{H¹} at the
    ``n+1`` interval boundaries (NaN when unknown, e.g. artificial series).
    """

    h: float
    res_hm1_sq_int: np.ndarray
    phixx_linf_sq_int: np.ndarray
    phixx_linf_left: np.ndarray
    phixx_linf_right: np.ndarray
    phi_h1: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.res_hm1_sq_int)
        for name in ("res_hm1_sq_int", "phixx_linf_sq_int", "phixx_linf_left", "phixx_linf_right"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
            if np.any(arr < 0):
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, arr)
        if self.phi_h1 is None:
            object.__setattr__(self, "phi_h1", np.full(n + 1, np.nan))
        else:
            object.__setattr__(self, "phi_h1", np.asarray(self.phi_h1, dtype=float))
            if self.phi_h1.shape != (n + 1,):
                raise ValueError(f"phi_h1 must have shape ({n + 1},)")

    @classmethod
    def constant(cls, n: int, h: float, res_rate: float, phixx_linf: float) -> "CoefficientSeries":
        """Artificial series with constant ‖RES‖²_{H⁻¹} = ``res_rate`` and
        constant ‖φ_xx‖_∞ = ``phixx_linf``."""
        ones = np.ones(n)
        return cls(h, res_rate * h * ones, phixx_linf**2 * h * ones,
                   phixx_linf * ones, phixx_linf * ones)

    def __len__(self) -> int:
        return len(self.res_hm1_sq_int)

    @property
    def t_start(self) -> np.ndarray:
        return np.arange(len(self)) * self.h

    @property
    def t_end(self) -> np.ndarray:
        return np.arange(1, len(self) + 1) * self.h

    @property
    def times(self) -> np.ndarray:
        """Interval boundaries ``t_0 = 0, ..., t_n``."""
        return np.arange(len(self) + 1) * self.h

    @property
    def intervals(self) -> list[IntervalData]:
        return [
            IntervalData(float(a), float(b), float(r), float(p), (float(lo), float(hi)))
            for a, b, r, p, lo, hi in zip(self.t_start, self.t_end, self.res_hm1_sq_int,
                                          self.phixx_linf_sq_int, self.phixx_linf_left,
                                          self.phixx_linf_right)
        ]

    def truncated(self, n: int) -> "CoefficientSeries":
        return CoefficientSeries(self.h, self.res_hm1_sq_int[:n], self.phixx_linf_sq_int[:n],
                                 self.phixx_linf_left[:n], self.phixx_linf_right[:n],
                                 self.phi_h1[:n + 1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in zip(self.t_start, self.t_end, self.res_hm1_sq_int, self.phixx_linf_sq_int,
                           self.phixx_linf_left, self.phixx_linf_right):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, phi_h1=None) -> "CoefficientSeries":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[0] == 0:
            raise ValueError(f"{path}: no intervals")
        h = float(data[0, 1] - data[0, 0])
        return cls(h, data[:, 2], data[:, 3], data[:, 4], data[:, 5], phi_h1)


def series_from_blocks(blocks: Iterable[tuple[int, np.ndarray]], h: float,
                       linf_mode: str = "grid") -> CoefficientSeries:
    """Fold interval data over a streamed trajectory (see ``evolve.iter_blocks``)."""
    cols: list[list[np.ndarray]] = [[], [], [], [], []]
    first = True
    for _, rows in blocks:
        for col, arr in zip(cols, _block_columns(rows, h, linf_mode)):
            col.append(arr)
        h1 = np.sqrt(_sq_norm(rows, 1))
        cols[4].append(h1 if first else h1[1:])
        first = False
    if first:
        raise ValueError("trajectory needs at least two snapshots")
    res, phixx, left, right, h1 = (np.concatenate(c) for c in cols)
    return CoefficientSeries(h, res, phixx, left, right, h1)


def build_series(traj, linf_mode: str = "grid", block: int = 2048) -> CoefficientSeries:
    """Interval data for every step of a stride-1 :class:`Trajectory`."""
    if len(traj) < 2:
        raise ValueError("trajectory needs at least two snapshots")
    if getattr(traj, "stride", 1) != 1:
        raise ValueError("residuals need every solver step (trajectory stride must be 1)")
    coeffs = traj.coeffs
    n = coeffs.shape[0] - 1
    blocks = ((i, coeffs[i:min(i + block, n) + 1]) for i in range(0, n, block))
    return series_from_blocks(blocks, traj.config.dt, linf_mode)
