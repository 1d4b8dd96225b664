"""Upper bounds for scalar differential inequalities

    x' <= b(t) x^p + a(t) x + f(t),   x >= 0,

with piecewise-constant coefficients on a grid. ``a`` and ``b`` are stored as
per-interval rates, ``f`` as per-interval integrals (its density is constant
on each interval). All integrals of the transformed coefficients are
evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

#: values above this count as blown up in :func:`ode_oracle`
BLOWUP_CAP = 1e12
ORACLE_RTOL = 1e-10
ORACLE_ATOL = 1e-13


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, equal to 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


@dataclass(frozen=True, eq=False)
class OdeCoefficients:
    """Piecewise-constant coefficients on ``grid`` (``len(grid) == n + 1``)."""

    grid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    f: np.ndarray
    p: float = 5.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        n = grid.size - 1
        if n < 1:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        for name in ("a", "b", "f"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (n,)).copy()
            object.__setattr__(self, name, arr)
        if np.any(self.b < 0) or np.any(self.f < 0):
            raise ValueError("b and f must be nonnegative")
        if not self.p > 1:
            raise ValueError("p must be > 1")

    @classmethod
    def uniform(cls, n: int, h: float, a=0.0, b=0.0, f_rate=0.0, p: float = 5.0) -> "OdeCoefficients":
        """``n`` intervals of width ``h``; ``f_rate`` is the forcing density."""
        return cls(np.arange(n + 1) * h, a, b, np.asarray(f_rate, dtype=float) * h, p)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid)

    def until(self, t: float) -> "OdeCoefficients":
        """Coefficients restricted to ``[grid[0], t]`` (last interval may be partial)."""
        t0, t1 = self.grid[0], self.grid[-1]
        if not (t0 < t <= t1 * (1 + 1e-14) + 1e-300):
            raise ValueError(f"t = {t} outside the coefficient grid [{t0}, {t1}]")
        t = min(t, t1)
        j = int(np.searchsorted(self.grid, t, side="left"))
        grid = np.append(self.grid[:j], t)
        frac = (t - self.grid[j - 1]) / (self.grid[j] - self.grid[j - 1])
        f = self.f[:j].copy()
        f[-1] *= frac
        return OdeCoefficients(grid, self.a[:j], self.b[:j], f, self.p)


@dataclass(frozen=True, eq=False)
class BoundSeries:
    """Bound values at ``times``; ``valid[i]`` is ``times[i] < valid_until``."""

    times: np.ndarray
    values: np.ndarray
    valid_until: float = math.inf
    method: str = ""

    @property
    def valid(self) -> np.ndarray:
        return self.times < self.valid_until

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def at(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t - 1e-12 * max(1.0, abs(t))))
        return float(self.values[min(i, len(self.values) - 1)])


def _integrated_parts(a, b, f, widths, p):
    """Cumulative A, ∫e^{-A} f and ∫b e^{(p-1)A} at interval ends, starting from A = 0."""
    ad = a * widths
    A = np.cumsum(ad)
    A_prev = np.concatenate(([0.0], A[:-1]))
    with np.errstate(over="ignore", invalid="ignore"):
        F = np.cumsum(f * np.exp(-A_prev) * _phi1(-ad))
        B = np.cumsum(b * widths * np.exp((p - 1) * A_prev) * _phi1((p - 1) * ad))
    return A, F, B


def _assemble(A, y, B, p):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        brace = 1.0 - (p - 1) * y ** (p - 1) * B
        vals = np.exp(A) * y * brace ** (-1.0 / (p - 1))
    vals = np.where(brace > 0, vals, np.inf)
    vals[np.isnan(vals)] = np.inf
    # brace is non-increasing in t, but guard against rounding re-entry
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        vals[bad[0]:] = np.inf
    return vals


def gronwall_nodes(x0: float, coeffs: OdeCoefficients) -> np.ndarray:
    """Gronwall bound (``b`` ignored) at every grid point."""
    A, F, _ = _integrated_parts(coeffs.a, coeffs.b, coeffs.f, coeffs.widths, coeffs.p)
    with np.errstate(over="ignore"):
        vals = np.exp(A) * (x0 + F)
    return np.concatenate(([float(x0)], vals))


def gronwall(x0: float, coeffs: OdeCoefficients, t: float) -> float:
    """e^{A(t)} x0 + ∫_0^t e^{A(t)-A(s)} f(s) ds with A = ∫a."""
    if t == coeffs.grid[0]:
        return float(x0)
    return float(gronwall_nodes(x0, coeffs.until(t))[-1])


def cp_type1(x0: float, c_int: float, e_int: float, p: float) -> float:
    """Bound for x' <= c x^p + e from the integrals of c and e; inf on blowup."""
    y = x0 + e_int
    brace = 1.0 - (p - 1) * y ** (p - 1) * c_int
    if brace <= 0:
        return math.inf
    return y * brace ** (-1.0 / (p - 1))


def cp_type2_nodes(x0: float, coeffs: OdeCoefficients) -> np.ndarray:
    """CP-Type II bound at every grid point (inf from the first blowup on)."""
    A, F, B = _integrated_parts(coeffs.a, coeffs.b, coeffs.f, coeffs.widths, coeffs.p)
    vals = _assemble(A, x0 + F, B, coeffs.p)
    return np.concatenate(([float(x0)], vals))


def cp_type2(x0: float, coeffs: OdeCoefficients, t: float) -> float:
    """Bound for x' <= b x^p + a x + f at time ``t``; inf on blowup."""
    if t == coeffs.grid[0]:
        return float(x0)
    return float(cp_type2_nodes(x0, coeffs.until(t))[-1])


def restarted_cp_type2_nodes(z0: float, a, b, f, h: float, p: float, stride: int) -> np.ndarray:
    """CP-Type II restarted every ``stride`` intervals of uniform width ``h``.

    Inside a cell the bound is evaluated at every interval end from the
    cell's starting value; the value at the cell's end seeds the next cell.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = len(a)
    vals = np.empty(n + 1)
    vals[0] = z0
    if stride == 1:
        return _restart_every_step(z0, a, b, f, h, p, vals)
    widths = np.full(n, float(h))
    z = float(z0)
    for start in range(0, n, stride):
        stop = min(start + stride, n)
        if not math.isfinite(z):
            vals[start + 1:] = np.inf
            break
        A, F, B = _integrated_parts(a[start:stop], b[start:stop], f[start:stop],
                                    widths[start:stop], p)
        cell = _assemble(A, z + F, B, p)
        vals[start + 1:stop + 1] = cell
        z = float(cell[-1])
    return vals


def _restart_every_step(z0, a, b, f, h, p, vals):
    # single-interval cells: the same closed form with A_prev = 0
    ad = a * h
    with np.errstate(over="ignore"):
        E = np.exp(ad).tolist()
        F = (f * _phi1(-ad)).tolist()
        B = (b * h * _phi1((p - 1) * ad)).tolist()
    q = p - 1
    e = -1.0 / q
    z = float(z0)
    out = vals
    for i in range(len(E)):
        y = z + F[i]
        brace = 1.0 - q * y**q * B[i]
        if not brace > 0:
            out[i + 1:] = np.inf
            break
        z = E[i] * y * brace**e
        if not math.isfinite(z):
            out[i + 1:] = np.inf
            break
        out[i + 1] = z
    return out


def _same(u: float, v: float) -> bool:
    # merge runs of equal coefficients; uniform grids carry rounding noise in f/width
    return abs(u - v) <= 1e-13 * max(abs(u), abs(v))


def ode_oracle(x0: float, coeffs: OdeCoefficients, t_end: float | None = None) -> BoundSeries:
    """Reference solution of x' = b x^p + a x + f at the grid points.

    Adaptive DOP853 at tolerance 1e-10, restarted at every change of the
    coefficients. Values past ``BLOWUP_CAP`` (or a failed step) are blowup.
    Test oracle only.
    """
    grid = coeffs.grid
    if t_end is None:
        t_end = grid[-1]
    n_int = int(np.searchsorted(grid, t_end * (1 - 1e-14), side="left"))
    n_int = max(1, min(n_int, len(grid) - 1))
    times = grid[:n_int + 1]
    values = np.full(n_int + 1, np.inf)
    values[0] = x0
    density = coeffs.f / coeffs.widths
    p = coeffs.p

    def cap(t, x, *args):
        return x[0] - BLOWUP_CAP

    cap.terminal = True

    x = float(x0)
    i = 0
    blowup = math.inf
    while i < n_int:
        j = i + 1
        while j < n_int and all(_same(c[j], c[i]) for c in (coeffs.a, coeffs.b, density)):
            j += 1
        ai, bi, fi = coeffs.a[i], coeffs.b[i], density[i]

        def rhs(t, y, ai=ai, bi=bi, fi=fi):
            v = min(max(y[0], 0.0), 10 * BLOWUP_CAP)
            return [bi * v**p + ai * y[0] + fi]

        sol = solve_ivp(rhs, (times[i], times[j]), [x], method="DOP853", rtol=ORACLE_RTOL,
                        atol=ORACLE_ATOL, t_eval=times[i + 1:j + 1], events=cap)
        y = np.asarray(sol.y, dtype=float)
        got = y[0] if y.size else np.empty(0)
        values[i + 1:i + 1 + got.size] = got
        if sol.status != 0 or got.size < j - i:
            if sol.t_events and sol.t_events[0].size:
                blowup = float(sol.t_events[0][0])
            else:
                ts = np.asarray(sol.t, dtype=float)
                blowup = float(ts[-1]) if ts.size else float(times[i])
            values[i + 1 + got.size:] = np.inf
            break
        x = float(got[-1])
        i = j
    return BoundSeries(times, values, blowup, "oracle")
