"""Error bounds for ‖d‖²_{H¹} = ‖u - φ‖²_{H¹} and the global-regularity verdict.

The three methods consume a :class:`~surfverify.residual.CoefficientSeries`:

* method 1: Gronwall with the superlinear term absorbed, valid while the
  bound stays below a threshold;
* method 2: CP-Type II on the whole horizon;
* method 3: CP-Type II restarted every ``stride`` solver intervals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import (BoundSeries, OdeCoefficients, gronwall_nodes,
                     restarted_cp_type2_nodes)
from .residual import CoefficientSeries

K = 7**7 / 4
EPS0 = 0.5
KSTAR_PAPER = (2 * 7**7) ** (-1 / 8)
KSTAR_STRICT = (8 * K) ** (-1 / 4)
P = 5.0


@dataclass(frozen=True)
class Constants:
    K: float = K
    eps0: float = EPS0
    kstar_paper: float = KSTAR_PAPER
    kstar_strict: float = KSTAR_STRICT
    p: float = P

    def kstar(self, mode: str) -> float:
        if mode == "paper":
            return self.kstar_paper
        if mode == "strict":
            return self.kstar_strict
        raise ValueError(f"unknown kstar mode {mode!r} (expected 'paper' or 'strict')")


CONSTANTS = Constants()


def t_star(u0, mode: str = "theorem") -> float:
    """Horizon after which regularity is automatic.

    ``theorem``: 4‖u0‖²_{L²}. ``table``: 4‖u0‖_{L²}, the convention used by
    the reference results table (sin x gives 7.1).
    """
    norm = u0.l2_norm()
    if mode == "theorem":
        return norm**2 / EPS0**2
    if mode in ("table", "table_compat"):
        return norm / EPS0**2
    raise ValueError(f"unknown t_star mode {mode!r} (expected 'theorem' or 'table')")


def _rates(series: CoefficientSeries) -> np.ndarray:
    """Per-interval upper bound for ‖φ_xx‖²_∞ (endpoint max squared)."""
    return series.phixx_linf_sq_int / series.h


def method1(d0_sq: float, series: CoefficientSeries, threshold: float = KSTAR_PAPER) -> BoundSeries:
    """Gronwall bound with A(t) = -t/4 + 18∫‖φ_xx‖²_∞ and forcing 2‖RES‖²_{H⁻¹}.

    ``valid_until`` is the first node where the bound reaches ``threshold``;
    later values are reported but carry no guarantee.
    """
    coeffs = OdeCoefficients(series.times, -0.25 + 18.0 * _rates(series), 0.0,
                             2.0 * series.res_hm1_sq_int, P)
    values = gronwall_nodes(d0_sq, coeffs)
    hit = np.flatnonzero(~(values < threshold))
    valid_until = float(series.times[hit[0]]) if hit.size else math.inf
    return BoundSeries(series.times, values, valid_until, "m1")


def ode_coefficients(series: CoefficientSeries) -> OdeCoefficients:
    """Coefficients of ξ' <= Kξ⁵ + (9‖φ_xx‖²_∞ - 1/4)ξ + ‖RES‖²_{H⁻¹}."""
    return OdeCoefficients(series.times, 9.0 * _rates(series) - 0.25, K,
                           series.res_hm1_sq_int, P)


def _blowup_time(times: np.ndarray, values: np.ndarray) -> float:
    bad = np.flatnonzero(~np.isfinite(values))
    return float(times[bad[0]]) if bad.size else math.inf


def method3(d0_sq: float, series: CoefficientSeries, stride: int = 1) -> BoundSeries:
    """CP-Type II restarted every ``stride`` intervals, A(t) reset per cell."""
    c = ode_coefficients(series)
    values = restarted_cp_type2_nodes(d0_sq, c.a, c.b, c.f, series.h, P, stride)
    return BoundSeries(series.times, values, _blowup_time(series.times, values), "m3")


def method2(d0_sq: float, series: CoefficientSeries) -> BoundSeries:
    """CP-Type II over the whole horizon (a single restart cell)."""
    out = method3(d0_sq, series, stride=max(len(series), 1))
    return BoundSeries(out.times, out.values, out.valid_until, "m2")


def check_smallness(traj, bound: BoundSeries, eps0: float = EPS0) -> float | None:
    """Earliest node with ‖φ‖_{H¹} + sqrt(bound) < eps0 before ``valid_until``.

    ``traj`` is anything exposing ``phi_h1`` at the bound's nodes (a stride-1
    :class:`Trajectory` or a :class:`CoefficientSeries`).
    """
    phi_h1 = np.asarray(traj.phi_h1, dtype=float)
    n = min(len(phi_h1), len(bound.values))
    with np.errstate(invalid="ignore"):
        total = phi_h1[:n] + np.sqrt(bound.values[:n])
    ok = (total < eps0) & bound.valid[:n]
    hit = np.flatnonzero(ok)
    return float(bound.times[hit[0]]) if hit.size else None


@dataclass(frozen=True)
class Verdict:
    method: str
    smallness_time: float | None
    time_criterion_met: bool
    valid_until: float
    t_star: float
    globally_regular: bool

    def record(self) -> dict:
        out = asdict(self)
        out["time_criterion"] = out.pop("time_criterion_met")
        if math.isinf(out["valid_until"]):
            out["valid_until"] = None
        return out


def verdict(traj, u0, bound: BoundSeries, t_star_value: float | None = None,
            eps0: float = EPS0) -> Verdict:
    """Regularity is shown by smallness before ``valid_until`` or by a bound
    that stays valid up to ``t_star`` (theorem value of ``u0`` by default)."""
    if t_star_value is None:
        t_star_value = t_star(u0, "theorem")
    small = check_smallness(traj, bound, eps0)
    if math.isinf(bound.valid_until):
        time_ok = bound.horizon >= t_star_value
    else:
        time_ok = bound.valid_until >= t_star_value
    return Verdict(bound.method, small, bool(time_ok), bound.valid_until, t_star_value,
                   bool(small is not None or time_ok))

