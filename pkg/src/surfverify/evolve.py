"""Semi-implicit Euler / spectral Galerkin integrator for u_t = -u_xxxx - (u_x^2)_xx.

Each step is implicit in -∂ₓ⁴ and explicit in the nonlinearity:

    c_k^{n+1} = (c_k^n + h N_k(φ^n)) / (1 + h k^4),   k = 1..N,

where N(φ) = -(φ_x²)_xx is formed exactly on 2N modes and then truncated.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .spectral import ZeroMeanField, _sq_norm, product_grid_size, wavenumbers


class SimulationError(RuntimeError):
    """Raised when the discrete solution stops being finite."""

    def __init__(self, t: float, message: str = "non-finite coefficients"):
        super().__init__(f"{message} at t = {t:.9g}")
        self.t = t


@dataclass(frozen=True)
class SolverConfig:
    n_modes: int
    dt: float
    t_end: float

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {self.n_modes}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end >= self.dt):
            raise ValueError(f"t_end ({self.t_end}) must be >= dt ({self.dt})")

    @property
    def n_steps(self) -> int:
        # tolerate representation error in t_end/dt, e.g. 0.3/1e-6
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?P<amp>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:\s*/\s*\d+(?:\.\d*)?)?)?\s*\*?\s*
        (?P<kind>sin|cos)\s*\(\s*(?P<k>\d*)\s*\*?\s*x\s*\)""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class InitialDatum:
    """Finite trigonometric polynomial, terms are ``(kind, k, amplitude)``."""

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((str(kind), int(k), float(a)) for kind, k, a in self.terms)
        seen = set()
        for kind, k, _ in terms:
            if kind not in ("sin", "cos"):
                raise ValueError(f"unknown term kind {kind!r}")
            if k < 1:
                raise ValueError(f"wavenumber must be >= 1, got {k}")
            if (kind, k) in seen:
                raise ValueError(f"duplicate term {kind}({k}x)")
            seen.add((kind, k))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def parse(cls, text: str) -> "InitialDatum":
        """Parse expressions like ``1.5*cos(x) - 1/2 sin(2x) + 1/3*cos(3x)``.

        ``0`` (or an empty string) is the zero datum.
        """
        text = text.strip()
        if text in ("", "0"):
            return cls(())
        terms = []
        pos = 0
        while pos < len(text):
            m = _TERM.match(text, pos)
            if m is None or (pos > 0 and m.group("sign") is None):
                raise ValueError(f"cannot parse initial datum {text!r} at offset {pos}")
            amp = float(Fraction(m.group("amp").replace(" ", ""))) if m.group("amp") else 1.0
            if m.group("sign") == "-":
                amp = -amp
            k = int(m.group("k")) if m.group("k") else 1
            terms.append((m.group("kind"), k, amp))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        return cls(tuple(terms))

    @property
    def max_wavenumber(self) -> int:
        return max((k for _, k, _ in self.terms), default=0)

    def field(self, band: int) -> ZeroMeanField:
        if self.max_wavenumber > band:
            raise ValueError(
                f"initial datum has wavenumber {self.max_wavenumber} > n_modes {band}; "
                "projecting it would make d(0) nonzero"
            )
        return ZeroMeanField.from_trig(self.terms, band)

    def l2_norm(self) -> float:
        return math.sqrt(math.pi * sum(a * a for _, _, a in self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for kind, k, a in self.terms:
            arg = "x" if k == 1 else f"{k}x"
            sign = "-" if a < 0 else "+"
            amp = "" if abs(a) == 1 else f"{abs(a):.17g}*"
            parts.append(f"{sign} {amp}{kind}({arg})")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


class Stepper:
    """Cached transforms for repeated steps of one (band, h) pair."""

    def __init__(self, band: int, h: float, nonlinear: bool = True):
        self.band = band
        self.h = h
        self.nonlinear = nonlinear
        k = wavenumbers(band)
        self._m = product_grid_size(band)
        self._ik = 1j * k
        # rfft/irfft scaling folded into the k^2 factor of -(.)_xx
        self._hk2m = h * k**2 * self._m
        self._denom = 1.0 + h * k**4
        self._buf = np.zeros(self._m // 2 + 1, dtype=complex)

    def advance(self, c: np.ndarray) -> np.ndarray:
        if not self.nonlinear:
            return c / self._denom
        band = self.band
        self._buf[1:band + 1] = self._ik * c
        ux = np.fft.irfft(self._buf, n=self._m)
        sq = np.fft.rfft(ux * ux)
        return (c + self._hk2m * sq[1:band + 1]) / self._denom


def step(phi: ZeroMeanField, h: float, nonlinear: bool = True) -> ZeroMeanField:
    """One semi-implicit Euler step; ``nonlinear=False`` drops N(φ)."""
    return ZeroMeanField(Stepper(phi.band, h, nonlinear).advance(phi.coeffs))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots ``coeffs[j]`` at ``times[j] = j * stride * h``."""

    config: SolverConfig
    coeffs: np.ndarray
    stride: int = 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.coeffs.shape[0]) * (self.stride * self.config.dt)

    @property
    def snapshots(self) -> list[ZeroMeanField]:
        return [ZeroMeanField(row) for row in self.coeffs]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, j: int) -> ZeroMeanField:
        return ZeroMeanField(self.coeffs[j])

    @property
    def phi_h1(self) -> np.ndarray:
        return np.sqrt(_sq_norm(self.coeffs, 1))

    def save(self, path) -> None:
        write_trajectory(path, self.coeffs, self.config.dt * self.stride)

    @classmethod
    def load(cls, path) -> "Trajectory":
        n, h, coeffs = read_trajectory(path)
        t_end = max(h * (coeffs.shape[0] - 1), h)
        return cls(SolverConfig(n, h, t_end), coeffs)


def iter_blocks(cfg: SolverConfig, u0: InitialDatum, block: int = 2048,
                nonlinear: bool = True) -> Iterator[tuple[int, np.ndarray]]:
    """Stream the trajectory as ``(n0, rows)`` with ``rows[j]`` = φ(t_{n0+j}).

    Consecutive blocks share their boundary snapshot, so every solver
    interval lies inside exactly one block.
    """
    c = u0.field(cfg.n_modes).coeffs.copy()
    n_steps = cfg.n_steps
    h = cfg.dt
    stepper = Stepper(cfg.n_modes, h, nonlinear)
    n0 = 0
    while n0 < n_steps:
        m = min(block, n_steps - n0)
        rows = np.empty((m + 1, cfg.n_modes), dtype=complex)
        rows[0] = c
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(m):
                c = stepper.advance(c)
                rows[j + 1] = c
        finite = np.isfinite(rows).all(axis=1)
        if not finite.all():
            raise SimulationError((n0 + int(np.argmin(finite))) * h)
        yield n0, rows
        n0 += m


def simulate(cfg: SolverConfig, u0: InitialDatum, stride: int = 1,
             nonlinear: bool = True) -> Trajectory:
    """Run the scheme to ``cfg.t_end`` keeping every ``stride``-th snapshot.

    Dense storage costs 16·N bytes per kept snapshot; long runs should use
    :func:`iter_blocks` or thin with ``stride``.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    kept = [u0.field(cfg.n_modes).coeffs]
    for n0, rows in iter_blocks(cfg, u0, nonlinear=nonlinear):
        for j in range(1, rows.shape[0]):
            if (n0 + j) % stride == 0:
                kept.append(rows[j])
    return Trajectory(cfg, np.array(kept), stride)


# Binary layout (little-endian float64): N, h, count, then per snapshot
# Re c_1, Im c_1, ..., Re c_N, Im c_N.
_HEADER = struct.Struct("<3d")


def write_trajectory(path, coeffs: np.ndarray, h: float) -> None:
    coeffs = np.asarray(coeffs, dtype=complex)
    count, n = coeffs.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(float(n), float(h), float(count)))
        fh.write(coeffs.astype("<c16").tobytes())


def read_trajectory(path) -> tuple[int, float, np.ndarray]:
    with open(path, "rb") as fh:
        n, h, count = _HEADER.unpack(fh.read(_HEADER.size))
        n, count = int(n), int(count)
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != 2 * n * count:
        raise ValueError(f"{path}: expected {count} snapshots of {n} modes, got {data.size} floats")
    return n, h, data.view("<c16").reshape(count, n).astype(complex)


def l2_energy(coeffs: np.ndarray) -> np.ndarray:
    return np.sqrt(_sq_norm(coeffs, 0))


__all__ = [
    "InitialDatum", "SimulationError", "SolverConfig", "Stepper", "Trajectory", "iter_blocks",
    "l2_energy", "read_trajectory", "simulate", "step", "write_trajectory",
]
