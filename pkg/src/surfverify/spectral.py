"""Zero-mean, real, 2π-periodic fields stored by their positive Fourier modes.

A field with coefficients ``c[0..N-1]`` represents

    u(x) = sum_{k=1..N} 2 Re(c[k-1] exp(i k x)),

so the mean is structurally zero and the reconstruction is always real.
All norms follow from Parseval with the factor ``2π · 2``.

Batched helpers (leading axes allowed) are exposed with a leading underscore
for the solver and residual code, which work on stacks of coefficient rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

TWO_PI = 2.0 * np.pi

#: grid oversampling factor used by ``linf_bound(..., mode="grid")``
GRID_OVERSAMPLING = 8


def wavenumbers(band: int) -> np.ndarray:
    return np.arange(1, band + 1, dtype=float)


def product_grid_size(band: int) -> int:
    """Transform length that resolves a product of two band-``band`` fields.

    The product lives on wavenumbers up to ``2*band``; sampling it without
    aliasing needs more than ``4*band`` points.
    """
    return next_fast_len(4 * band + 2, real=True)


def linf_grid_size(band: int) -> int:
    return GRID_OVERSAMPLING * 2 * max(band, 1)


def _to_grid(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Point values on ``x_j = 2πj/m`` for a stack of coefficient rows."""
    band = coeffs.shape[-1]
    spec = np.zeros(coeffs.shape[:-1] + (m // 2 + 1,), dtype=complex)
    spec[..., 1:band + 1] = coeffs
    return np.fft.irfft(spec, n=m, axis=-1) * m


def _from_grid(values: np.ndarray, band: int) -> np.ndarray:
    m = values.shape[-1]
    return np.fft.rfft(values, axis=-1)[..., 1:band + 1] / m


def _derivative(coeffs: np.ndarray, order: int) -> np.ndarray:
    k = wavenumbers(coeffs.shape[-1])
    return coeffs * (1j * k) ** order


def _square_dx(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients (k = 1..2N) of u_x**2, computed without aliasing.

    The k = 0 mode of the square is dropped; every caller differentiates
    the result at least twice.
    """
    band = coeffs.shape[-1]
    m = product_grid_size(band)
    ux = _to_grid(_derivative(coeffs, 1), m)
    return _from_grid(ux * ux, 2 * band)


def _nonlinear(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients (k = 1..2N) of -(u_x**2)_xx."""
    sq = _square_dx(coeffs)
    k = wavenumbers(sq.shape[-1])
    return sq * k**2


def _sq_norm(coeffs: np.ndarray, p: float) -> np.ndarray:
    k = wavenumbers(coeffs.shape[-1])
    return TWO_PI * 2.0 * np.sum(k ** (2 * p) * np.abs(coeffs) ** 2, axis=-1)


def _linf_grid(coeffs: np.ndarray) -> np.ndarray:
    values = _to_grid(coeffs, linf_grid_size(coeffs.shape[-1]))
    return np.max(np.abs(values), axis=-1)


def _linf_coeff(coeffs: np.ndarray) -> np.ndarray:
    return 2.0 * np.sum(np.abs(coeffs), axis=-1)


def _linf(coeffs: np.ndarray, mode: str) -> np.ndarray:
    if mode == "grid":
        return _linf_grid(coeffs)
    if mode == "coeff":
        return _linf_coeff(coeffs)
    raise ValueError(f"unknown L-infinity mode {mode!r} (expected 'grid' or 'coeff')")


@dataclass(frozen=True, eq=False)
class ZeroMeanField:
    """Immutable zero-mean periodic field, ``coeffs[k-1]`` holds mode ``k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, band: int) -> "ZeroMeanField":
        return cls(np.zeros(band, dtype=complex))

    @classmethod
    def from_trig(cls, terms, band: int | None = None) -> "ZeroMeanField":
        """Build from ``(kind, k, amplitude)`` terms, kind in {"sin", "cos"}.

        ``a cos(kx)`` has coefficient ``a/2``; ``a sin(kx)`` has ``a/(2i)``.
        """
        terms = list(terms)
        top = max((k for _, k, _ in terms), default=1)
        band = top if band is None else band
        if top > band:
            raise ValueError(f"wavenumber {top} exceeds band {band}")
        c = np.zeros(band, dtype=complex)
        for kind, k, amp in terms:
            if k < 1:
                raise ValueError(f"wavenumber must be >= 1, got {k}")
            if kind == "cos":
                c[k - 1] += amp / 2.0
            elif kind == "sin":
                c[k - 1] += amp / 2j
            else:
                raise ValueError(f"unknown term kind {kind!r}")
        return cls(c)

    @classmethod
    def from_grid(cls, values, band: int) -> "ZeroMeanField":
        """Project uniform-grid samples on [0, 2π) onto modes 1..band."""
        return cls(_from_grid(np.asarray(values, dtype=float), band))

    @property
    def band(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_modes(self) -> int:
        return self.band

    def resized(self, band: int) -> "ZeroMeanField":
        """Zero-pad or truncate to ``band`` modes."""
        c = np.zeros(band, dtype=complex)
        m = min(band, self.band)
        c[:m] = self.coeffs[:m]
        return ZeroMeanField(c)

    def grid_values(self, m: int | None = None) -> np.ndarray:
        if m is None:
            m = linf_grid_size(self.band)
        return _to_grid(self.coeffs, m)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = wavenumbers(self.band)
        phase = np.exp(1j * np.multiply.outer(x, k))
        return 2.0 * np.real(phase @ self.coeffs)

    def __add__(self, other: "ZeroMeanField") -> "ZeroMeanField":
        band = max(self.band, other.band)
        return ZeroMeanField(self.resized(band).coeffs + other.resized(band).coeffs)

    def __sub__(self, other: "ZeroMeanField") -> "ZeroMeanField":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "ZeroMeanField":
        return ZeroMeanField(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"ZeroMeanField(band={self.band})"


def hp_norm(f: ZeroMeanField, p: int = 0) -> float:
    """``||d^p f / dx^p||_{L^2}``; ``p = 0`` is the L² norm."""
    if p < 0:
        raise ValueError("p must be >= 0")
    return float(np.sqrt(_sq_norm(f.coeffs, p)))


def hneg1_norm(f: ZeroMeanField) -> float:
    """L² norm of the zero-mean antiderivative of ``f``."""
    return float(np.sqrt(_sq_norm(f.coeffs, -1)))


def derivative(f: ZeroMeanField, order: int = 1) -> ZeroMeanField:
    if order < 1:
        raise ValueError("order must be >= 1")
    return ZeroMeanField(_derivative(f.coeffs, order))


def linf_bound(f: ZeroMeanField, mode: str = "grid") -> float:
    """Sup-norm of ``f``.

    ``coeff`` sums ``2|c_k|`` and is a rigorous upper bound. ``grid`` takes
    the maximum over an oversampled uniform grid; it is not certified.
    """
    return float(_linf(f.coeffs, mode))


def nonlinear_term(f: ZeroMeanField) -> ZeroMeanField:
    """Exact ``-(f_x**2)_xx`` on the doubled band."""
    return ZeroMeanField(_nonlinear(f.coeffs))
