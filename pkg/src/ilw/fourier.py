"""Periodic grids, the ILW dispersion multiplier and spectral calculus.

Coefficients use the normalisation ghat_n = (1/N) sum_j g_j exp(-i kappa_n x_j),
stored in numpy FFT order, so that g_j = sum_n ghat_n exp(i kappa_n x_j).
The Nyquist mode n = N/2 is treated as +N/2 with a symmetric (real) multiplier.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ShapeError

TAIL_WARN = 1e-12
# Taylor coefficients of x coth(x) - 1 in powers of x^2
_XCOTHX_COEFFS = (1 / 3, -1 / 45, 2 / 945, -1 / 4725, 2 / 93555, -1382 / 638512875,
                  4 / 18243225, -3617 / 162820783125, 87734 / 38979295480125)


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_j = j L / N, j = 0..N-1, on the period [0, L)."""

    L: float
    N: int

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"period must be positive, got {self.L!r}")
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise DomainError(f"N must be an even integer >= 8, got {self.N!r}")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in FFT order, Nyquist taken as +N/2."""
        n = np.fft.fftfreq(self.N, 1.0 / self.N)
        n[self.N // 2] = self.N // 2
        return n

    @property
    def kappa(self) -> np.ndarray:
        return 2.0 * np.pi * self.modes / self.L


def transform(samples, check_tail: bool = False) -> np.ndarray:
    """Forward transform: samples -> coefficients (divided by N)."""
    g = np.asarray(samples)
    if g.ndim != 1:
        raise ShapeError("transform expects a 1-D array")
    ghat = np.fft.fft(g) / g.size
    if check_tail:
        top = np.max(np.abs(ghat))
        if top > 0 and abs(ghat[g.size // 2]) > TAIL_WARN * top:
            warnings.warn("spectrum not resolved: Nyquist coefficient above "
                          f"{TAIL_WARN:g} of the peak", RuntimeWarning, stacklevel=2)
    return ghat


def inverse(coeffs) -> np.ndarray:
    """Inverse transform returning the real part of the samples."""
    c = np.asarray(coeffs)
    if c.ndim != 1:
        raise ShapeError("inverse expects a 1-D array")
    return np.real(np.fft.ifft(c) * c.size)


@dataclass(frozen=True)
class SpectralField:
    """Real periodic field stored as samples; coefficients computed lazily."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.N,):
            raise ShapeError(f"expected {self.grid.N} samples, got shape {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs) -> "SpectralField":
        c = np.asarray(coeffs)
        if c.shape != (grid.N,):
            raise ShapeError(f"expected {grid.N} coefficients, got shape {c.shape}")
        return cls(grid, inverse(c))

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = transform(self.samples)
        c.setflags(write=False)
        return c



def theta(n, L: float, delta: float):
    """Multiplier of M_delta: (2 pi |n| / L) coth(2 pi |n| delta / L) - 1/delta, 0 at n = 0."""
    if not (delta > 0 and math.isfinite(delta)):
        raise DomainError(f"depth delta must be positive and finite, got {delta!r}")
    n = np.abs(np.asarray(n, dtype=float))
    kap = 2.0 * np.pi * n / L
    x = kap * delta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # coth(x) = 1 + 2 / expm1(2x)
        val = kap + 2.0 * kap / np.expm1(2.0 * x) - 1.0 / delta
    # x coth x - 1 as a power series where the direct form cancels
    small = x < 0.5
    q = x * x
    series = np.zeros_like(q)
    for c in _XCOTHX_COEFFS[::-1]:
        series = (series + c) * q
    val = np.where(small, series / delta, val)
    val = np.where(n == 0, 0.0, val)
    return val[()] if val.ndim == 0 else val


def symbol(grid: Grid, delta: float) -> np.ndarray:
    """theta evaluated on the grid's modes (FFT order)."""
    return theta(grid.modes, grid.L, delta)


def apply_M(field: SpectralField, delta: float) -> SpectralField:
    """Apply the Fourier multiplier M_delta."""
    return SpectralField.from_coeffs(field.grid, field.coeffs * symbol(field.grid, delta))


def derivative(field: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative d^order/dx^order (the Nyquist mode is zeroed for odd orders)."""
    g = field.grid
    factor = (1j * g.kappa) ** order
    if order % 2:
        factor[g.N // 2] = 0.0
    return SpectralField.from_coeffs(g, field.coeffs * factor)


def dealias_mask(grid: Grid) -> np.ndarray:
    """True on the modes kept by the 2/3 rule, |n| <= N/3."""
    return np.abs(grid.modes) <= grid.N // 3


def product_dealiased(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product with inputs and result truncated to |n| <= N/3."""
    if f.grid != g.grid:
        raise ShapeError("product of fields on different grids")
    keep = dealias_mask(f.grid)
    fs = inverse(np.where(keep, f.coeffs, 0.0))
    gs = fs if g is f else inverse(np.where(keep, g.coeffs, 0.0))
    return SpectralField.from_coeffs(f.grid, np.where(keep, transform(fs * gs), 0.0))


def integral(field: SpectralField) -> float:
    """Integral over one period (exact for trigonometric polynomials)."""
    return float(field.grid.L * np.real(field.coeffs[0]))


def inner(f, g, L: float) -> float:
    """Discrete L^2 inner product (L/N) sum_j f_j g_j."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ShapeError("inner product of arrays with different shapes")
    return float(L / f.size * np.dot(f, g))


def w_weights(grid: Grid, delta: float) -> np.ndarray:
    """Weights 1 + theta(n) of the energy norm."""
    return 1.0 + symbol(grid, delta)


def w_norm(field: SpectralField, delta: float) -> float:
    """Energy-space norm ||g||_W = (sum_n (1 + theta(n)) |ghat_n|^2)^(1/2)."""
    c = field.coeffs
    return float(np.sqrt(np.sum(w_weights(field.grid, delta) * np.abs(c) ** 2)))


def resample(field: SpectralField, N: int) -> SpectralField:
    """Spectral interpolation (or truncation) onto a grid with N points."""
    g = field.grid
    if N == g.N:
        return field
    new = Grid(g.L, N)
    c = field.coeffs
    out = np.zeros(N, dtype=complex)
    h = min(g.N, N) // 2
    out[:h] = c[:h]
    out[-h + 1:] = c[-h + 1:]
    # split or fold the Nyquist term so the result stays real
    if N > g.N:
        out[h] = 0.5 * c[h]
        out[-h] = 0.5 * c[h]
    else:
        out[h] = c[h] + c[-h]
    return SpectralField.from_coeffs(new, out)
