"""Mean-zero periodic traveling waves of the ILW equation.

The wave u(x, t) = phi(x - c t) solves

    -c phi + phi^2 - M_delta phi = A,      A = (1/L) int_0^L phi^2,

and is parametrised by the elliptic modulus k in (0, k1(L, delta)), where k1
is the root of the admissibility ratio v = (2 delta / L) K(k) / K(k') = 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import specfun as sf
from .errors import AdmissibilityError, DomainError, RootNotFoundError
from .fourier import Grid, SpectralField, apply_M

# keep this far from k1, where the speed has a pole
KMAX_MARGIN = 1e-6
SERIES_CAP = 2000
SERIES_RTOL = 1e-16
COEFF_RTOL = 1e-18
ROOT_XTOL = 1e-14


def _check_geometry(L: float, delta: float):
    if not (math.isfinite(L) and L > 0):
        raise DomainError(f"period must be positive, got {L!r}")
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError(f"depth must be positive, got {delta!r}")


def admissibility_ratio(L: float, delta: float, k: float) -> float:
    """v(L, delta, k) = (2 delta / L) K(k) / K(k'); waves exist while v < 1."""
    _check_geometry(L, delta)
    m = sf.EllipticModulus.of(k)
    if m.k == 0.0:
        return 0.0
    return 2.0 * delta / L * sf.complete_K(m) / sf.complete_K(m.complement())


@lru_cache(maxsize=256)
def admissible_kmax(L: float, delta: float) -> float:
    """Upper end k1 of the admissible moduli: the root of v(L, delta, k) = 1."""
    _check_geometry(L, delta)
    # v is increasing, v -> 0 as k -> 0 and v -> inf as k -> 1
    lo, hi = 1e-300, 1.0 - 1e-16
    return brentq(lambda k: admissibility_ratio(L, delta, k) - 1.0, lo, hi,
                  xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)


def _check_admissible(L: float, delta: float, k: float) -> float:
    _check_geometry(L, delta)
    k = float(k)
    if not math.isfinite(k) or k <= 0.0:
        raise AdmissibilityError(f"modulus must be positive, got {k!r}")
    k1 = admissible_kmax(L, delta)
    if k > k1 - KMAX_MARGIN:
        raise AdmissibilityError(
            f"k = {k:.12g} is not below k1 - {KMAX_MARGIN:g} = {k1 - KMAX_MARGIN:.12g}")
    return k


def wave_speed(L: float, delta: float, k: float) -> float:
    """Speed c(k), all-real elliptic formula.

    c = 1/delta - 8 pi delta K / (L^2 K') - (4K/L) [Z(u; k') + cn dn / sn (u; k')],
    with u = 4 delta K / L.
    """
    k = _check_admissible(L, delta, k)
    m = sf.EllipticModulus.of(k)
    mc = m.complement()
    K = sf.complete_K(m)
    Kp, Ep = sf.complete_KE(mc)
    u = 4.0 * delta * K / L
    sn, cn, dn = sf.jacobi_sn_cn_dn(u, mc, K=Kp)
    Z = sf.jacobi_zeta(u, mc, K=Kp, E=Ep)
    return float(1.0 / delta - 8.0 * math.pi * delta * K / (L * L * Kp)
                 - 4.0 * K / L * (Z + cn * dn / sn))


@lru_cache(maxsize=256)
def speed_root_k0(L: float, delta: float) -> float:
    """The modulus k0 with c(k0) = 0 (standing wave)."""
    k1 = admissible_kmax(L, delta)
    lo, hi = 1e-8, k1 - KMAX_MARGIN
    clo, chi = wave_speed(L, delta, lo), wave_speed(L, delta, hi)
    if clo * chi > 0:
        raise RootNotFoundError(f"c(k) does not change sign on ({lo:g}, {hi:.9g})")
    return brentq(lambda k: wave_speed(L, delta, k), lo, hi, xtol=ROOT_XTOL,
                  rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class WaveParams:
    """Everything that defines one wave of the family."""

    L: float
    delta: float
    k: float
    c: float
    A: float
    m1: float
    m2: float
    m3: float
    m4: float
    a: float
    sigma: float
    K: float
    Kp: float
    E: float
    Ep: float

    @property
    def kprime(self) -> float:
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))

    @property
    def R(self) -> float:
        """R(k) = N(k) / L, the same number as A."""
        return self.A

    @property
    def norm_squared(self) -> float:
        return self.A * self.L


def _coefficient_ratio(m, L, delta, K, Kp):
    """sinh(2 m pi delta / L) / sinh(m pi K' / K) without overflow."""
    m = np.asarray(m, dtype=float)
    a = 2.0 * m * math.pi * delta / L
    b = m * math.pi * Kp / K
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.exp(a - b) * np.expm1(-2.0 * a) / np.expm1(-2.0 * b)
    return np.where(m == 0, 0.0, r)


def _elliptic_coefficients(L, delta, k):
    m = sf.EllipticModulus.of(k)
    mc = m.complement()
    K, E = sf.complete_KE(m)
    Kp, Ep = sf.complete_KE(mc)
    u = 2.0 * K * delta / L
    sn, cn, dn = sf.jacobi_sn_cn_dn(u, mc, K=Kp)
    Z = sf.jacobi_zeta(u, mc, K=Kp, E=Ep)
    m1 = 4.0 * K / L * cn * sn * dn
    m2 = sn * sn
    m3 = -4.0 * K / L * Z - 4.0 * delta * math.pi * K / (L * L * Kp)
    m4 = 2.0 * K / L
    return float(m1), float(m2), float(m3), float(m4), K, Kp, E, Ep


def _series_terms(L, delta, K, Kp):
    m = np.arange(1, SERIES_CAP + 1)
    r2 = _coefficient_ratio(m, L, delta, K, Kp) ** 2
    keep = r2 >= SERIES_RTOL * np.cumsum(r2)
    n = int(np.argmin(keep)) if not keep.all() else SERIES_CAP
    if n == SERIES_CAP:
        warnings.warn("Fourier series of the wave not converged at the mode cap",
                      RuntimeWarning, stacklevel=3)
    return m[:max(n, 1)], r2[:max(n, 1)]


def wave_params(L: float, delta: float, k: float) -> WaveParams:
    """Assemble speed, integration constant, profile constants and Galilean shift."""
    k = _check_admissible(L, delta, k)
    c = wave_speed(L, delta, k)
    m1, m2, m3, m4, K, Kp, E, Ep = _elliptic_coefficients(L, delta, k)
    _, r2 = _series_terms(L, delta, K, Kp)
    N = 8.0 * math.pi ** 2 / L * float(np.sum(r2))
    A = N / L
    root = math.sqrt(c * c + 4.0 * A)
    # positive root of a^2 + c a - A = 0, written to avoid cancellation when c > 0
    a = 2.0 * A / (c + root) if c > 0 else 0.5 * (root - c)
    return WaveParams(L=float(L), delta=float(delta), k=k, c=c, A=A, m1=m1, m2=m2,
                      m3=m3, m4=m4, a=a, sigma=root, K=K, Kp=Kp, E=E, Ep=Ep)


def profile_elliptic(x, params: WaveParams):
    """phi(x) = m1 dn^2(m4 x; k) / (1 - m2 dn^2(m4 x; k)) + m3."""
    p = params
    _, _, dn = sf.jacobi_sn_cn_dn(np.asarray(x, dtype=float) * p.m4, p.k, K=p.K)
    d2 = dn * dn
    return p.m1 * d2 / (1.0 - p.m2 * d2) + p.m3


def profile_fourier(params: WaveParams, M: int | None = None) -> np.ndarray:
    """One-sided Fourier coefficients phi_hat(m), m = 0..M (phi_hat(0) = 0).

    With M omitted the series is cut where the coefficients fall below 1e-18
    of the first one.
    """
    p = params
    if M is None:
        r = _coefficient_ratio(np.arange(SERIES_CAP + 1), p.L, p.delta, p.K, p.Kp)
        small = np.nonzero(r[1:] < COEFF_RTOL * r[1])[0]
        if small.size == 0:
            warnings.warn("Fourier coefficients of the wave not resolved at the mode cap",
                          RuntimeWarning, stacklevel=2)
            M = SERIES_CAP
        else:
            M = int(small[0]) + 1
    m = np.arange(M + 1)
    return 2.0 * math.pi / p.L * _coefficient_ratio(m, p.L, p.delta, p.K, p.Kp)


def fourier_samples(params: WaveParams, x, M: int | None = None) -> np.ndarray:
    """Evaluate phi(x) = 2 sum_{m>=1} phi_hat(m) cos(2 pi m x / L)."""
    coef = profile_fourier(params, M)
    x = np.asarray(x, dtype=float)
    m = np.arange(1, coef.size)
    # sum smallest terms first
    ang = 2.0 * math.pi / params.L * np.multiply.outer(x, m[::-1])
    return 2.0 * (np.cos(ang) @ coef[1:][::-1])


def norm_squared_series(params: WaveParams) -> float:
    """N(k) = int_0^L phi^2 = (8 pi^2 / L) sum_{m>=1} [sinh(2 m pi delta/L) / sinh(m pi K'/K)]^2."""
    p = params
    _, r2 = _series_terms(p.L, p.delta, p.K, p.Kp)
    return 8.0 * math.pi ** 2 / p.L * float(np.sum(r2[::-1]))


def norm_squared_closed(params: WaveParams) -> float:
    """N(k) from the closed form in complete/incomplete elliptic integrals.

    Integrates (m1 dn^2 / (1 - m2 dn^2) + m3)^2 over a period; the elliptic
    integral of the third kind with characteristic alpha^2 < 0 is reduced to
    Heuman's Lambda.
    """
    p = params
    k2 = p.k * p.k
    K, E = p.K, p.E
    if not (0.0 < p.m2 < 1.0):
        raise DomainError(f"degenerate profile constant m2 = {p.m2!r}")
    a2 = -p.m2 * k2 / (1.0 - p.m2)
    psi = math.asin(math.sqrt(a2 / (a2 - k2)))
    lam = float(sf.heuman_lambda(psi, p.k))
    S = math.sqrt(a2 * (1.0 - a2) * (a2 - k2))
    Pi = k2 * K / (k2 - a2) - math.pi * a2 * lam / (2.0 * S)
    V2 = ((2 * k2 * k2 * a2 - 2 * k2 * k2 + a2 * a2 * (1 - k2)) * K / (k2 - a2) + a2 * E
          - math.pi * (2 * a2 * k2 + 2 * a2 - a2 * a2 - 3 * k2) * a2 * lam / (2 * S))
    V2 /= 2.0 * (a2 - 1.0) * (k2 - a2)
    quartic = (2.0 * p.m1 ** 2 / (p.m4 * (1.0 - p.m2) ** 2) / a2 ** 2
               * (k2 * k2 * K + 2.0 * k2 * (a2 - k2) * Pi + (a2 - k2) ** 2 * V2))
    cross = 2.0 * p.m1 * p.m3 / (p.m4 * (1.0 - p.m2)) * (math.pi * (k2 - a2) * lam / S)
    return quartic + cross + p.L * p.m3 ** 2


def dperiod_ratio_dk(params: WaveParams) -> float:
    """d/dk [K(k') / K(k)] = ([E - K] K' + K E') / (k (k^2 - 1) K^2)."""
    p = params
    return ((p.E - p.K) * p.Kp + p.K * p.Ep) / (p.k * (p.k * p.k - 1.0) * p.K ** 2)


def dN_dk(params: WaveParams) -> float:
    """N'(k) from the term-wise differentiated series."""
    p = params
    m, r2 = _series_terms(p.L, p.delta, p.K, p.Kp)
    b = m * math.pi * p.Kp / p.K
    coth = 1.0 + 2.0 / np.expm1(np.minimum(2.0 * b, 700.0))
    s = float(np.sum((m * r2 * coth)[::-1]))
    return -16.0 * math.pi ** 3 / p.L * dperiod_ratio_dk(p) * s


def dA_dk(params: WaveParams) -> float:
    return dN_dk(params) / params.L


def dc_dk(L: float, delta: float, k: float, h: float = 1e-5) -> float:
    """Richardson-extrapolated central difference of the speed (steps h and h/2)."""
    k1 = admissible_kmax(L, delta)
    if k < 1e-4 or k > k1 - 1e-4:
        raise DomainError(f"k = {k!r} is within 1e-4 of the ends of (0, {k1:.9g})")

    def central(step):
        return (wave_speed(L, delta, k + step) - wave_speed(L, delta, k - step)) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


@dataclass(frozen=True)
class WaveProfile:
    """A wave together with its grid samples and analytic Fourier coefficients."""

    params: WaveParams
    field: SpectralField
    coeffs_analytic: np.ndarray

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def samples(self) -> np.ndarray:
        return self.field.samples


def build_profile(params: WaveParams, N: int = 256) -> WaveProfile:
    """Sample the elliptic formula on an N-point grid."""
    grid = Grid(params.L, N)
    field = SpectralField(grid, profile_elliptic(grid.x, params))
    coef = profile_fourier(params)
    coef.setflags(write=False)
    return WaveProfile(params, field, coef)


def make_profile(L: float, delta: float, k: float, N: int = 256) -> WaveProfile:
    return build_profile(wave_params(L, delta, k), N)


def residual_travkdv(params: WaveParams, N: int = 256, field: SpectralField | None = None) -> float:
    """Max-norm of -c phi + phi^2 - M_delta phi - A on the grid.

    By default phi is the elliptic profile sampled on N points; pass ``field``
    to test any other function against the same (c, A).
    """
    if field is None:
        field = build_profile(params, N).field
    phi = field.samples
    r = -params.c * phi + phi * phi - apply_M(field, params.delta).samples - params.A
    return float(np.max(np.abs(r)))
