"""The linearised operator L = M_delta + c - 2 phi and its spectral properties.

Also holds the Galilean shift phi_sigma = a + phi, which turns the wave
equation into M phi_s + sigma phi_s - phi_s^2 = 0, and the PF(2) test on the
Fourier coefficients of phi_sigma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NumericalError, PF2PreconditionError, ShapeError, WindowError
from .fourier import Grid, SpectralField, apply_M, derivative, symbol
from .wave import WaveParams, WaveProfile, profile_elliptic


@dataclass(frozen=True)
class OperatorMatrix:
    """Collocation matrix of a self-adjoint operator on an N-point grid."""

    entries: np.ndarray
    grid: Grid
    params: WaveParams

    @property
    def size(self) -> int:
        return self.grid.N


def multiplier_matrix(grid: Grid, delta: float) -> np.ndarray:
    """Real-space matrix of M_delta: a symmetric circulant."""
    col = np.real(np.fft.ifft(symbol(grid, delta)))
    idx = (np.arange(grid.N)[:, None] - np.arange(grid.N)[None, :]) % grid.N
    return col[idx]


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def build_operator(profile: WaveProfile, N: int | None = None, *, speed: float | None = None,
                   potential: np.ndarray | None = None) -> OperatorMatrix:
    """Matrix of M_delta + c - 2 phi on N nodes.

    ``speed`` and ``potential`` replace c and phi; they exist so the same
    builder serves the shifted pair (sigma, phi_sigma).
    """
    p = profile.params
    N = profile.grid.N if N is None else N
    grid = Grid(p.L, N)
    if potential is None:
        potential = profile.samples if N == profile.grid.N else profile_elliptic(grid.x, p)
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (N,):
        raise ShapeError(f"potential has shape {potential.shape}, grid has {N} nodes")
    c = p.c if speed is None else speed
    mat = multiplier_matrix(grid, p.delta)
    mat[np.diag_indices(N)] += c - 2.0 * potential
    return OperatorMatrix(_symmetrize(mat), grid, p)


def eig_sym(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix, ascending eigenvalues.

    Every pair is checked: ||A v - lambda v|| < 1e-10 ||A||.
    """
    a = matrix.entries if isinstance(matrix, OperatorMatrix) else np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("eig_sym needs a square matrix")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    scale = max(np.max(np.abs(w)), np.finfo(float).tiny)
    res = np.linalg.norm(a @ v - v * w, axis=0)
    if np.any(res > 1e-10 * scale):
        raise NumericalError(f"eigenpair residual {res.max():.3e} exceeds 1e-10 ||A||")
    return w, v


def reflect(v: np.ndarray) -> np.ndarray:
    """Samples of v(-x) on the periodic grid."""
    return np.roll(v[::-1], 1, axis=0)


def parity_bases(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of even (N/2 + 1 columns) and odd (N/2 - 1 columns) grid vectors."""
    Pe = np.zeros((N, N // 2 + 1))
    Po = np.zeros((N, N // 2 - 1))
    Pe[0, 0] = Pe[N // 2, N // 2] = 1.0
    j = np.arange(1, N // 2)
    r = 1.0 / math.sqrt(2.0)
    Pe[j, j] = Pe[N - j, j] = r
    Po[j, j - 1] = r
    Po[N - j, j - 1] = -r
    return Pe, Po


def parity(v: np.ndarray, tol: float = 1e-10) -> str:
    """'even', 'odd' or 'mixed' for a grid vector."""
    r = reflect(v)
    nv = np.linalg.norm(v)
    if np.linalg.norm(v - r) <= tol * nv:
        return "even"
    if np.linalg.norm(v + r) <= tol * nv:
        return "odd"
    return "mixed"


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    n_neg: int
    n_zero: int
    kernel_residual: float
    gap: float
    truncation_drift: float
    tol: float
    kernel_alignment: float
    negative_parity: str
    zero_parity: str
    parity_defect: float

    @property
    def n_pos(self) -> int:
        return self.eigenvalues.size - self.n_neg - self.n_zero


def spectrum_report(profile: WaveProfile, N: int | None = None, tol: float | None = None,
                    n_drift: int = 10) -> SpectrumReport:
    """Count negative and near-zero eigenvalues of L and characterise the kernel.

    ``tol`` defaults to 1e-8 ||L||_2.  ``truncation_drift`` is the largest
    change of the lowest ``n_drift`` eigenvalues when N is doubled.
    """
    N = profile.grid.N if N is None else N
    op = build_operator(profile, N)
    w, v = eig_sym(op)
    norm = float(np.max(np.abs(w)))
    tol = 1e-8 * norm if tol is None else tol
    neg = w < -tol
    zero = np.abs(w) <= tol
    nonzero = np.abs(w[~zero])
    gap = float(nonzero.min()) if nonzero.size else 0.0

    # phi' on the same grid
    phi = SpectralField(op.grid, profile_elliptic(op.grid.x, profile.params))
    dphi = derivative(phi).samples
    kernel_residual = float(np.linalg.norm(op.entries @ dphi) / np.linalg.norm(dphi))
    if zero.any():
        z = v[:, np.argmin(np.abs(w))]
        align = float(abs(z @ dphi) / (np.linalg.norm(z) * np.linalg.norm(dphi)))
        zpar = parity(z, 1e-8)
    else:
        align, zpar = 0.0, "none"
    npar = parity(v[:, 0], 1e-8) if neg.any() else "none"

    # L commutes with x -> -x: the even-odd coupling block must vanish
    Pe, Po = parity_bases(N)
    defect = float(np.max(np.abs(Pe.T @ op.entries @ Po)) / norm)

    big = build_operator(profile, 2 * N)
    w2 = np.linalg.eigvalsh(big.entries)
    m = min(n_drift, N)
    drift = float(np.max(np.abs(w2[:m] - w[:m])))
    return SpectrumReport(eigenvalues=w, n_neg=int(neg.sum()), n_zero=int(zero.sum()),
                          kernel_residual=kernel_residual, gap=gap, truncation_drift=drift,
                          tol=tol, kernel_alignment=align, negative_parity=npar,
                          zero_parity=zpar, parity_defect=defect)


# -- Galilean shift -----------------------------------------------------------

@dataclass(frozen=True)
class ShiftedProfile:
    """phi_sigma = a + phi, a solution of M u + sigma u - u^2 = 0."""

    a: float
    sigma: float
    field: SpectralField
    residual: float
    min_refined: float


def galilean_shift(profile: WaveProfile, refine: int = 4) -> ShiftedProfile:
    """Shift the wave by a = (-c + sqrt(c^2 + 4R))/2 and check the shifted equation.

    Positivity is tested on a grid ``refine`` times finer; a non-positive
    minimum raises :class:`PF2PreconditionError`.
    """
    p = profile.params
    g = profile.grid
    shifted = SpectralField(g, profile.samples + p.a)
    u = shifted.samples
    res = apply_M(shifted, p.delta).samples + p.sigma * u - u * u
    fine = Grid(p.L, refine * g.N)
    min_fine = float(np.min(profile_elliptic(fine.x, p) + p.a))
    if not min_fine > 0:
        raise PF2PreconditionError(
            f"shifted wave is not positive: min = {min_fine:.6g} at k = {p.k:.9g}")
    return ShiftedProfile(a=p.a, sigma=p.sigma, field=shifted,
                          residual=float(np.max(np.abs(res))), min_refined=min_fine)


def operator_identity_check(profile: WaveProfile, N: int | None = None,
                            a: float | None = None) -> float:
    """Max entrywise gap between the matrices of (c, phi) and (sigma, phi + a).

    sigma is the stored c + 2a; ``a`` overrides only the shift of the
    potential, which is useful to see the check respond.
    """
    p = profile.params
    N = profile.grid.N if N is None else N
    base = build_operator(profile, N)
    a = p.a if a is None else a
    phi = profile.samples if N == profile.grid.N else profile_elliptic(base.grid.x, p)
    shifted = build_operator(profile, N, speed=p.sigma, potential=phi + a)
    return float(np.max(np.abs(base.entries - shifted.entries)))


# -- PF(2) sequences ----------------------------------------------------------

def shifted_sequence(params: WaveParams, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients of phi_sigma for n = -K..K and their log second differences.

    alpha_0 = a and alpha_n = (2 pi / L) sinh(nu |n|) / sinh(mu |n|) with
    nu = 2 pi delta / L, mu = pi K'/K.  The second differences
    log(alpha_{n+1}) - 2 log(alpha_n) + log(alpha_{n-1}) are formed from the
    exponentially small corrections only, so they keep full relative
    accuracy far into the geometric tail.
    """
    p = params
    nu = 2.0 * math.pi * p.delta / p.L
    mu = math.pi * p.Kp / p.K
    n = np.arange(0, K + 2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        # log alpha_n = log(2pi/L) + (nu - mu) n + g(n) for n >= 1
        g = np.log1p(-np.exp(-2.0 * nu * n)) - np.log1p(-np.exp(-2.0 * mu * n))
    la = math.log(2.0 * math.pi / p.L) + (nu - mu) * n + g
    la[0] = math.log(p.a)
    d2 = np.empty(K + 1)
    d2[0] = 2.0 * (la[1] - la[0])
    d2[1] = la[2] - 2.0 * la[1] + la[0]
    # the linear part cancels exactly for n >= 2
    d2[2:] = g[3:K + 2] - 2.0 * g[2:K + 1] + g[1:K]
    alpha_pos = np.exp(la[:K + 1])
    alpha_pos[0] = p.a
    alpha = np.concatenate([alpha_pos[:0:-1], alpha_pos])
    d2_full = np.concatenate([d2[:0:-1], d2])
    return alpha, d2_full


@dataclass(frozen=True)
class PF2Report:
    window: int
    alpha: np.ndarray
    min_minor: float
    min_strict_minor: float
    pass_: bool
    n_violations: int
    positive: bool
    d2_source: str
    details: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.pass_


def pf2_check(alpha, M: int = 40, d2=None) -> PF2Report:
    """Windowed test of the PF(2) conditions for a positive even sequence.

    ``alpha`` is centred: alpha[j] belongs to n = j - (len - 1)/2, and must
    cover |n| <= 2M.  For n1 < n2 and m1 < m2 in [-M, M] every minor
    alpha_{n1-m1} alpha_{n2-m2} - alpha_{n1-m2} alpha_{n2-m1} must be >= 0,
    and > 0 when n1 < m2 and m1 < n2.

    Writing i = n1 - m1, s = n2 - n1, t = m2 - m1, the minor equals
    alpha_i alpha_{i+s-t} (1 - exp(Delta)) where Delta is a trapezoid-weighted
    sum of second log-differences over indices i-t+1 .. i+s-1.  ``d2`` can
    supply those second differences with full relative accuracy; otherwise
    they come from np.log(alpha), and values within rounding of zero are
    treated as zero.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size % 2 == 0:
        raise ShapeError("alpha must be a centred sequence of odd length")
    half = (alpha.size - 1) // 2
    if half < 2 * M:
        raise WindowError(f"window M = {M} needs |n| <= {2 * M}, sequence has |n| <= {half}")
    alpha = alpha[half - 2 * M: half + 2 * M + 1]
    positive = bool(np.all(alpha > 0))
    if not positive:
        return PF2Report(M, alpha, -np.inf, -np.inf, False, int(np.sum(alpha <= 0)), False, "none")
    if d2 is None:
        la = np.log(alpha)
        d2 = np.zeros_like(la)
        d2[1:-1] = la[2:] - 2.0 * la[1:-1] + la[:-2]
        noise = 16.0 * np.finfo(float).eps * np.max(np.abs(la))
        d2[np.abs(d2) <= noise] = 0.0
        source = "numeric"
    else:
        d2 = np.asarray(d2, dtype=float)
        h2 = (d2.size - 1) // 2
        if h2 < 2 * M:
            raise WindowError("second differences do not cover the window")
        d2 = d2[h2 - 2 * M: h2 + 2 * M + 1]
        source = "supplied"

    off = 2 * M  # array index of n = 0
    min_minor = np.inf
    min_strict = np.inf
    bad = 0
    for s in range(1, 2 * M + 1):
        for t in range(1, 2 * M + 1):
            # weights w(d) for d = b - a, b < s, a < t
            kern = np.convolve(np.ones(s), np.ones(t))          # d = -(t-1) .. s-1
            i = np.arange(-2 * M + t, 2 * M - s + 1)
            if i.size == 0:
                continue
            # Delta(i) = sum_d kern[d + t - 1] d2[i + d]; d2 index range i-t+1 .. i+s-1
            seg = d2[off + i[0] - t + 1: off + i[-1] + s]
            delta = np.convolve(seg, kern[::-1], mode="valid")
            prod = alpha[off + i] * alpha[off + i + s - t]
            minor = -prod * np.expm1(delta)
            strict = (i > -s) & (i < t)
            bad += int(np.sum(minor < 0)) + int(np.sum(minor[strict] <= 0))
            min_minor = min(min_minor, float(minor.min()))
            if strict.any():
                min_strict = min(min_strict, float(minor[strict].min()))
    return PF2Report(window=M, alpha=alpha, min_minor=min_minor, min_strict_minor=min_strict,
                     pass_=bad == 0, n_violations=bad, positive=True, d2_source=source)


def pf2_check_profile(profile: WaveProfile, M: int = 40) -> PF2Report:
    """PF(2) test of the shifted wave's Fourier coefficients (alpha_0 = a)."""
    alpha, d2 = shifted_sequence(profile.params, 2 * M)
    return pf2_check(alpha, M, d2=d2)


def direct_minors(alpha, M: int) -> tuple[np.ndarray, np.ndarray]:
    """All windowed minors by plain products (slow reference; for testing)."""
    alpha = np.asarray(alpha, dtype=float)
    half = (alpha.size - 1) // 2
    if half < 2 * M:
        raise WindowError("sequence too short for the window")
    a = lambda n: alpha[half + n]
    vals, strict = [], []
    r = range(-M, M + 1)
    for n1 in r:
        for n2 in r:
            if n2 <= n1:
                continue
            for m1 in r:
                for m2 in r:
                    if m2 <= m1:
                        continue
                    vals.append(a(n1 - m1) * a(n2 - m2) - a(n1 - m2) * a(n2 - m1))
                    strict.append(n2 > m1 and n1 < m2)
    return np.array(vals), np.array(strict)
