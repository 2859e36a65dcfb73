"""Hamiltonian-Krein index of the periodic ILW wave.

K_Ham = n(L) - n(I) - n(D) with I = <L^{-1} 1, 1> and

    D = (1/I) [[<L^{-1} phi, phi>, <L^{-1} phi, 1>],
               [<L^{-1} phi, 1>,   <L^{-1} 1, 1>]].

All inverses are taken on even functions: 1 and phi are even while the
kernel of L (spanned by phi') is odd.  Each quantity is computed twice, by
linear solves and by closed forms in N(k), c(k) and their k-derivatives.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .errors import DomainError, ShapeError, SingularityError
from .fourier import SpectralField, apply_M, inner, integral
from .linop import (OperatorMatrix, SpectrumReport, build_operator, parity_bases, reflect,
                    spectrum_report)
from .wave import WaveProfile, build_profile, dA_dk, dc_dk, dN_dk, profile_elliptic, wave_params

COND_MAX = 1e12
# |c| below this is treated as the standing wave c = 0
C_ZERO = 1e-6


class Verdict(str, enum.Enum):
    STABLE = "LinearlyStable"
    UNSTABLE = "LinearlyUnstable"
    INCONCLUSIVE = "Inconclusive"


def even_basis(N: int) -> np.ndarray:
    """Orthonormal basis (N x (N/2 + 1)) of grid vectors with v(-x) = v(x)."""
    return parity_bases(N)[0]


def solve_even(matrix: OperatorMatrix, rhs) -> np.ndarray:
    """Solve L h = rhs for even rhs inside the even subspace."""
    A = matrix.entries
    rhs = np.asarray(rhs, dtype=float)
    N = matrix.size
    if rhs.shape != (N,):
        raise ShapeError(f"rhs has shape {rhs.shape}, operator has {N} nodes")
    scale = np.linalg.norm(rhs)
    if np.linalg.norm(rhs - reflect(rhs)) > 1e-12 * max(scale, 1.0):
        raise DomainError("right-hand side is not even")
    P = even_basis(N)
    Ae = P.T @ A @ P
    cond = np.linalg.cond(Ae)
    if not cond < COND_MAX:
        raise SingularityError(f"even block is singular (condition {cond:.3e})")
    y = scipy.linalg.solve(Ae, P.T @ rhs, assume_a="sym")
    h = P @ y
    res = np.linalg.norm(A @ h - rhs)
    if res > 1e-10 * max(scale, 1e-300):
        raise SingularityError(f"even solve residual {res:.3e} too large")
    return h


def _closed_X(params) -> tuple[float, float, float]:
    """(dN/dk, dc/dk, dN/dc)."""
    dN = dN_dk(params)
    dc = dc_dk(params.L, params.delta, params.k)
    return dN, dc, dN / dc


def compute_I(profile: WaveProfile, N: int | None = None, *, derivs=None) -> tuple[float, float]:
    """I = <L^{-1} 1, 1> by an even solve and by L^2 / (c L + 2 dN/dc)."""
    p = profile.params
    op = build_operator(profile, N)
    one = np.ones(op.size)
    I_direct = inner(solve_even(op, one), one, p.L)
    _, _, X = _closed_X(p) if derivs is None else derivs
    I_closed = p.L ** 2 / (p.c * p.L + 2.0 * X)
    return I_direct, I_closed


@dataclass(frozen=True)
class DResult:
    D: np.ndarray
    detD_direct: float
    detD_closed: float
    D_closed: np.ndarray
    I_direct: float
    I_closed: float
    Linv_phi_one: float
    Linv_phi_phi: float
    identity_residual: float


def compute_D(profile: WaveProfile, N: int | None = None, *, derivs=None) -> DResult:
    """The 2x2 matrix D from solves and from the closed forms.

    Closed forms, with X = dN/dc:
        <L^{-1} phi, 1> = -L X / (c L + 2 X),
        <L^{-1} phi, phi> = -c L X / (2 c L + 4 X),
        det D = -X / (2 I).
    """
    p = profile.params
    op = build_operator(profile, N)
    phi = profile.samples if op.size == profile.grid.N else profile_elliptic(op.grid.x, p)
    one = np.ones(op.size)
    h1 = solve_even(op, one)
    hp = solve_even(op, phi)
    I = inner(h1, one, p.L)
    if abs(I) < 1e-14:
        raise SingularityError("I = <L^-1 1, 1> vanishes; D is undefined")
    pp, p1 = inner(hp, phi, p.L), inner(hp, one, p.L)
    D = np.array([[pp, p1], [p1, I]]) / I

    _, _, X = _closed_X(p) if derivs is None else derivs
    den = p.c * p.L + 2.0 * X
    I_c = p.L ** 2 / den
    p1_c = -p.L * X / den
    pp_c = -p.c * p.L * X / (2.0 * den)
    D_c = np.array([[pp_c, p1_c], [p1_c, I_c]]) / I_c
    # L 1 = c - 2 phi, so 1 = c L^{-1} 1 - 2 L^{-1} phi
    ident = float(np.max(np.abs(p.c * h1 - 2.0 * hp - one)))
    return DResult(D=D, detD_direct=float(np.linalg.det(D)), detD_closed=-X / (2.0 * I_c),
                   D_closed=D_c, I_direct=I, I_closed=I_c, Linv_phi_one=p1,
                   Linv_phi_phi=pp, identity_residual=ident)


@dataclass(frozen=True)
class KreinReport:
    I_direct: float
    I_closed: float
    D: np.ndarray
    detD_direct: float
    detD_closed: float
    n_L: int
    n_I: int
    n_D: int
    K_Ham: int | None
    p3_value: float
    verdict: Verdict
    reasons: tuple = ()
    extras: dict = dc_field(default_factory=dict)


def krein_verdict(spectrum: SpectrumReport, I: float, D, *, I_closed: float = math.nan,
                  detD_closed: float = math.nan, p3_value: float = math.nan,
                  c: float | None = None) -> KreinReport:
    """Assemble K_Ham = n(L) - n(I) - n(D) and the stability verdict.

    Any broken hypothesis (I = 0, D singular, kernel not one-dimensional,
    standing wave c = 0) gives Inconclusive together with the reasons.
    """
    D = np.asarray(D, dtype=float)
    reasons = []
    n_L = spectrum.n_neg
    n_I = 0 if I > 0 else 1
    dvals = np.linalg.eigvalsh(0.5 * (D + D.T))
    n_D = int(np.sum(dvals < 0))
    det = float(np.linalg.det(D))
    if not math.isfinite(I) or abs(I) < 1e-14:
        reasons.append("I = 0")
    if not math.isfinite(det) or abs(det) < 1e-12 * max(1.0, np.max(np.abs(D))) ** 2:
        reasons.append("D is singular")
    if spectrum.n_zero != 1:
        reasons.append(f"kernel of L has dimension {spectrum.n_zero}, expected 1")
    if c is not None and abs(c) < C_ZERO:
        reasons.append("c = 0: the index count is stated for c > 0 only")
    K = n_L - n_I - n_D
    if reasons:
        verdict = Verdict.INCONCLUSIVE
    elif K == 0:
        verdict = Verdict.STABLE
    elif K == 1:
        verdict = Verdict.UNSTABLE
    else:
        verdict = Verdict.INCONCLUSIVE
        reasons.append(f"K_Ham = {K} is outside {{0, 1}}")
    return KreinReport(I_direct=float(I), I_closed=I_closed, D=D, detD_direct=det,
                       detD_closed=detD_closed, n_L=n_L, n_I=n_I, n_D=n_D,
                       K_Ham=K, p3_value=p3_value, verdict=verdict, reasons=tuple(reasons))


@dataclass(frozen=True)
class P3Result:
    closed: float
    direct: float
    rel_gap: float
    field_residual: float


def _profile_dk(profile: WaveProfile, h: float = 1e-4) -> np.ndarray:
    """d phi / dk on the grid: Richardson-extrapolated central differences."""
    p = profile.params
    x = profile.grid.x

    def central(step):
        up = profile_elliptic(x, wave_params(p.L, p.delta, p.k + step))
        dn = profile_elliptic(x, wave_params(p.L, p.delta, p.k - step))
        return (up - dn) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def p3_check(profile: WaveProfile, N: int | None = None, h: float = 1e-4) -> P3Result:
    """<L dphi/dk, dphi/dk> directly and as -(1/2) c'(k) N'(k).

    Also checks the differentiated wave equation L dphi/dk = -c' phi - A'
    (relative max-norm residual).
    """
    if N is not None and N != profile.grid.N:
        profile = build_profile(profile.params, N)
    p = profile.params
    dc = dc_dk(p.L, p.delta, p.k)
    dN = dN_dk(p)
    closed = -0.5 * dc * dN
    g = SpectralField(profile.grid, _profile_dk(profile, h))
    Lg = apply_M(g, p.delta).samples + (p.c - 2.0 * profile.samples) * g.samples
    direct = inner(Lg, g.samples, p.L)
    target = -dc * profile.samples - dN / p.L
    resid = float(np.max(np.abs(Lg - target)) / np.max(np.abs(target)))
    return P3Result(closed=closed, direct=direct, rel_gap=abs(direct - closed) / abs(closed),
                    field_residual=resid)


def compute_Mk(field: SpectralField, profile: WaveProfile, dc: float | None = None,
               dA: float | None = None) -> float:
    """M_k(u) = c'(k) E_0(u) + A'(k) E_{-1}(u), E_0 = (1/2) int u^2, E_{-1} = int u."""
    p = profile.params
    dc = dc_dk(p.L, p.delta, p.k) if dc is None else dc
    dA = dA_dk(p) if dA is None else dA
    u = field.samples
    E0 = 0.5 * inner(u, u, field.grid.L)
    Em1 = integral(field)
    return dc * E0 + dA * Em1


def krein_report(profile: WaveProfile, N: int | None = None) -> KreinReport:
    """Run the whole pipeline: spectrum, I, D (both routes), P3, verdict."""
    p = profile.params
    derivs = _closed_X(p)
    spec = spectrum_report(profile, N)
    d = compute_D(profile, N, derivs=derivs)
    p3 = p3_check(profile, N)
    rep = krein_verdict(spec, d.I_direct, d.D, I_closed=d.I_closed, detD_closed=d.detD_closed,
                        p3_value=p3.closed, c=p.c)
    rep.extras.update({
        "dN_dk": derivs[0], "dc_dk": derivs[1], "dN_dc": derivs[2],
        "D_closed": d.D_closed, "identity_residual": d.identity_residual,
        "Linv_phi_one": d.Linv_phi_one, "p3_direct": p3.direct, "p3_rel_gap": p3.rel_gap,
        "p3_field_residual": p3.field_residual, "spectrum": spec,
    })
    return rep
