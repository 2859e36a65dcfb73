"""Elliptic special functions for real modulus 0 <= k < 1.

Complete integrals come from the arithmetic-geometric mean, the Jacobi
functions from the descending Landen (AGM phase) recursion, and the
incomplete integrals from Carlson's symmetric forms R_F and R_D.

Every function accepts either a float ``k`` or an :class:`EllipticModulus`.
Passing the modulus object keeps the complement k' exact when k is close
to 1, where forming sqrt(1 - k**2) loses digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, UnboundedValueError

_AGM_MAXITER = 64
_CARLSON_MAXITER = 100
# Moduli with k' below this make the reduction period 4K so large that
# sn/cn/dn/Z lose all relative accuracy.
DEGENERATE_KPRIME = 1e-10


@dataclass(frozen=True)
class EllipticModulus:
    """A modulus k together with its complement k' = sqrt(1 - k^2)."""

    k: float
    kprime: float

    @classmethod
    def of(cls, k: float) -> "EllipticModulus":
        k = float(k)
        if not (0.0 <= k <= 1.0):
            raise DomainError(f"modulus must lie in [0, 1], got {k!r}")
        return cls(k, math.sqrt((1.0 - k) * (1.0 + k)))

    def complement(self) -> "EllipticModulus":
        return EllipticModulus(self.kprime, self.k)


def _modulus(k) -> EllipticModulus:
    if isinstance(k, EllipticModulus):
        return k
    if isinstance(k, (float, int, np.floating, np.integer)) and math.isnan(k):
        raise DomainError("modulus is NaN")
    return EllipticModulus.of(k)


def _agm_sequence(a: float, b: float):
    """Return lists (a_n, c_n) of the AGM, with c_0 = sqrt(a^2 - b^2)."""
    aa, cc = [a], [math.sqrt(max(a * a - b * b, 0.0))]
    for _ in range(_AGM_MAXITER):
        if abs(a - b) <= 4e-16 * a:
            return aa, cc
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        aa.append(a)
        cc.append(c)
    raise NumericalError("AGM did not converge")


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two non-negative numbers."""
    if a < 0 or b < 0:
        raise DomainError("agm needs non-negative arguments")
    if a == 0 or b == 0:
        return 0.0
    if a < b:
        a, b = b, a
    return _agm_sequence(a, b)[0][-1]


def complete_K(k) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k'))."""
    m = _modulus(k)
    if m.kprime == 0.0:
        raise UnboundedValueError("K(k) is infinite at k = 1")
    return math.pi / (2.0 * agm(1.0, m.kprime))


def complete_E(k) -> float:
    """Complete elliptic integral of the second kind.

    Uses E = K (1 - sum_n 2^(n-1) c_n^2) over the AGM(1, k') sequence.
    """
    m = _modulus(k)
    if m.kprime == 0.0:
        raise DomainError("E(k) is evaluated for 0 <= k < 1 only")
    aa, cc = _agm_sequence(1.0, m.kprime)
    cc[0] = m.k
    s = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(cc))
    return math.pi / (2.0 * aa[-1]) * (1.0 - s)


def complete_KE(k) -> tuple[float, float]:
    """Both complete integrals from one AGM pass."""
    m = _modulus(k)
    if m.kprime == 0.0:
        raise UnboundedValueError("K(k) is infinite at k = 1")
    aa, cc = _agm_sequence(1.0, m.kprime)
    cc[0] = m.k
    K = math.pi / (2.0 * aa[-1])
    s = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(cc))
    return K, K * (1.0 - s)


def nome(k) -> float:
    """Jacobi nome q = exp(-pi K(k') / K(k))."""
    m = _modulus(k)
    if m.k == 0.0:
        return 0.0
    return math.exp(-math.pi * complete_K(m.complement()) / complete_K(m))


# -- Carlson symmetric integrals ---------------------------------------------

def carlson_rf(x, y, z):
    """Carlson's R_F(x, y, z) for non-negative arguments, at most one zero."""
    x, y, z = (np.array(v, dtype=float) for v in np.broadcast_arrays(x, y, z))
    if np.any(x < 0) or np.any(y < 0) or np.any(z < 0):
        raise DomainError("R_F needs non-negative arguments")
    for _ in range(_CARLSON_MAXITER):
        ave = (x + y + z) / 3.0
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if np.all(np.maximum(np.maximum(abs(dx), abs(dy)), abs(dz)) < 0.0025):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    else:
        raise NumericalError("R_F did not converge")
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    out = (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / np.sqrt(ave)
    return out[()] if out.ndim == 0 else out


def carlson_rd(x, y, z):
    """Carlson's R_D(x, y, z); x, y >= 0 (not both zero), z > 0."""
    x, y, z = (np.array(v, dtype=float) for v in np.broadcast_arrays(x, y, z))
    if np.any(x < 0) or np.any(y < 0) or np.any(z <= 0):
        raise DomainError("R_D needs x, y >= 0 and z > 0")
    acc = np.zeros_like(x)
    fac = 1.0
    for _ in range(_CARLSON_MAXITER):
        ave = 0.2 * (x + y + 3.0 * z)
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if np.all(np.maximum(np.maximum(abs(dx), abs(dy)), abs(dz)) < 0.0015):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        acc = acc + fac / (sz * (z + lam))
        fac *= 0.25
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    else:
        raise NumericalError("R_D did not converge")
    c1, c2, c3, c4 = 3.0 / 14.0, 1.0 / 6.0, 9.0 / 22.0, 3.0 / 26.0
    c5, c6 = 0.25 * c3, 1.5 * c4
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + 2.0 * ec
    series = 1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))
    out = 3.0 * acc + fac * series / (ave * np.sqrt(ave))
    return out[()] if out.ndim == 0 else out


def _check_amplitude(psi):
    psi = np.asarray(psi, dtype=float)
    if np.any(~np.isfinite(psi)) or np.any(abs(psi) > 0.5 * math.pi + 1e-15):
        raise DomainError("incomplete integrals take |psi| <= pi/2")
    return psi


def incomplete_F(psi, k):
    """Incomplete integral of the first kind F(psi, k), |psi| <= pi/2."""
    m = _modulus(k)
    psi = _check_amplitude(psi)
    s, c = np.sin(psi), np.cos(psi)
    return s * carlson_rf(c * c, c * c + (m.kprime * s) ** 2, 1.0)


def incomplete_E(psi, k):
    """Incomplete integral of the second kind E(psi, k), |psi| <= pi/2."""
    m = _modulus(k)
    psi = _check_amplitude(psi)
    s, c = np.sin(psi), np.cos(psi)
    x, y = c * c, c * c + (m.kprime * s) ** 2
    return s * carlson_rf(x, y, 1.0) - (m.k ** 2) * s ** 3 / 3.0 * carlson_rd(x, y, 1.0)


# -- Jacobi functions ---------------------------------------------------------

def _nondegenerate(k) -> EllipticModulus:
    m = _modulus(k)
    if m.kprime < DEGENERATE_KPRIME:
        raise DomainError(f"complementary modulus {m.kprime:.3g} is below {DEGENERATE_KPRIME:g}")
    return m


def _amplitude(u: np.ndarray, m: EllipticModulus, K: float):
    """Amplitude am(u) by the descending Landen recursion, after reducing u mod 4K."""
    turns = np.round(u / (4.0 * K))
    ur = u - 4.0 * K * turns
    aa, cc = _agm_sequence(1.0, m.kprime)
    cc[0] = m.k
    nlev = len(aa) - 1
    phi = (2.0 ** nlev) * aa[-1] * ur
    for n in range(nlev, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(cc[n] / aa[n] * np.sin(phi), -1.0, 1.0)))
    return phi + 2.0 * np.pi * turns


def jacobi_amplitude(u, k, K: float | None = None):
    """Jacobi amplitude am(u, k), continuous and increasing in u."""
    m = _nondegenerate(k)
    K = complete_K(m) if K is None else K
    u = np.asarray(u, dtype=float)
    phi0 = _amplitude(u, m, K)
    return phi0[()] if phi0.ndim == 0 else phi0


def jacobi_sn_cn_dn(u, k, K: float | None = None):
    """Jacobi elliptic functions (sn, cn, dn) for real argument.

    ``K`` may be supplied to skip recomputing the quarter period.
    """
    m = _nondegenerate(k)
    K = complete_K(m) if K is None else K
    u = np.asarray(u, dtype=float)
    phi0 = _amplitude(u, m, K)
    sn, cn = np.sin(phi0), np.cos(phi0)
    # 1 - k^2 sn^2 rewritten without cancellation for k near 1
    dn = np.sqrt(cn * cn + (m.kprime * sn) ** 2)
    if u.ndim == 0:
        return sn[()], cn[()], dn[()]
    return sn, cn, dn


def jacobi_zeta(u, k, K: float | None = None, E: float | None = None):
    """Jacobi zeta Z(u, k) = E(am u, k) - (E/K) u, which is odd and 2K-periodic."""
    m = _nondegenerate(k)
    if K is None or E is None:
        K, E = complete_KE(m)
    u = np.asarray(u, dtype=float)
    ur = u - 2.0 * K * np.round(u / (2.0 * K))
    sign = np.sign(ur)
    ua = np.abs(ur)
    phi = _amplitude(ua, m, K)
    phi = np.minimum(phi, 0.5 * np.pi)
    z = sign * (incomplete_E(phi, m) - (E / K) * ua)
    return z[()] if np.ndim(z) == 0 else z


def heuman_lambda(psi, k):
    """Heuman's Lambda_0(psi, k) = (2/pi)[E F(psi,k') + K E(psi,k') - K F(psi,k')]."""
    m = _modulus(k)
    K, E = complete_KE(m)
    mc = m.complement()
    F1 = incomplete_F(psi, mc)
    E1 = incomplete_E(psi, mc)
    return 2.0 / math.pi * (E * F1 + K * E1 - K * F1)
