"""The fourteen acceptance checks, shared by the test suite and ``ilw verify-all``.

Each criterion function returns a list of :class:`Check` records; a
criterion passes when all of its checks pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import evolve as ev
from . import krein as kr
from . import linop as lo
from . import wave as wv
from .fourier import theta

L_REF, DELTA_REF = math.pi, 1.0
N_REF = 256
# Time step for the t = 50 runs.  At dt = 1e-3 the scheme's dt^4 phase error
# drives E_1 off by ~1e-4 over t = 50; 1.25e-4 brings it near 3e-9.
CONSERVATION_DT = 1.25e-4
CONSERVATION_T = 50.0
PERTURBATION_EPS = 1e-3


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value:.6g} tolerance={self.tolerance:.3g}"


def _below(name, value, tol):
    return Check(name, bool(value < tol), float(value), float(tol))


@lru_cache(maxsize=16)
def _profile(k: float, N: int = N_REF) -> wv.WaveProfile:
    return wv.make_profile(L_REF, DELTA_REF, k, N)


def c01_k1():
    k1 = wv.admissible_kmax(L_REF, DELTA_REF)
    return [_below(f"k1 = {k1:.12f} vs 0.944085037", abs(k1 - 0.944085037), 1e-6)]


def c02_k0():
    k0 = wv.speed_root_k0(L_REF, DELTA_REF)
    return [_below(f"k0 = {k0:.12f} vs 0.795178532", abs(k0 - 0.795178532), 1e-6)]


def c03_linear_limit():
    c = wv.wave_speed(L_REF, DELTA_REF, 1e-6)
    lin = -float(theta(1, L_REF, DELTA_REF))
    return [_below(f"c(1e-6) = {c:.12f} vs -1.07462944", abs(c + 1.07462944), 1e-5),
            _below("c(1e-6) vs -theta(1)", abs(c - lin), 1e-5)]


def c04_residual():
    out = []
    for k in (0.3, 0.5, 0.85, 0.9):
        r = wv.residual_travkdv(_profile(k).params, N_REF)
        out.append(_below(f"wave residual k={k}", r, 1e-8))
    return out


def c05_two_routes():
    out = []
    for k in (0.3, 0.5, 0.85, 0.9):
        pr = _profile(k)
        d = np.max(np.abs(pr.samples - wv.fourier_samples(pr.params, pr.grid.x)))
        out.append(_below(f"elliptic vs Fourier profile k={k}", d, 1e-9))
    return out


def c06_norm():
    p = _profile(0.5).params
    s = wv.norm_squared_series(p)
    c = wv.norm_squared_closed(p)
    q, _ = quad(lambda x: float(wv.profile_elliptic(x, p)) ** 2, 0.0, p.L,
                epsabs=1e-14, epsrel=1e-14, limit=200)
    return [_below("N(0.5) series vs closed form (rel)", abs(s - c) / abs(s), 1e-8),
            _below("N(0.5) series vs quadrature", abs(s - q), 1e-9)]


def c07_spectrum():
    out = []
    for k in (0.5, 0.85):
        pr = _profile(k)
        rep = lo.spectrum_report(pr, N_REF)
        coarse = lo.spectrum_report(pr, 128)
        out += [Check(f"k={k} one negative eigenvalue", rep.n_neg == 1, rep.n_neg, 1),
                Check(f"k={k} one zero eigenvalue", rep.n_zero == 1, rep.n_zero, 1),
                _below(f"k={k} 1 - cos(kernel, phi')", 1.0 - rep.kernel_alignment, 1e-8),
                _below(f"k={k} kernel residual", rep.kernel_residual, 1e-6),
                _below(f"k={k} lowest-10 drift N=128->256", coarse.truncation_drift, 1e-8)]
    return out


def c08_pf2():
    out = []
    for k in (0.3, 0.5, 0.85):
        rep = lo.pf2_check_profile(_profile(k), M=40)
        out.append(Check(f"k={k} PF(2) minors, M=40 (min strict {rep.min_strict_minor:.3g})",
                         rep.passed, rep.n_violations, 0))
    k1 = wv.admissible_kmax(L_REF, DELTA_REF)
    worst_trough, worst_v = math.inf, math.inf
    for k in np.linspace(0.01, k1 - 0.01, 50):
        p = wv.wave_params(L_REF, DELTA_REF, float(k))
        trough = -float(wv.profile_elliptic(0.5 * p.L, p))
        v = wv.admissibility_ratio(p.L, p.delta, p.k)
        worst_trough = min(worst_trough, p.a - trough)
        worst_v = min(worst_v, p.a - 2.0 * math.pi / p.L * v)
    out.append(Check("min over 50 k of a + phi(L/2)", worst_trough > 0, worst_trough, 0.0))
    out.append(Check("min over 50 k of a - (2 pi/L) v", worst_v > 0, worst_v, 0.0))
    return out


def c09_krein():
    out = []
    for k in (0.85, 0.9):
        rep = kr.krein_report(_profile(k))
        if k == 0.85:
            out += [Check("I > 0", rep.I_direct > 0, rep.I_direct, 0.0),
                    _below("I direct vs closed (rel)",
                           abs(rep.I_direct - rep.I_closed) / abs(rep.I_closed), 1e-5),
                    Check("det D < 0", rep.detD_direct < 0, rep.detD_direct, 0.0),
                    _below("det D direct vs closed (rel)",
                           abs(rep.detD_direct - rep.detD_closed) / abs(rep.detD_closed), 1e-4),
                    Check("K_Ham = 1 - 0 - 1 = 0",
                          (rep.n_L, rep.n_I, rep.n_D, rep.K_Ham) == (1, 0, 1, 0), rep.K_Ham, 0)]
        out.append(Check(f"k={k} verdict {rep.verdict.value}", rep.verdict == kr.Verdict.STABLE,
                         float(rep.verdict == kr.Verdict.STABLE), 1))
    return out


def c10_p3():
    out = []
    for k in (0.5, 0.85):
        r = kr.p3_check(_profile(k))
        out += [Check(f"k={k} <L phi_k, phi_k> < 0", r.direct < 0, r.direct, 0.0),
                _below(f"k={k} P3 direct vs -c'N'/2 (rel)", r.rel_gap, 1e-4)]
    return out


def _propagation_error(dt: float, T: float = 0.5) -> float:
    pr = _profile(0.85)
    cfg = ev.SimConfig(pr.grid, DELTA_REF, dt, T, record_every=10 ** 9)
    final = ev.simulate(pr.field, cfg)[-1]
    exact = wv.profile_elliptic(pr.grid.x - pr.params.c * T, pr.params)
    return float(np.max(np.abs(final.field.samples - exact)))


def c11_exactness():
    e1 = _propagation_error(1e-3)
    e2 = _propagation_error(5e-4)
    ratio = e1 / e2
    return [_below("max error at T=0.5, dt=1e-3", e1, 1e-6),
            Check(f"error ratio dt 1e-3 -> 5e-4 = {ratio:.2f}", abs(ratio - 16.0) <= 3.0, ratio, 3.0)]


@lru_cache(maxsize=1)
def long_run() -> ev.ExperimentReport:
    """eps = 1e-3 perturbation of the k = 0.85 wave, t in [0, 50]; shared by criteria 12 and 13."""
    pr = _profile(0.85)
    cfg = ev.SimConfig(pr.grid, DELTA_REF, CONSERVATION_DT, CONSERVATION_T,
                       record_every=int(round(0.1 / CONSERVATION_DT)))
    return ev.stability_experiment(pr, ev.Perturbation(PERTURBATION_EPS, mode=2), cfg)


def c12_conservation():
    r = long_run()
    return [_below("E_0 relative drift", r.drift_E0, 1e-8),
            _below("E_1 relative drift", r.drift_E1, 1e-8),
            _below("E_-1 absolute drift", r.drift_Em1, 1e-12)]


def c13_orbital():
    r = long_run()
    return [Check("sup rho_W <= 10 eps", r.sup_rho <= 10 * PERTURBATION_EPS, r.sup_rho,
                  10 * PERTURBATION_EPS),
            _below("M_k relative drift", r.drift_Mk, 1e-8)]


def c14_bo_limit():
    L, d = math.pi, 50.0
    n = np.arange(1, 9)
    err = float(np.max(np.abs(theta(n, L, d) - (2 * math.pi / L * n - 1 / d))))
    err_neg = float(np.max(np.abs(theta(-n, L, d) - (2 * math.pi / L * n - 1 / d))))
    return [_below("|theta(n) - (2|n| - 1/50)|, 1 <= |n| <= 8", max(err, err_neg), 1e-10)]


CRITERIA = (
    (1, "admissible modulus k1", c01_k1),
    (2, "standing-wave modulus k0", c02_k0),
    (3, "linear limit of the speed", c03_linear_limit),
    (4, "traveling-wave residual", c04_residual),
    (5, "elliptic vs Fourier profile", c05_two_routes),
    (6, "L2 norm: series, closed form, quadrature", c06_norm),
    (7, "spectrum of the linearised operator", c07_spectrum),
    (8, "PF(2) and Galilean preconditions", c08_pf2),
    (9, "Krein index and verdict", c09_krein),
    (10, "condition P3", c10_p3),
    (11, "propagation accuracy and order", c11_exactness),
    (12, "conservation over t in [0, 50]", c12_conservation),
    (13, "orbital stability experiment", c13_orbital),
    (14, "Benjamin-Ono limit of the symbol", c14_bo_limit),
)


def run_criterion(number: int) -> tuple[bool, list[Check]]:
    for num, _, fn in CRITERIA:
        if num == number:
            checks = fn()
            return all(c.passed for c in checks), checks
    raise KeyError(number)


def run_all(log=print) -> list[tuple[int, str, bool, list[Check]]]:
    results = []
    for num, title, fn in CRITERIA:
        checks = fn()
        ok = all(c.passed for c in checks)
        results.append((num, title, ok, checks))
        if log:
            log(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title}")
            for c in checks:
                log("        " + c.line())
    return results
