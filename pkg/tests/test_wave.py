import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import quad

from ilw import wave as wv
from ilw.errors import AdmissibilityError, DomainError
from ilw.fourier import Grid, SpectralField, theta
from ilw.specfun import complete_K

L, DELTA = math.pi, 1.0
K1_PUBLISHED = 0.944085037
K0_PUBLISHED = 0.795178532


def test_admissible_kmax_value():
    k1 = wv.admissible_kmax(L, DELTA)
    assert abs(k1 - K1_PUBLISHED) < 1e-6
    assert abs(wv.admissibility_ratio(L, DELTA, k1) - 1.0) < 1e-9


def test_admissibility_ratio_composed_from_K():
    v = wv.admissibility_ratio(L, DELTA, 0.5)
    assert v == pytest.approx(2 / math.pi * complete_K(0.5) / complete_K(math.sqrt(0.75)), rel=1e-14)
    assert v < 1


@pytest.mark.parametrize("L_,d", [(math.pi, 0.5), (2.0, 1.0), (10.0, 3.0)])
def test_kmax_is_root_for_other_geometries(L_, d):
    k1 = wv.admissible_kmax(L_, d)
    assert 0 < k1 < 1
    assert abs(wv.admissibility_ratio(L_, d, k1) - 1) < 1e-9


def test_speed_root_k0():
    k0 = wv.speed_root_k0(L, DELTA)
    assert abs(k0 - K0_PUBLISHED) < 1e-6
    assert abs(wv.wave_speed(L, DELTA, k0)) < 1e-8
    assert wv.wave_speed(L, DELTA, k0 - 0.05) < 0 < wv.wave_speed(L, DELTA, k0 + 0.05)


def test_speed_linear_limit():
    c = wv.wave_speed(L, DELTA, 1e-6)
    assert abs(c + 1.07462944) < 1e-5
    assert abs(c + theta(1, L, DELTA)) < 1e-5


def test_speed_grows_toward_k1():
    assert wv.wave_speed(L, DELTA, 0.93) > wv.wave_speed(L, DELTA, 0.9) > 0


@pytest.mark.parametrize("k", [0.0, -0.1, 0.95, 0.99, 1.0])
def test_inadmissible_modulus_rejected(k):
    with pytest.raises(AdmissibilityError):
        wv.wave_params(L, DELTA, k)


def test_params_invariants():
    p = wv.wave_params(L, DELTA, 0.5)
    assert 0 < p.m2 < 1
    assert p.A > 0
    assert p.a > 0
    assert p.a ** 2 + p.c * p.a - p.A == pytest.approx(0.0, abs=1e-14)
    assert p.sigma == pytest.approx(math.sqrt(p.c ** 2 + 4 * p.A), rel=1e-15)
    assert p.sigma == pytest.approx(p.c + 2 * p.a, rel=1e-14)
    assert p.A == pytest.approx(wv.norm_squared_series(p) / L, rel=1e-15)


def test_profile_even_mean_zero_trough(profiles):
    pr = profiles(0.5)
    p = pr.params
    assert wv.profile_elliptic(0.3, p) == pytest.approx(wv.profile_elliptic(-0.3, p), abs=1e-15)
    assert abs(np.mean(pr.samples)) < 1e-10
    assert abs(pr.field.coeffs[0]) < 1e-12
    assert int(np.argmin(pr.samples)) == pr.grid.N // 2


@pytest.mark.parametrize("k", [0.3, 0.5, 0.85, 0.9])
def test_two_profile_routes_agree(profiles, k):
    pr = profiles(k)
    diff = np.max(np.abs(pr.samples - wv.fourier_samples(pr.params, pr.grid.x)))
    assert diff < 1e-9


@pytest.mark.parametrize("k", [0.3, 0.5, 0.85])
def test_grid_transform_matches_analytic_coefficients(profiles, k):
    pr = profiles(k)
    m = min(20, pr.coeffs_analytic.size)
    c = np.real(pr.field.coeffs[:m])
    assert np.max(np.abs(c - pr.coeffs_analytic[:m])) < 1e-12


def test_fourier_coefficients_positive_and_geometric():
    p = wv.wave_params(L, DELTA, 0.5)
    c = wv.profile_fourier(p, 20)
    assert c[0] == 0
    assert np.all(c[1:] > 0)
    nu, mu = 2 * math.pi * DELTA / L, math.pi * p.Kp / p.K
    # log-linear decay: consecutive ratios tend to exp(nu - mu)
    ratios = c[6:] / c[5:-1]
    assert np.max(np.abs(ratios / math.exp(nu - mu) - 1)) < 1e-8


@pytest.mark.parametrize("k", [0.3, 0.5, 0.85])
def test_norm_squared_three_routes(k):
    p = wv.wave_params(L, DELTA, k)
    s = wv.norm_squared_series(p)
    assert s > 0
    assert wv.norm_squared_closed(p) == pytest.approx(s, rel=1e-8)
    coef = wv.profile_fourier(p)
    assert 2 * L * np.sum(coef[1:] ** 2) == pytest.approx(s, rel=1e-12)
    q = quad(lambda x: float(wv.profile_elliptic(x, p)) ** 2, 0, L, epsabs=1e-13, epsrel=1e-13,
             limit=200)[0]
    assert abs(q - s) < 1e-9


def test_norm_squared_grid_quadrature():
    p = wv.wave_params(L, DELTA, 0.5)
    x = Grid(L, 512).x
    grid_q = L / 512 * np.sum(wv.profile_elliptic(x, p) ** 2)
    assert abs(grid_q - wv.norm_squared_series(p)) < 1e-9


@pytest.mark.parametrize("k", [0.2, 0.5, 0.85])
def test_dN_dk_positive_and_matches_differences(k):
    p = wv.wave_params(L, DELTA, k)
    d = wv.dN_dk(p)
    h = 1e-6
    fd = (wv.norm_squared_series(wv.wave_params(L, DELTA, k + h))
          - wv.norm_squared_series(wv.wave_params(L, DELTA, k - h))) / (2 * h)
    assert d > 0
    assert d == pytest.approx(fd, rel=1e-6)
    assert wv.dA_dk(p) == pytest.approx(d / L, rel=1e-15)


def test_period_ratio_decreasing():
    assert wv.dperiod_ratio_dk(wv.wave_params(L, DELTA, 0.5)) < 0


@pytest.mark.parametrize("k", [0.2, 0.5, 0.85])
def test_dc_dk_positive_and_stable(k):
    d = wv.dc_dk(L, DELTA, k)
    assert d > 0
    assert wv.dc_dk(L, DELTA, k, h=5e-6) == pytest.approx(d, rel=1e-7)


def test_dN_dc_positive_for_positive_speed():
    for k in (0.85, 0.9):
        p = wv.wave_params(L, DELTA, k)
        assert p.c > 0
        assert wv.dN_dk(p) / wv.dc_dk(L, DELTA, k) > 0


def test_dc_dk_rejects_endpoints():
    with pytest.raises(DomainError):
        wv.dc_dk(L, DELTA, 5e-5)
    with pytest.raises(DomainError):
        wv.dc_dk(L, DELTA, wv.admissible_kmax(L, DELTA) - 5e-5)


def test_monotonicity_scan():
    k1 = wv.admissible_kmax(L, DELTA)
    for k in np.linspace(0.01, k1 - 0.01, 50):
        p = wv.wave_params(L, DELTA, float(k))
        assert wv.dc_dk(L, DELTA, float(k)) > 0
        assert wv.dN_dk(p) > 0


@pytest.mark.parametrize("k", [0.3, 0.5, 0.85, 0.9])
def test_traveling_wave_residual(k):
    assert wv.residual_travkdv(wv.wave_params(L, DELTA, k), 256) < 1e-8


def test_residual_of_zero_function():
    p = dataclasses.replace(wv.wave_params(L, DELTA, 0.5), A=0.0)
    zero = SpectralField(Grid(L, 64), np.zeros(64))
    assert wv.residual_travkdv(p, 64, field=zero) == 0.0


def test_residual_sensitive_to_speed():
    p = wv.wave_params(L, DELTA, 0.5)
    bad = dataclasses.replace(p, c=p.c + 0.1)
    # the residual shifts by exactly -0.1 phi
    phi_max = np.max(np.abs(wv.build_profile(p, 256).samples))
    assert wv.residual_travkdv(bad, 256) == pytest.approx(0.1 * phi_max, abs=1e-8)


def test_other_geometry_residual():
    L_, d = 2.0, 0.4
    k1 = wv.admissible_kmax(L_, d)
    p = wv.wave_params(L_, d, 0.8 * k1)
    assert wv.residual_travkdv(p, 256) < 1e-8
