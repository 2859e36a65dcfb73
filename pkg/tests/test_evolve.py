import math

import numpy as np
import pytest

from ilw import evolve as ev
from ilw import wave as wv
from ilw.errors import BlowUpError, DomainError, ShapeError
from ilw.fourier import Grid, SpectralField, derivative, theta, w_norm

L, DELTA = math.pi, 1.0


def shifted(profile, s):
    """phi(. + s) by exact evaluation."""
    return SpectralField(profile.grid, wv.profile_elliptic(profile.grid.x + s, profile.params))


def test_config_validation():
    g = Grid(L, 64)
    with pytest.raises(DomainError):
        ev.SimConfig(g, DELTA, 0.0, 1.0)
    with pytest.raises(DomainError):
        ev.SimConfig(g, DELTA, 1e-3, 1.0, record_every=0)
    with pytest.raises(DomainError):
        ev.SimConfig(g, 0.0, 1e-3, 1.0)
    with pytest.raises(DomainError):
        ev.SimConfig(g, DELTA, 0.3, 1.0).n_steps
    assert ev.SimConfig(g, DELTA, 1e-3, 0.5).n_steps == 500


def test_rhs_constant_is_zero():
    g = Grid(L, 64)
    assert np.max(np.abs(ev.rhs(SpectralField(g, np.full(64, 2.5)), DELTA).samples)) < 1e-14


def test_rhs_of_wave_is_translation(profiles):
    pr = profiles(0.85)
    r = ev.rhs(pr.field, DELTA).samples
    assert np.max(np.abs(r + pr.params.c * derivative(pr.field).samples)) < 1e-8


def test_rhs_linear_part():
    g = Grid(L, 64)
    eps = 1e-9
    u = SpectralField(g, eps * np.cos(2 * g.x))
    # d/dx (theta u) for a single mode, quadratic term is O(eps^2)
    ref = -2 * eps * theta(1, L, DELTA) * np.sin(2 * g.x)
    assert np.max(np.abs(ev.rhs(u, DELTA).samples - ref)) < 1e-17


def test_phi_functions_against_closed_form():
    z = 1j * np.array([0.5, 3.0, 40.0])
    p1, p2, p3 = ev.phi_functions(z)
    e = np.exp(z)
    assert np.allclose(p1, (e - 1) / z, atol=1e-14)
    assert np.allclose(p2, (e - 1 - z) / z ** 2, atol=1e-14)
    assert np.allclose(p3, (e - 1 - z - z * z / 2) / z ** 3, atol=1e-14)
    q1, q2, q3 = ev.phi_functions(np.array([0j]))
    assert np.allclose([q1[0], q2[0], q3[0]], [1, 0.5, 1 / 6], atol=1e-15)


def test_zero_field_stays_zero():
    g = Grid(L, 64)
    cfg = ev.SimConfig(g, DELTA, 1e-2, 0.1)
    st = ev.simulate(SpectralField(g, np.zeros(64)), cfg)[-1]
    assert np.max(np.abs(st.field.samples)) == 0.0


def test_linear_run_phase_speed():
    g = Grid(L, 64)
    n = 3
    kap = 2 * np.pi * n / L
    dt, T = 1e-2, 1.0
    cfg = ev.SimConfig(g, DELTA, dt, T, nonlinear=False, record_every=1)
    states = ev.simulate(SpectralField(g, np.cos(kap * g.x)), cfg)
    th = theta(n, L, DELTA)
    for s in states:
        exact = np.cos(kap * (g.x + th * s.t))
        assert np.max(np.abs(s.field.samples - exact)) < 1e-13 * max(1, s.t / dt)


def test_step_matches_simulate(profiles):
    pr = profiles(0.5, 64)
    cfg = ev.SimConfig(pr.grid, DELTA, 1e-3, 1e-3)
    one = ev.step(ev.make_state(pr.field, DELTA), cfg)
    ref = ev.simulate(pr.field, cfg)[-1]
    assert one.t == pytest.approx(1e-3)
    assert np.max(np.abs(one.field.samples - ref.field.samples)) < 1e-15


def test_step_grid_mismatch(profiles):
    pr = profiles(0.5, 64)
    cfg = ev.SimConfig(Grid(L, 32), DELTA, 1e-3, 1e-3)
    with pytest.raises(ShapeError):
        ev.step(ev.make_state(pr.field, DELTA), cfg)


def test_traveling_wave_propagation(profiles):
    pr = profiles(0.85)
    T = 0.5
    cfg = ev.SimConfig(pr.grid, DELTA, 1e-3, T, record_every=10 ** 6)
    final = ev.simulate(pr.field, cfg)[-1]
    exact = wv.profile_elliptic(pr.grid.x - pr.params.c * T, pr.params)
    assert np.max(np.abs(final.field.samples - exact)) < 1e-6


def test_fourth_order_convergence(profiles):
    pr = profiles(0.85)
    T = 0.5
    exact = wv.profile_elliptic(pr.grid.x - pr.params.c * T, pr.params)
    errs = []
    for dt in (1e-3, 5e-4):
        cfg = ev.SimConfig(pr.grid, DELTA, dt, T, record_every=10 ** 6)
        errs.append(np.max(np.abs(ev.simulate(pr.field, cfg)[-1].field.samples - exact)))
    assert abs(errs[0] / errs[1] - 16) < 3


def test_cfl_guard_substeps():
    g = Grid(L, 64)
    u = SpectralField(g, 50 * np.cos(2 * g.x))
    cfg = ev.SimConfig(g, DELTA, 1e-2, 1e-2, advection_shift=0.0)
    integ = ev.Integrator(cfg, 0.0)
    integ.advance(integ.to_hat(u))
    assert integ.substeps_used >= math.ceil(1e-2 / (0.5 / (50 * 64 / L)))


def test_blow_up_reports_last_state():
    g = Grid(L, 16)
    u = np.zeros(16)
    u[3] = np.nan
    cfg = ev.SimConfig(g, DELTA, 1e-3, 1e-2, advection_shift=0.0)
    with pytest.raises(BlowUpError) as info:
        ev.simulate(SpectralField(g, u), cfg)
    assert info.value.last_state is not None
    assert info.value.last_state.t == 0.0


def test_conserved_values(profiles):
    g = Grid(L, 64)
    assert ev.conserved(SpectralField(g, np.zeros(64)), DELTA) == (0.0, 0.0, 0.0)
    pr = profiles(0.5)
    Em1, E0, E1 = ev.conserved(pr.field, DELTA)
    assert abs(Em1) < 1e-12
    assert E0 == pytest.approx(0.5 * wv.norm_squared_series(pr.params), rel=1e-12)
    # E_1 of a single mode: (1/2) theta L/2 - 0
    c = SpectralField(g, np.cos(2 * g.x))
    assert ev.conserved(c, DELTA)[2] == pytest.approx(0.25 * L * theta(1, L, DELTA), rel=1e-14)


def test_invariant_drift_is_time_step_error(profiles):
    """E_0, E_1 drift shrinks at least like dt^4; E_-1 is exact."""
    pr = profiles(0.85)
    u0 = SpectralField(pr.grid, pr.samples + ev.Perturbation(1e-3).field(pr.grid))
    drift = {}
    for dt in (1e-3, 5e-4):
        states = ev.simulate(u0, ev.SimConfig(pr.grid, DELTA, dt, 1.0, record_every=100))
        E0 = np.array([s.E_0 for s in states])
        E1 = np.array([s.E_1 for s in states])
        Em1 = np.array([s.E_minus1 for s in states])
        assert np.max(np.abs(Em1 - Em1[0])) < 1e-12
        drift[dt] = (np.max(np.abs(E0 / E0[0] - 1)), np.max(np.abs(E1 / E1[0] - 1)))
    assert drift[1e-3][0] / drift[5e-4][0] > 12
    assert drift[1e-3][1] / drift[5e-4][1] > 12
    assert drift[5e-4][0] < 1e-8


def test_orbit_distance_exact_member(profiles):
    pr = profiles(0.85)
    r, rho = ev.orbit_distance(shifted(pr, 0.37), pr)
    assert rho < 1e-10
    # u = phi(. + 0.37) is matched by the shift r = 0.37
    assert r == pytest.approx(0.37, abs=1e-9)


def test_orbit_distance_bounded_by_perturbation(profiles):
    pr = profiles(0.85)
    pert = SpectralField(pr.grid, 1e-3 * np.cos(4 * np.pi * pr.grid.x / L))
    u = SpectralField(pr.grid, pr.samples + pert.samples)
    r, rho = ev.orbit_distance(u, pr)
    assert 0 < rho <= w_norm(pert, DELTA) + 1e-15


@pytest.mark.parametrize("s", [0.0, 0.1, 1.0, 2.9])
def test_orbit_distance_translation_invariant(profiles, s):
    pr = profiles(0.5)
    g = pr.grid
    base = SpectralField(g, pr.samples + 1e-3 * np.cos(2 * g.x) + 2e-3 * np.sin(6 * g.x))
    kap = g.kappa.copy()
    kap[g.N // 2] = 0
    moved = SpectralField.from_coeffs(g, base.coeffs * np.exp(1j * kap * s))
    assert abs(ev.orbit_distance(moved, pr)[1] - ev.orbit_distance(base, pr)[1]) < 1e-10


def test_orbit_distance_grid_mismatch(profiles):
    with pytest.raises(ShapeError):
        ev.orbit_distance(profiles(0.5, 128).field, profiles(0.5))


def test_perturbation_mean_zero():
    g = Grid(L, 32)
    v = ev.Perturbation(0.1, samples=np.ones(32) + np.cos(2 * g.x)).field(g)
    assert abs(v.mean()) < 1e-16
    assert np.allclose(v, 0.1 * np.cos(2 * g.x))
    with pytest.raises(ShapeError):
        ev.Perturbation(0.1, samples=np.ones(5)).field(g)


def test_stability_experiment_short(profiles):
    pr = profiles(0.85)
    cfg = ev.SimConfig(pr.grid, DELTA, 1e-3, 2.0, record_every=100)
    r = ev.stability_experiment(pr, ev.Perturbation(1e-3), cfg)
    assert r.t.size == 21
    assert r.sup_rho <= 1e-2
    assert r.rho_W[0] > 0
    assert r.drift_Em1 < 1e-12


@pytest.mark.slow
def test_unperturbed_orbit_stays_on_orbit(profiles):
    pr = profiles(0.85)
    dt = 1.25e-4
    cfg = ev.SimConfig(pr.grid, DELTA, dt, 50.0, record_every=8000)
    r = ev.stability_experiment(pr, 0.0, cfg)
    assert r.sup_rho < 1e-6
