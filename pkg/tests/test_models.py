import numpy as np
import pytest
from scipy.integrate import solve_ivp

from tddstring.coupling import build_coupling
from tddstring.drives import gaussian_pulse, zero_drive
from tddstring.errors import GridTooCoarse
from tddstring.extension import build_extension, kinematical_stress, simulate, string_profile
from tddstring.models import (
    damped_oscillator, damped_reference, maxwell1d, nonlinear_oscillator, slab_lorentz,
)
from tddstring.reduced import solve_volterra


def test_reference_closed_forms():
    t = np.linspace(0, 20, 401)
    nu = np.sqrt(0.99)
    under = np.exp(-0.1 * t) * (np.cos(nu * t) + 0.1 / nu * np.sin(nu * t))
    np.testing.assert_allclose(damped_reference(1, 1, 0.2, t, 1.0), under, atol=1e-14)
    np.testing.assert_allclose(damped_reference(1, 1, 2.0, t, 1.0), (1 + t) * np.exp(-t), atol=1e-14)
    np.testing.assert_allclose(damped_reference(1, 4, 0.0, t, 1.0), np.cos(2 * t), atol=1e-13)


@pytest.mark.parametrize("m,k,g,v0", [(1.0, 1.0, 3.0, 0.5), (2.0, 0.5, 1.0, -1.0), (1.0, 1.0, 2.0, 0.3)])
def test_reference_against_ode(m, k, g, v0):
    t = np.linspace(0, 15, 301)
    sol = solve_ivp(lambda _, y: [y[1], -g * y[1] - k / m * y[0]], (0, 15), [1.2, v0],
                    t_eval=t, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(damped_reference(m, k, g, t, 1.2, v0), sol.y[0], atol=1e-9)


def test_lossless_period():
    osc = damped_oscillator(2.0, 0.5, 0.0)
    ext = build_extension(osc.spec, build_coupling(osc.model, 0.5, 10.0))
    period = 2 * np.pi * np.sqrt(2.0 / 0.5)
    traj = simulate(ext, zero_drive(2), period, period / 4000, u0=osc.initial_state(1.0))
    assert abs(traj.u[-1, 1] - 1.0) <= 1e-5


def test_lamb_short_horizon():
    osc = damped_oscillator(1.0, 1.0, 0.2)
    ext = build_extension(osc.spec, build_coupling(osc.model, 0.5, 10.0))
    T, dt = 10.0, 1e-3
    traj = simulate(ext, zero_drive(2), T, dt, u0=osc.initial_state(1.0), probes=(T,))
    assert np.max(np.abs(traj.u[:, 1] - osc.reference(traj.t))) <= 1e-5
    s = np.linspace(-T, T, 201)
    prof = string_profile(ext, traj, T, s)[:, 0]
    exact = osc.string_profile(osc.reference, T, s)
    assert np.max(np.abs(prof - exact)) <= 2 * (0.1 + dt)
    vol = solve_volterra(osc.spec, osc.model, zero_drive(2), dt, T, u0=osc.initial_state(1.0))
    assert np.max(np.abs(vol.u - traj.u)) <= 1e-10


def test_harmonic_potential_reduces_to_oscillator():
    k, g = 2.0, 0.3
    nl = nonlinear_oscillator(1.0, g, lambda q: 0.5 * k * q * q, lambda q: k * q)
    ext = build_extension(nl.spec, build_coupling(nl.model, 0.5, 10.0))
    traj = simulate(ext, zero_drive(2), 10.0, 1e-3, u0=[0.0, 1.0])
    ref = damped_reference(1.0, k, g, traj.t, 1.0)
    assert np.max(np.abs(traj.u[:, 1] - ref)) <= 1e-5


def test_quartic_lossless_energy():
    nl = nonlinear_oscillator(1.0, 0.0, lambda q: 0.25 * q**4, lambda q: q**3)
    ext = build_extension(nl.spec, build_coupling(nl.model, 0.5, 10.0))
    traj = simulate(ext, zero_drive(2), 30.0, 1e-2, u0=[0.0, 1.5])
    mech = 0.5 * traj.u[:, 0] ** 2 + 0.25 * traj.u[:, 1] ** 4
    assert np.max(np.abs(mech - mech[0])) / mech[0] <= 1e-8


def vacuum_run(eps, dx=0.025, T=8.0):
    x = np.arange(-15, 15 + dx / 2, dx)
    mx = maxwell1d(eps, 1.0, None, x, omega_max=6.0)
    ext = build_extension(mx.spec, build_coupling(mx.model, 1.0, 10.0))
    prof = np.exp(-0.5 * (x / 0.3) ** 2)
    drive = gaussian_pulse(1.5, 0.25, mx.current_amplitude(prof))
    dt = dx / 2
    traj = simulate(ext, drive, T, dt, probes=(4.0, 8.0, 6.0 - dt, 6.0, 6.0 + dt),
                    sample_every=int(round(1 / dt)))
    return mx, ext, drive, prof, traj


def peak_position(mx, ext, state):
    e = np.abs(mx.E(kinematical_stress(ext, state)))
    right = mx.x > 0
    return mx.x[right][np.argmax(e[right])]


@pytest.mark.parametrize("eps,speed", [(1.0, 1.0), (4.0, 0.5)])
def test_pulse_speed(eps, speed):
    mx, ext, *_, traj = vacuum_run(eps)
    p4 = peak_position(mx, ext, traj.probes[4.0])
    p8 = peak_position(mx, ext, traj.probes[8.0])
    assert abs((p8 - p4) / 4.0 - speed) <= 0.02


def test_vacuum_shape_preserved():
    mx, ext, *_, traj = vacuum_run(1.0)
    e4 = mx.E(kinematical_stress(ext, traj.probes[4.0]))
    e8 = mx.E(kinematical_stress(ext, traj.probes[8.0]))
    shift = int(round(4.0 / mx.dx))
    right = mx.x > 1.0
    idx = np.flatnonzero(right)[: -shift - 1]
    assert np.max(np.abs(e8[idx + shift] - e4[idx])) <= 0.02 * np.max(np.abs(e4))


def test_poynting_residual_second_order():
    res = []
    for dx in (0.025, 0.0125):
        mx, ext, drive, prof, traj = vacuum_run(4.0, dx=dx)
        dt = dx / 2
        j = prof * drive.profile(np.array(6.0))
        res.append(mx.poynting_residual(ext, traj.probes[6.0 - dt], traj.probes[6.0],
                                        traj.probes[6.0 + dt], dt, j))
    assert res[1] <= res[0] / 3 and res[1] <= 1e-2


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        maxwell1d(1.0, 1.0, None, np.arange(0, 10, 0.2), omega_max=3.0)


def slab_system():
    dx = 0.1
    x = np.arange(-10, 10 + dx / 2, dx)
    mx = maxwell1d(1.0, 1.0, slab_lorentz(x, 2.0, 5.0, 1.0, 1.0, 0.3), x)
    ext = build_extension(mx.spec, build_coupling(mx.model, 0.2, 20.0))
    return mx, ext


def test_gauge_invariance():
    mx, ext = slab_system()
    u0 = np.random.default_rng(2).standard_normal(2 * mx.n) * np.tile(np.exp(-0.5 * (mx.x / 2) ** 2), 2)
    shifted = u0.copy()
    shifted[mx.n:] += 0.75 * mx.alpha
    a = simulate(ext, zero_drive(2 * mx.n), 5.0, 0.05, u0=u0)
    b = simulate(ext, zero_drive(2 * mx.n), 5.0, 0.05, u0=shifted)
    scale = np.max(np.abs(a.f))
    assert np.max(np.abs(a.f - b.f)) <= 1e-13 * scale
    assert np.max(np.abs(a.ledger.H_total - b.ledger.H_total)) <= 1e-13 * a.ledger.H_total[0]
    np.testing.assert_allclose(mx.B(b.u), mx.B(a.u), atol=1e-13 * np.max(np.abs(mx.B(a.u))))
    np.testing.assert_allclose(mx.D(b.u), mx.D(a.u), atol=1e-13 * np.max(np.abs(mx.D(a.u))))


def test_zero_mode_conserved():
    mx, ext = slab_system()
    u0 = np.random.default_rng(4).standard_normal(2 * mx.n)
    traj = simulate(ext, zero_drive(2 * mx.n), 5.0, 0.05, u0=u0)
    total = traj.u[:, : mx.n].sum(axis=1)
    assert np.max(np.abs(total - total[0])) <= 1e-11 * np.max(np.abs(traj.u))
