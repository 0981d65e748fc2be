import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tddstring.analysis import (
    Envelope, brillouin_energy_lossless, brillouin_lagrangian, brillouin_power, default_sigma,
    demodulate, measured_power, time_average,
)
from tddstring.errors import NotLossless, UnderSampled, WindowTooShort
from tddstring.susceptibility import Debye, Lorentz, Markov, PowerLaw, Zero

W = 2.0
T = np.arange(0, 200, 0.01)


def interior(t, margin=50.0):
    return (t > t[0] + margin) & (t < t[-1] - margin)


def test_demodulate_pure_carrier():
    env = demodulate(np.cos(W * T), W, T)
    sel = interior(T)
    assert np.max(np.abs(env.samples[sel, 0] - 1)) <= 1e-4
    assert env.valid


def test_demodulate_recovers_slow_envelope():
    a = np.exp(-0.5 * ((T - 100) / 25) ** 2)
    ph = 0.6
    env = demodulate(a * np.cos(W * T + ph), W, T)
    sel = interior(T)
    assert np.max(np.abs(env.samples[sel, 0] - a[sel] * np.exp(-1j * ph))) <= 1e-4
    np.testing.assert_allclose(env.reconstruct()[sel, 0], (a * np.cos(W * T + ph))[sel], atol=1e-4)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-np.pi, np.pi), st.floats(40.0, 80.0))
def test_demodulate_inverts_modulation(omega, phase, periods):
    # envelope band well inside the filter pass band
    width = periods / omega
    t = np.arange(0, 16 * width, 0.02)
    a = np.exp(-0.5 * ((t - 8 * width) / width) ** 2)
    env = demodulate(a * np.cos(omega * t + phase), omega, t)
    sel = np.abs(t - 8 * width) < 4 * width
    # 60 dB = 1e-3 of the peak
    assert np.max(np.abs(env.samples[sel, 0] - a[sel] * np.exp(-1j * phase))) <= 1e-3


def test_demodulate_rejects_broadband():
    noise = np.random.default_rng(0).standard_normal(len(T))
    with pytest.raises(UnderSampled):
        demodulate(noise, 50.0, T)
    env = demodulate(noise, 2.0, T)
    assert not env.valid


def test_time_average_basic_cases():
    sig = np.full(len(T), 3.5)
    avg, valid = time_average(sig, 10 / W, T, W)
    assert np.max(np.abs(avg[valid] - 3.5)) <= 1e-12
    ramp = 0.3 * T - 2
    avg, valid = time_average(ramp, 10 / W, T, W)
    assert np.max(np.abs(avg[valid] - ramp[valid])) <= 1e-9
    assert not valid[0] and not valid[-1]


def test_time_average_ripple_suppression():
    avg, valid = time_average(np.cos(2 * W * T), 20 / W, T, W)
    assert np.max(np.abs(avg[valid])) <= 1e-6
    avg, valid = time_average(np.cos(2 * W * T), 20 / W, T, W, kind="hann")
    assert np.max(np.abs(avg[valid])) <= 1e-2


def test_time_average_rejects_short_windows():
    with pytest.raises(WindowTooShort):
        time_average(np.ones(len(T)), 1 / W, T, W)
    with pytest.raises(WindowTooShort):
        time_average(np.ones(50), 10 / W, T[:50], W)


def test_default_sigma_and_measured_power():
    assert default_sigma(0.7, 0.0625) == pytest.approx(2 / 0.7)
    np.testing.assert_allclose(measured_power(T, T**2)[1:-1], 2 * T[1:-1], rtol=1e-9)


def make_env(f0, omega=W):
    t = np.arange(len(f0)) * 0.05
    return Envelope(carrier=omega, t=t, samples=np.atleast_2d(f0.T).T.astype(complex), bandwidth=0.01)


def test_power_prediction_trivial_and_lossless():
    z = make_env(np.zeros(100))
    pred = brillouin_power(z, Lorentz(1.0, 1.0, 0.1), 0.5)
    assert not np.any(pred.full) and not np.any(pred.leading)
    # lossless at ω: only the total-derivative term survives
    f0 = np.exp(-0.5 * ((np.arange(400) * 0.05 - 10) / 2) ** 2)
    env = make_env(f0)
    model = Lorentz(1.0, 2.0, 0.0)
    pred = brillouin_power(env, model, 0.5)
    assert np.max(np.abs(pred.leading)) == 0.0
    weight = model.dz_z_chi_hat(0.5)[0, 0].real
    expect = 0.25 * np.gradient(weight * f0**2, env.t)
    np.testing.assert_allclose(pred.full, expect, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 5.0))
def test_leading_term_nonnegative(seed, omega):
    rng = np.random.default_rng(seed)
    f0 = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    env = Envelope(carrier=omega, t=np.arange(20.0), samples=f0, bandwidth=0.0)
    for model in (Debye([1.0, 0.5], 1.0), Lorentz(np.array([[1.0, 0.2], [0.2, 0.5]]), 1.3, 0.2),
                  Markov([0.2, 0.0]), PowerLaw(0.2, [1.0, 1.0])):
        lead = brillouin_power(env, model, omega).leading
        assert np.all(lead >= -1e-9 * np.sum(np.abs(f0) ** 2, axis=1))


def test_lossless_energy_cases():
    f0 = np.linspace(0.5, 1.5, 50)
    env = make_env(f0)
    e = brillouin_energy_lossless(env, Zero(), 0.7)
    np.testing.assert_allclose(e, 0.25 * f0**2, rtol=1e-15)
    with pytest.raises(NotLossless):
        brillouin_energy_lossless(env, Lorentz(1.0, 0.7, 0.1), 0.7)


def test_lagrangian_cases():
    env = make_env(np.linspace(0.5, 1.5, 50))
    assert not np.any(brillouin_lagrangian(env, Zero(), 0.7))
    assert np.max(np.abs(brillouin_lagrangian(env, Markov(0.3), 0.7))) <= 1e-16
    chi = Lorentz(1.0, 2.0, 0.0).chi_hat(0.7)[0, 0].real
    np.testing.assert_allclose(brillouin_lagrangian(env, Lorentz(1.0, 2.0, 0.0), 0.7),
                               -0.25 * chi * np.linspace(0.5, 1.5, 50) ** 2)
