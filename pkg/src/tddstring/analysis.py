"""Diagnostics for almost-monochromatic signals.

A real signal is written as Re{e^{-iωt} f₀(t)} with a slowly varying complex
envelope f₀.  The predictors below take that envelope and a susceptibility
model and return time series to compare with averaged simulation output.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, firwin, kaiserord

from .errors import NotLossless, UnderSampled, WindowTooShort

MIN_SAMPLES_PER_PERIOD = 20
STOPBAND_DB = 100.0
VALID_DELTA = 0.2
POWER_FRACTION = 0.99


@dataclass(eq=False)
class Envelope:
    carrier: float
    t: np.ndarray
    samples: np.ndarray
    bandwidth: float

    @property
    def delta(self):
        return self.bandwidth / self.carrier

    @property
    def valid(self):
        return self.delta < VALID_DELTA

    @property
    def dt(self):
        return float(self.t[1] - self.t[0])

    def reconstruct(self):
        """Re{e^{-iωt} f₀(t)}."""
        ph = np.exp(-1j * self.carrier * self.t)
        return np.real(ph[:, None] * self.samples)


def _lowpass_taps(cut, dt):
    nyq = np.pi / dt
    width = cut / nyq
    numtaps, beta = kaiserord(STOPBAND_DB, width)
    numtaps |= 1  # odd length: integer group delay, so centring is exact
    return firwin(numtaps, cut / nyq, window=("kaiser", beta))


def _bandwidth(env, dt):
    """Half-width of the band around 0 holding 99% of the envelope power."""
    spec = np.fft.fft(env, axis=0)
    power = np.sum(np.abs(spec) ** 2, axis=1)
    freq = np.abs(2 * np.pi * np.fft.fftfreq(len(env), d=dt))
    order = np.argsort(freq, kind="stable")
    cum = np.cumsum(power[order])
    if cum[-1] == 0:
        return 0.0
    idx = np.searchsorted(cum, POWER_FRACTION * cum[-1])
    return float(freq[order][min(idx, len(order) - 1)])


def demodulate(signal, omega, t, lowpass_cut=None):
    """Complex envelope f₀ = 2·lowpass(e^{iωt}·signal).

    The low-pass is a linear-phase Kaiser FIR applied centred, so it has no
    phase lag; samples outside the record are taken as zero.
    """
    sig = np.asarray(signal, dtype=float)
    squeeze = sig.ndim == 1
    if squeeze:
        sig = sig[:, None]
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    if not omega > 0:
        raise ValueError("carrier frequency must be positive")
    if 2 * np.pi / (omega * dt) < MIN_SAMPLES_PER_PERIOD:
        raise UnderSampled(
            f"{2 * np.pi / (omega * dt):.1f} samples per period, need {MIN_SAMPLES_PER_PERIOD}"
        )
    cut = omega / 4 if lowpass_cut is None else lowpass_cut
    taps = _lowpass_taps(cut, dt)
    mixed = np.exp(1j * omega * t)[:, None] * sig
    env = 2 * fftconvolve(mixed, taps[:, None], mode="same", axes=0)
    return Envelope(carrier=float(omega), t=t, samples=env, bandwidth=_bandwidth(env, dt))


def _kernel(sigma, dt, kind):
    if kind == "gaussian":
        half = int(np.ceil(8 * sigma / dt))
        x = dt * np.arange(-half, half + 1)
        k = np.exp(-0.5 * (x / sigma) ** 2)
    elif kind == "hann":
        # raised cosine with the same variance as the Gaussian of width σ
        a = sigma / np.sqrt(1 / 3 - 2 / np.pi**2)
        half = int(np.ceil(a / dt))
        x = dt * np.arange(-half, half + 1)
        k = np.where(np.abs(x) < a, 0.5 * (1 + np.cos(np.pi * x / a)), 0.0)
    else:
        raise ValueError(f"unknown averaging kernel {kind!r}")
    return k / k.sum()


def time_average(signal, sigma, t, omega, kind="gaussian", min_sigma_omega=10.0):
    """Convolve with a normalized symmetric kernel of width σ.

    Returns (averaged, valid) where ``valid`` is False wherever the kernel
    would reach past either end of the record.  Raises WindowTooShort when σ·ω < ``min_sigma_omega``
    or the record is shorter than the kernel.
    """
    sig = np.asarray(signal, dtype=float)
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    if sigma * omega < min_sigma_omega:
        raise WindowTooShort(f"σ·ω = {sigma * omega:.3g} < {min_sigma_omega}")
    k = _kernel(sigma, dt, kind)
    if len(k) > len(sig):
        raise WindowTooShort("record shorter than the averaging kernel")
    shape = (-1,) + (1,) * (sig.ndim - 1)
    avg = fftconvolve(sig, k.reshape(shape), mode="same", axes=0)
    edge = (len(k) // 2) * dt
    valid = (t - t[0] >= edge) & (t[-1] - t >= edge)
    return avg, valid


def default_sigma(omega, delta):
    """σ = δ^{-1/4}/ω, between the carrier period and the envelope scale."""
    return delta ** -0.25 / omega


def measured_power(t, energy):
    """Centred-difference time derivative of an energy series."""
    return np.gradient(np.asarray(energy, dtype=float), np.asarray(t, dtype=float))


def _form(a, mat, b):
    """⟨a, M b⟩ per time sample, Hermitian in the first slot."""
    return np.einsum("ti,ij,tj->t", np.conj(a), mat, b)


@dataclass(eq=False)
class BrillouinPrediction:
    t: np.ndarray
    full: np.ndarray
    leading: np.ndarray


def brillouin_power(envelope, model, omega):
    """Averaged power delivered to the medium, three-term and leading forms.

    ½{⟨f₀, ωImχ̂ f₀⟩ + Im⟨∂_t f₀, ∂_ω[ωImχ̂] f₀⟩ + ½∂_t⟨f₀, ∂_ω[ωReχ̂] f₀⟩}
    """
    f0 = envelope.samples
    t = envelope.t
    zc = model.z_chi_hat(omega)
    dzc = model.dz_z_chi_hat(omega)
    df0 = np.gradient(f0, t, axis=0)
    lead = np.real(_form(f0, zc.imag, f0))
    second = np.imag(_form(df0, dzc.imag, f0))
    third = 0.5 * np.gradient(np.real(_form(f0, dzc.real, f0)), t)
    return BrillouinPrediction(t=t, full=0.5 * (lead + second + third), leading=0.5 * lead)


def brillouin_energy_lossless(envelope, model, omega, pdc_tol=1e-9):
    """¼⟨f₀, ∂_ω[ω(1 + Reχ̂(ω))] f₀⟩, valid where χ̂(ω) is real."""
    chi = model.chi_hat(omega)
    if np.linalg.norm(chi.imag) > pdc_tol:
        raise NotLossless(f"|Im χ̂({omega})| = {np.linalg.norm(chi.imag):.3e}")
    m = chi.shape[0]
    weight = np.eye(m) + model.dz_z_chi_hat(omega).real
    f0 = envelope.samples
    return 0.25 * np.real(_form(f0, weight, f0))


def brillouin_lagrangian(envelope, model, omega):
    """-¼⟨f₀, Reχ̂(ω) f₀⟩."""
    f0 = envelope.samples
    return -0.25 * np.real(_form(f0, model.chi_hat(omega).real, f0))
