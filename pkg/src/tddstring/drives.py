"""Compactly supported external forces ρ(t)."""

from dataclasses import dataclass

import numpy as np

TRUNCATION_WIDTHS = 6.0


def gaussian_envelope(t, t0, width):
    """Unit-peak Gaussian lowered by its value at 6 widths and cut there.

    The result is continuous and vanishes identically outside
    [t0 - 6w, t0 + 6w].
    """
    x = (np.asarray(t, dtype=float) - t0) / width
    floor = np.exp(-0.5 * TRUNCATION_WIDTHS**2)
    env = (np.exp(-0.5 * x * x) - floor) / (1 - floor)
    return np.where(np.abs(x) <= TRUNCATION_WIDTHS, env, 0.0)


@dataclass(frozen=True, eq=False)
class Drive:
    """ρ(t) = amplitude · s(t) for a scalar time profile s."""

    amplitude: np.ndarray
    profile: object
    support: tuple

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        s = self.profile(t_arr)
        if t_arr.ndim == 0:
            return float(s) * self.amplitude
        return s[:, None] * self.amplitude[None, :]

    @property
    def dim(self):
        return len(self.amplitude)


def _amp(a):
    return np.atleast_1d(np.asarray(a, dtype=float))


def gaussian_pulse(t0, width, amplitude):
    if not width > 0:
        raise ValueError("pulse width must be positive")
    if t0 - TRUNCATION_WIDTHS * width < 0:
        raise ValueError("pulse must start at or after t = 0")
    half = TRUNCATION_WIDTHS * width
    return Drive(
        amplitude=_amp(amplitude),
        profile=lambda t: gaussian_envelope(t, t0, width),
        support=(t0 - half, t0 + half),
    )


def modulated_carrier(omega, t0, width, amplitude, phase=0.0):
    """Gaussian envelope times cos(ωt + phase)."""
    if not width > 0:
        raise ValueError("envelope width must be positive")
    if t0 - TRUNCATION_WIDTHS * width < 0:
        raise ValueError("envelope must start at or after t = 0")
    half = TRUNCATION_WIDTHS * width
    return Drive(
        amplitude=_amp(amplitude),
        profile=lambda t: gaussian_envelope(t, t0, width) * np.cos(omega * t + phase),
        support=(t0 - half, t0 + half),
    )


def zero_drive(dim):
    return Drive(amplitude=np.zeros(dim), profile=lambda t: np.zeros_like(t), support=(0.0, 0.0))


def carrier_width(omega, delta):
    """Envelope width whose spectral scale is δ·ω."""
    return 1.0 / (delta * omega)
