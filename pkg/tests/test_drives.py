import numpy as np
import pytest

from tddstring.drives import carrier_width, gaussian_envelope, gaussian_pulse, modulated_carrier, zero_drive


def test_envelope_support_and_continuity():
    t = np.linspace(0, 40, 4001)
    e = gaussian_envelope(t, 20.0, 2.0)
    assert e.max() == pytest.approx(1.0)
    assert np.all(e[np.abs(t - 20) > 12] == 0)
    assert np.max(np.abs(np.diff(e))) < 0.01


def test_pulse_and_carrier():
    d = gaussian_pulse(12.0, 2.0, [1.0, 0.0])
    assert d.support == (0.0, 24.0)
    np.testing.assert_allclose(d(12.0), [1.0, 0.0])
    assert d(np.array([0.0, 30.0])).shape == (2, 2) and not np.any(d(30.0))
    c = modulated_carrier(2.0, 10.0, 1.0, [2.0])
    assert c(10.0)[0] == pytest.approx(2 * np.cos(20.0))
    with pytest.raises(ValueError):
        gaussian_pulse(1.0, 2.0, [1.0])
    assert not np.any(zero_drive(3)(np.arange(5.0)))
    assert carrier_width(0.5, 0.02) == pytest.approx(100.0)
