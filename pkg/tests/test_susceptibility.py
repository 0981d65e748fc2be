from math import cos, gamma, pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from tddstring.errors import NegativeTime, PoleOnAxis, UndefinedAtZero
from tddstring.susceptibility import (
    Conjugated, Debye, Embedded, Lorentz, Markov, PowerLaw, Sum, Zero,
    check_pdc, chi_hat, chi_time, friction_function, odd_extension, phi_boundary,
)

MODELS = {
    "markov": Markov(0.5),
    "debye": Debye(1.0, 1.0),
    "lorentz": Lorentz(1.0, 1.0, 0.1),
    "power": PowerLaw(0.2),
    "matrix": Sum((Conjugated(Debye([1.0, 2.0], 0.5), np.array([[1.0, 0.3], [0.2, 1.0]])),
                   Lorentz(np.array([[1.0, 0.1], [0.1, 0.5]]), 2.0, 0.3))),
}


def test_time_domain_values():
    assert chi_time(Zero(), 1.0)[0, 0] == 0.0
    assert chi_time(PowerLaw(0.2, 1.0), 1.0)[0, 0] == 1.0
    assert chi_time(Markov(0.5), 3.0)[0, 0] == 0.5
    with pytest.raises(NegativeTime):
        chi_time(Debye(1.0, 1.0), -1.0)


def test_odd_extension():
    assert odd_extension(Debye(1.0, 1.0), -2.0)[0, 0] == pytest.approx(-np.exp(-2.0), rel=1e-15)
    assert odd_extension(Zero(), -1.0)[0, 0] == 0.0
    assert odd_extension(PowerLaw(0.2), -1.0)[0, 0] == pytest.approx(-1.0)
    with pytest.raises(UndefinedAtZero):
        odd_extension(Markov(0.5), 0.0)


def test_transforms_closed_forms():
    assert chi_hat(Markov(0.5), 1j)[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert chi_hat(Zero(), 0.3 + 2j)[0, 0] == 0
    assert chi_hat(Debye(1.0, 1.0), 0.0)[0, 0] == pytest.approx(1.0)
    assert phi_boundary(Markov(0.7), 3.3)[0, 0] == pytest.approx(0.7)
    assert phi_boundary(Zero(), 2.0)[0, 0] == 0.0
    for w in (0.3, 1.0, 4.0):
        expect = gamma(1.2) * cos(0.1 * pi) * abs(w) ** -0.2
        assert phi_boundary(PowerLaw(0.2), w)[0, 0] == pytest.approx(expect, rel=1e-13)
    with pytest.raises(PoleOnAxis):
        phi_boundary(PowerLaw(0.2), 0.0)


def test_friction_function():
    f = friction_function(Markov(0.4))
    assert f.dirac_weight[0, 0] == 0.4 and f.smooth_part(2.0)[0, 0] == 0.0
    f = friction_function(Debye(1.0, 1.0))
    assert f.dirac_weight[0, 0] == 1.0
    assert f.smooth_part(1.0)[0, 0] == pytest.approx(-np.exp(-1.0))
    f = friction_function(Zero())
    assert f.dirac_weight[0, 0] == 0.0 and f.smooth_part(1.0)[0, 0] == 0.0


@pytest.mark.parametrize("name", ["debye", "lorentz", "matrix"])
def test_transform_against_quadrature(name, rng):
    model = MODELS[name]
    T = 40 * 20.0  # comfortably beyond every decay time used here
    for _ in range(20):
        z = rng.uniform(-3, 3) + 1j * rng.uniform(0.1, 2.0)
        m = model.stress_dim
        num = np.zeros((m, m), complex)
        for i in range(m):
            for j in range(m):
                def g(t, part):
                    v = np.exp(1j * z * t) * chi_time(model, t)[i, j]
                    return v.real if part == 0 else v.imag
                re = quad(g, 0, T, args=(0,), limit=400)[0]
                im = quad(g, 0, T, args=(1,), limit=400)[0]
                num[i, j] = re + 1j * im
        assert np.max(np.abs(num - chi_hat(model, z))) <= 1e-6


def test_kramers_kronig_debye():
    # Re χ̂(ω) = (1/π) p.v.∫ Φ(w) / (w (w - ω)) dw for a model without a Dirac part
    model = Debye(1.0, 1.0)
    w0 = 0.7
    phi = lambda w: phi_boundary(model, w)[0, 0] / w if w != 0 else 1.0
    val = quad(lambda w: phi(w), -2000, 2000, weight="cauchy", wvar=w0, limit=2000)[0] / pi
    assert abs(val - chi_hat(model, w0)[0, 0].real) <= 1e-3


@pytest.mark.parametrize("name", list(MODELS))
def test_symmetry_and_conjugation(name):
    model = MODELS[name]
    t = np.linspace(0.01, 10, 50)
    c = chi_time(model, t)
    assert np.array_equal(c, np.swapaxes(c, -1, -2))
    for w in (0.3, 1.7, 5.0):
        a, b = chi_hat(model, w), chi_hat(model, -w)
        assert np.max(np.abs(b - np.conj(a))) <= 1e-12
        assert np.max(np.abs(phi_boundary(model, w) - phi_boundary(model, -w))) <= 1e-12


def test_pdc_gate():
    grid = np.linspace(-20, 20, 4001)
    rep = check_pdc(Lorentz(1.0, 1.0, 0.1), grid, [0.1, 1.0])
    assert rep.passed
    # brute-force: the scalar Φ on the same grid is never negative
    assert np.min(phi_boundary(Lorentz(1.0, 1.0, 0.1), grid)) >= -1e-12
    bad = check_pdc(PowerLaw(0.2, -1.0), grid[grid != 0], [0.5])
    assert not bad.passed and bad.min_eig < 0
    z = check_pdc(Zero(), grid)
    assert z.passed and z.min_eig == 0.0


def test_embedded_places_channels():
    e = Embedded(Debye(2.0, 1.0), [1], 3)
    c = chi_time(e, 0.5)
    assert c[1, 1] == pytest.approx(2.0 * np.exp(-0.5)) and np.count_nonzero(c) == 1


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.1, 3), st.floats(0.01, 2), st.floats(-30, 30))
def test_pdc_holds_for_physical_parameters(strength, w0, damping, w):
    for model in (Lorentz(strength, w0, damping), Debye(strength, w0), Markov(damping)):
        assert phi_boundary(model, w)[0, 0] >= -1e-12
