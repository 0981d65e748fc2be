"""End-to-end scenarios shared by the command line and the acceptance suite.

Each function runs one scenario and returns a plain dict of arrays and
scalar metrics.
"""

import time

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import analysis
from .coupling import build_coupling, verify_herglotz
from .drives import carrier_width, gaussian_pulse, modulated_carrier
from .extension import build_extension, simulate, string_profile
from .models import damped_oscillator, lorentz_oscillator, maxwell1d, nonlinear_oscillator, slab_lorentz
from .reduced import friction_work, solve_volterra

PULSE_T0 = 12.0
PULSE_WIDTH = 2.0


def _grid_step(kmax, dk):
    """Largest spacing <= dk that divides kmax."""
    return kmax / np.ceil(kmax / dk - 1e-9)


def _s_grid(extent, ds):
    return ds * np.arange(int(round(extent / ds)) + 1)


def pulse_drive(dim=2, t0=PULSE_T0, width=PULSE_WIDTH):
    amp = np.zeros(dim)
    amp[0] = 1.0
    return gaussian_pulse(t0, width, amp)


def build_lorentz_extension(spec, model, dk, kmax, representation="spectral", ds=None,
                            t_max=None, extent=None, integrator="midpoint"):
    if representation == "spatial":
        c0 = build_coupling(model, dk, kmax, s_grid=_s_grid(extent, ds))
        return build_extension(spec, c0, "spatial", t_max=t_max)
    c0 = build_coupling(model, dk, kmax)
    return build_extension(spec, c0, integrator=integrator)


def reduction(dt, dk, kmax=100.0, T=100.0, damping=0.1):
    """Extension vs direct Volterra stress for the pulsed Lorentz oscillator."""
    spec, model = lorentz_oscillator(damping=damping)
    drive = pulse_drive()
    t0 = time.perf_counter()
    ext = build_lorentz_extension(spec, model, dk, kmax)
    traj = simulate(ext, drive, T, dt)
    t_ext = time.perf_counter() - t0
    t0 = time.perf_counter()
    vol = solve_volterra(spec, model, drive, dt, T)
    t_vol = time.perf_counter() - t0
    err = float(np.max(np.abs(traj.f - vol.f)) / np.max(np.abs(vol.f)))
    return {"t": traj.t, "f_ext": traj.f, "f_volterra": vol.f, "u_ext": traj.u,
            "u_volterra": vol.u, "oracle_linf_rel": err, "runtime_ext": t_ext,
            "runtime_volterra": t_vol, "trajectory": traj}


def conservation(dt=1e-3, dk=0.05, kmax=100.0, steps_after=100_000):
    """Relative drift of H_total over ``steps_after`` steps past the drive."""
    spec, model = lorentz_oscillator()
    drive = pulse_drive()
    t_end = drive.support[1]
    n0 = int(np.ceil(t_end / dt))
    T = dt * (n0 + steps_after)
    t0 = time.perf_counter()
    ext = build_lorentz_extension(spec, model, dk, kmax)
    traj = simulate(ext, drive, T, dt, sample_every=100)
    el = time.perf_counter() - t0
    lg = traj.ledger
    after = lg.t >= dt * n0 - 1e-12
    h = lg.H_total[after]
    drift = float(np.max(np.abs(h - h[0])) / abs(h[0]))
    return {"energy_drift_rel": drift, "runtime": el, "steps_after": steps_after,
            "trajectory": traj}


def energy_balance(model_name, dt=1e-3, dk=0.05, kmax=100.0, T=100.0):
    """ΔH_sys vs W_fr + W_ext with W_fr from the stress history alone."""
    from .susceptibility import Debye, Lorentz

    spec, _ = lorentz_oscillator()
    if model_name == "lorentz":
        model = Lorentz(np.array([1.0, 0.0]), 1.0, 0.1)
    elif model_name == "debye":
        model = Debye(np.array([1.0, 0.0]), 1.0)
    else:
        raise ValueError(f"unknown model {model_name!r}")
    ext = build_lorentz_extension(spec, model, dk, kmax)
    traj = simulate(ext, pulse_drive(), T, dt)
    lg = traj.ledger
    w_fr = friction_work(model, traj.f, dt)
    w_ext = float(lg.work_ext[-1])
    d_hsys = float(lg.H_sys[-1] - lg.H_sys[0])
    return {"delta_H_sys": d_hsys, "work_fr": w_fr, "work_ext": w_ext,
            "work_fr_ledger": float(lg.work_fr[-1]), "H_str_final": float(lg.H_str[-1]),
            "balance_rel": abs(d_hsys - w_fr - w_ext) / abs(w_ext)}


def lamb(dt=1e-3, T=50.0, ds=0.05, m=1.0, k=1.0, gamma=0.2, q0=1.0):
    """Markov friction as a point-coupled string, from an impulsive start."""
    osc = damped_oscillator(m, k, gamma)
    c0 = build_coupling(osc.model, 0.05, 10.0, s_grid=_s_grid(T, ds))
    ext = build_extension(osc.spec, c0, "spatial", t_max=T)
    u0 = osc.initial_state(q0)
    t0 = time.perf_counter()
    traj = simulate(ext, None, T, dt, u0=u0, probes=(T,))
    el = time.perf_counter() - t0
    q_ref = osc.reference(traj.t, q0)
    q_err = float(np.max(np.abs(traj.u[:, 1] - q_ref)))
    s = c0.s_grid
    prof = string_profile(ext, traj, T, s)[:, 0]
    exact = osc.string_profile(lambda tt: osc.reference(tt, q0), T, s, q0)
    prof_err = float(np.max(np.abs(prof - exact)))
    vol = solve_volterra(osc.spec, osc.model, None, dt, T, u0=u0)
    oracle = float(np.max(np.abs(traj.f - vol.f)) / np.max(np.abs(vol.f)))
    h = traj.ledger.H_total
    return {"t": traj.t, "q_ext": traj.u[:, 1], "q_volterra": vol.u[:, 1], "q_analytic": q_ref,
            "q_linf": q_err, "string_profile_linf": prof_err,
            "profile_bound": 2 * (ds + dt), "oracle_linf_rel": oracle,
            "energy_drift_rel": float(np.max(np.abs(h - h[0])) / h[0]), "runtime": el,
            "s": s, "profile": prof, "profile_exact": exact}


def brillouin_power(delta, omega=0.7, dt=0.02, kmax=10.0, damping=0.1, min_sigma_omega=2.0,
                    strength=1.0, w0=1.0, m=1.0, k=1.0):
    """Averaged string power vs the envelope predictions, Lorentz oscillator."""
    spec, model = lorentz_oscillator(strength, w0, damping, m, k)
    w = carrier_width(omega, delta)
    t_c = 6 * w
    T = dt * np.ceil((12 * w + 100) / dt)
    drive = modulated_carrier(omega, t_c, w, [1.0, 0.0])
    dk = _grid_step(kmax, 2 * np.pi / (T + 200))
    t0 = time.perf_counter()
    ext = build_lorentz_extension(spec, model, dk, kmax)
    traj = simulate(ext, drive, T, dt)
    power = analysis.measured_power(traj.t, traj.ledger.H_str)
    sigma = analysis.default_sigma(omega, delta)
    measured, valid = analysis.time_average(power, sigma, traj.t, omega,
                                            min_sigma_omega=min_sigma_omega)
    env = analysis.demodulate(traj.f, omega, traj.t)
    pred = analysis.brillouin_power(env, model, omega)
    scale = np.max(np.abs(pred.full))
    err_full = float(np.max(np.abs(measured - pred.full)[valid]) / scale)
    err_lead = float(np.max(np.abs(measured - pred.leading)[valid]) / scale)
    return {"t": traj.t, "measured": measured, "full": pred.full, "leading": pred.leading,
            "valid": valid, "brillouin_rel_err_full": err_full,
            "brillouin_rel_err_leading": err_lead, "delta": delta,
            "delta_estimate": env.delta, "runtime": time.perf_counter() - t0}


def brillouin_lossless_energy(delta, omega=0.5, dt=0.02, min_sigma_omega=2.0,
                              strength=1.0, w0=1.0, m=1.0, k=1.0):
    """Averaged total energy of a lossless Lorentz oscillator vs the prediction.

    Without dissipation the string degenerates to a single resonator, so the
    stress is taken from the direct solver and the total energy from the
    cumulative external work (the system starts at rest).
    """
    spec, model = lorentz_oscillator(strength, w0, 0.0, m, k)
    w = carrier_width(omega, delta)
    T = dt * np.ceil((12 * w + 50) / dt)
    drive = modulated_carrier(omega, 6 * w, w, [1.0, 0.0])
    vol = solve_volterra(spec, model, drive, dt, T)
    rho = drive(vol.t)
    power = np.einsum("ti,ti->t", vol.f @ np.asarray(spec.K), rho)
    energy = cumulative_trapezoid(power, vol.t, initial=0.0)
    sigma = analysis.default_sigma(omega, delta)
    measured, valid = analysis.time_average(energy, sigma, vol.t, omega,
                                            min_sigma_omega=min_sigma_omega)
    env = analysis.demodulate(vol.f, omega, vol.t)
    pred = analysis.brillouin_energy_lossless(env, model, omega)
    err = float(np.max(np.abs(measured - pred)[valid]) / np.max(np.abs(pred)))
    return {"t": vol.t, "measured": measured, "predicted": pred, "valid": valid,
            "brillouin_energy_rel_err": err, "delta": delta}


def nonlinear(dt=1e-3, T=50.0, gamma=0.1, q0=1.5):
    """Quartic oscillator with friction vs a tight-tolerance ODE solution."""
    osc = nonlinear_oscillator(1.0, gamma, lambda q: 0.25 * q**4, lambda q: q**3)
    c0 = build_coupling(osc.model, 0.05, 10.0)
    ext = build_extension(osc.spec, c0)
    traj = simulate(ext, None, T, dt, u0=[0.0, q0])
    ref = osc.reference(traj.t, q0)
    q = traj.u[:, 1]
    mech = 0.5 * traj.u[:, 0] ** 2 + 0.25 * q**4
    h = traj.ledger.H_total
    return {"t": traj.t, "q_ext": q, "q_reference": ref,
            "q_linf": float(np.max(np.abs(q - ref))), "mechanical_energy": mech,
            "energy_drift_rel": float(np.max(np.abs(h - h[0])) / h[0])}


def maxwell_slab(dx, T=40.0, slab=(10.0, 20.0), eps_slab=2.0, strength=1.0, w0=2.0,
                 damping=0.5, kmax=20.0, pulse_width=1.0, probe_times=(8.0, 16.0)):
    """Current pulse hitting a Lorentz slab: energy audit and Poynting residual."""
    x = np.arange(-T - 5, T + 5 + dx / 2, dx)
    inside = (x >= slab[0]) & (x <= slab[1])
    chi = slab_lorentz(x, slab[0], slab[1], strength, w0, damping)
    mx = maxwell1d(np.where(inside, eps_slab, 1.0), 1.0, chi, x,
                   omega_max=6.0 / pulse_width)
    dk = _grid_step(kmax, 2 * np.pi / (T + 50))
    c0 = build_coupling(mx.model, dk, kmax)
    ext = build_extension(mx.spec, c0)
    prof = np.exp(-0.5 * (x / 0.5) ** 2)
    drive = gaussian_pulse(6 * pulse_width, pulse_width, mx.current_amplitude(prof))
    dt = dx / 2
    probes = sorted({T} | {p + o for p in probe_times for o in (-dt, 0.0, dt)})
    traj = simulate(ext, drive, T, dt, probes=probes, sample_every=max(1, int(round(1 / dt))))
    final = traj.probes[T]
    from .extension import kinematical_stress

    f = kinematical_stress(ext, final)
    hf = mx.field_energy_density(f) * dx
    hs = mx.string_energy_density(ext, final) * dx
    left, right = x < slab[0], x > slab[1]
    injected = float(traj.ledger.work_ext[-1])
    reflected = float(hf[left].sum())
    transmitted = float(hf[right].sum())
    stored = float(hf[inside].sum() + hs[inside].sum())
    residuals = []
    for tp in probe_times:
        j = prof * drive.profile(np.array(tp))
        residuals.append(mx.poynting_residual(
            ext, traj.probes[tp - dt], traj.probes[tp], traj.probes[tp + dt], dt, j))
    return {"injected": injected, "reflected": reflected, "transmitted": transmitted,
            "stored": stored, "absorbed": float(hs.sum()),
            "H_str_final": float(traj.ledger.H_str[-1]),
            "audit_rel": abs(reflected + transmitted + stored - injected) / injected,
            "poynting_residual": max(residuals), "dx": dx, "maxwell": mx,
            "extension": ext, "final_state": final, "final_stress": f}


def representation_equivalence(dt=1e-3, dk=0.0125, ds=0.1, kmax=100.0, T=100.0):
    """u(t) from the spatial and the spectral string on the pulsed Lorentz scenario."""
    spec, model = lorentz_oscillator()
    drive = pulse_drive()
    spectral = simulate(build_lorentz_extension(spec, model, dk, kmax), drive, T, dt)
    c_probe = build_coupling(model, dk, kmax, s_grid=_s_grid(20 * T, ds))
    from .extension import support_extent

    extent = ds * np.ceil((support_extent(c_probe) + T) / ds) + 50 * ds
    ext = build_lorentz_extension(spec, model, dk, kmax, "spatial", ds=ds, t_max=T,
                                  extent=extent)
    spatial = simulate(ext, drive, T, dt)
    err = float(np.max(np.abs(spectral.u - spatial.u)))
    return {"t": spectral.t, "u_spectral": spectral.u, "u_spatial": spatial.u,
            "u_linf": err, "extent": extent}


def herglotz(model, dk=0.01, kmax=200.0, zetas=None):
    if zetas is None:
        zetas = herglotz_probes()
    return verify_herglotz(build_coupling(model, dk, kmax), model, zetas)


def herglotz_probes():
    return np.concatenate([1j * np.linspace(0.5, 5.0, 8), [1 + 1j, 2 + 0.5j]])
