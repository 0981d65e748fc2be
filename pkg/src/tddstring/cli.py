"""Batch driver: ``tddstring --config run.ini --out DIR --command NAME``.

Configs are INI files with sections [system], [susceptibility], [coupling],
[drive], [integration] and [diagnostics].  Every key and its default is in
``SCHEMA``; unknown sections or keys are rejected.  Heavy modules are
imported after the thread count has been fixed.
"""

import argparse
import configparser
import os
import sys
from pathlib import Path

COMMANDS = ("pdc-check", "coupling", "simulate", "compare", "brillouin", "maxwell1d")
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _positive(text):
    v = float(text)
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _nonneg(text):
    v = float(text)
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _floats(text):
    return [float(p) for p in text.replace(";", ",").split(",") if p.strip()]


SCHEMA = {
    "system": {
        "kind": (_choice("oscillator", "nonlinear_oscillator", "maxwell1d"), "oscillator"),
        "m": (_positive, 1.0),
        "k": (_positive, 1.0),
        "q0": (float, 0.0),
        "potential": (_choice("quartic", "harmonic"), "quartic"),
        "dx": (_positive, 0.025),
        "slab_left": (float, 10.0),
        "slab_right": (float, 20.0),
        "eps_slab": (_positive, 2.0),
        "pulse_width": (_positive, 1.0),
    },
    "susceptibility": {
        "model": (_choice("zero", "markov", "debye", "lorentz", "powerlaw"), "lorentz"),
        "gamma": (_nonneg, 0.2),
        "delta": (_nonneg, 1.0),
        "tau": (_positive, 1.0),
        "strength": (float, 1.0),
        "w0": (_positive, 1.0),
        "damping": (_nonneg, 0.1),
        "alpha": (float, 0.2),
        "scale": (float, 1.0),
    },
    "coupling": {
        "dk": (_positive, 0.05),
        "kmax": (_positive, 100.0),
        "representation": (_choice("spectral", "spatial"), "spectral"),
        "ds": (_positive, 0.1),
    },
    "drive": {
        "kind": (_choice("gaussian_pulse", "modulated_carrier", "zero"), "gaussian_pulse"),
        "t0": (_nonneg, 12.0),
        "width": (_positive, 2.0),
        "amplitude": (_floats, [1.0]),
        "omega": (_positive, 0.7),
        "delta": (_positive, 0.02),
    },
    "integration": {
        "dt": (_positive, 1e-3),
        "T": (_positive, 100.0),
        "integrator": (_choice("midpoint", "exponential"), "midpoint"),
        "sample_every": (int, 1),
    },
    "diagnostics": {
        "omega_min": (_nonneg, 0.0),
        "omega_max": (_positive, 50.0),
        "n_omega": (int, 2001),
        "eta": (_floats, [0.1, 1.0]),
        "pdc_tol": (_positive, 1e-9),
        "min_sigma_omega": (_positive, 2.0),
        "seed": (int, 0),
    },
}


def load_config(path):
    """Parse and validate; returns {section: {key: value}} with defaults filled."""
    from .errors import ConfigInvalid

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigInvalid("config", str(exc)) from exc
    out = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigInvalid(sec, f"unknown section [{sec}]")
        for key, text in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigInvalid(f"{sec}.{key}", "unknown key")
            conv = SCHEMA[sec][key][0]
            try:
                out[sec][key] = conv(text.strip())
            except ValueError as exc:
                raise ConfigInvalid(f"{sec}.{key}", f"bad value {text!r}: {exc}") from exc
    if out["integration"]["sample_every"] < 1:
        raise ConfigInvalid("integration.sample_every", "must be at least 1")
    if out["diagnostics"]["n_omega"] < 2:
        raise ConfigInvalid("diagnostics.n_omega", "must be at least 2")
    return out


# building blocks -----------------------------------------------------------

def _system(cfg):
    from .models import damped_oscillator, nonlinear_oscillator

    s = cfg["system"]
    if s["kind"] == "oscillator":
        return damped_oscillator(s["m"], s["k"]).spec
    if s["kind"] == "nonlinear_oscillator":
        if s["potential"] == "quartic":
            pot, grad = (lambda q: 0.25 * q**4), (lambda q: q**3)
        else:
            kk = s["k"]
            pot, grad = (lambda q: 0.5 * kk * q * q), (lambda q: kk * q)
        return nonlinear_oscillator(s["m"], 0.0, pot, grad).spec
    from .errors import ConfigInvalid
    raise ConfigInvalid("system.kind", "maxwell1d systems run through the maxwell1d command")


def _model(cfg, dim, mask=None):
    """Susceptibility acting on the channels selected by ``mask`` (default: first)."""
    import numpy as np

    from .susceptibility import Debye, Lorentz, Markov, PowerLaw, Zero

    c = cfg["susceptibility"]
    if mask is None:
        mask = np.zeros(dim)
        mask[0] = 1.0
    kind = c["model"]
    if kind == "zero":
        return Zero(stress_dim=dim)
    if kind == "markov":
        return Markov(c["gamma"] * mask)
    if kind == "debye":
        return Debye(c["delta"] * mask, c["tau"])
    if kind == "lorentz":
        return Lorentz(c["strength"] * mask, c["w0"], c["damping"])
    return PowerLaw(c["alpha"], c["scale"] * mask)


def _drive(cfg, dim):
    import numpy as np

    from .drives import carrier_width, gaussian_pulse, modulated_carrier, zero_drive

    d = cfg["drive"]
    amp = np.zeros(dim)
    given = np.asarray(d["amplitude"], dtype=float)
    amp[: min(dim, len(given))] = given[:dim]
    if d["kind"] == "zero":
        return zero_drive(dim)
    if d["kind"] == "gaussian_pulse":
        return gaussian_pulse(d["t0"], d["width"], amp)
    w = carrier_width(d["omega"], d["delta"])
    return modulated_carrier(d["omega"], 6 * w, w, amp)


def _coupling(cfg, model, extent=None):
    import numpy as np

    from .coupling import build_coupling

    c = cfg["coupling"]
    s_grid = None
    if c["representation"] == "spatial":
        s_grid = c["ds"] * np.arange(int(round(extent / c["ds"])) + 1)
    return build_coupling(model, c["dk"], c["kmax"], s_grid=s_grid)


def _extension(cfg, spec, model):
    import numpy as np

    from .extension import build_extension, support_extent

    c = cfg["coupling"]
    T = cfg["integration"]["T"]
    if c["representation"] == "spatial":
        probe_extent = max(20 * T, 4 * np.pi / c["dk"]) + 10
        probe = _coupling(cfg, model, extent=probe_extent)
        if support_extent(probe) > 0.9 * probe_extent:
            from .errors import LightConeViolation
            raise LightConeViolation(
                "spatial coupling does not decay on the probe grid; refine coupling.dk or raise coupling.kmax")
        extent = c["ds"] * np.ceil((support_extent(probe) + T) / c["ds"]) + 10 * c["ds"]
        coup = _coupling(cfg, model, extent=extent)
        return build_extension(spec, coup, "spatial", t_max=T), coup
    coup = _coupling(cfg, model)
    return build_extension(spec, coup, integrator=cfg["integration"]["integrator"]), coup


def _u0(cfg, spec):
    import numpy as np

    u0 = np.zeros(spec.dim_V)
    u0[-1] = cfg["system"]["q0"]
    return u0


def _post_drive_drift(ledger, drive):
    import numpy as np

    after = ledger.t >= drive.support[1]
    h = ledger.H_total[after]
    if len(h) < 2 or h[0] == 0:
        return 0.0
    return float(np.max(np.abs(h - h[0])) / abs(h[0]))


# commands ------------------------------------------------------------------

def cmd_pdc_check(cfg, out):
    import numpy as np

    from .csvio import write_csv
    from .susceptibility import check_pdc

    g = cfg["diagnostics"]
    model = _model(cfg, 1, np.ones(1))
    grid = np.linspace(g["omega_min"], g["omega_max"], g["n_omega"])
    rep = check_pdc(model, grid, g["eta"], pdc_tol=g["pdc_tol"])
    write_csv(out / "pdc.csv", ["omega", "eta", "min_eig"], rep.grid)
    metrics = {"min_eig": rep.min_eig, "pdc_passed": rep.passed,
               "worst_omega": rep.worst_point[0], "worst_eta": rep.worst_point[1]}
    return metrics, rep.passed, None


def cmd_coupling(cfg, out):
    import numpy as np

    from .coupling import coupling_table, verify_herglotz
    from .csvio import write_csv
    from .experiments import herglotz_probes

    model = _model(cfg, 1, np.ones(1))
    coup = _coupling(cfg, model)
    header, rows = coupling_table(coup)
    write_csv(out / "coupling.csv", header, rows)
    res = verify_herglotz(coup, model, herglotz_probes())
    metrics = {"herglotz_residual": res, "n_modes": len(coup.kappa),
               "phi_inf": float(np.max(coup.phi_inf)), "dirac_split": coup.split}
    return metrics, True, None


def cmd_simulate(cfg, out):
    from .csvio import write_csv
    from .extension import simulate

    spec = _system(cfg)
    model = _model(cfg, spec.dim_H)
    drive = _drive(cfg, spec.dim_V)
    ext, _ = _extension(cfg, spec, model)
    it = cfg["integration"]
    traj = simulate(ext, drive, it["T"], it["dt"], u0=_u0(cfg, spec),
                    sample_every=it["sample_every"])
    header, rows = traj.table()
    write_csv(out / "trajectory.csv", header, rows)
    lg = traj.ledger
    metrics = {"energy_drift_rel": _post_drive_drift(lg, drive),
               "H_total_final": float(lg.H_total[-1]), "work_ext": float(lg.work_ext[-1]),
               "work_fr": float(lg.work_fr[-1]), "n_samples": len(traj.t)}
    plot = ("trajectory", traj.t, {"H_sys": lg.H_sys, "H_str": lg.H_str, "H_total": lg.H_total})
    return metrics, True, plot


def cmd_compare(cfg, out):
    import numpy as np

    from .csvio import write_csv
    from .extension import simulate, string_profile
    from .models import damped_reference
    from .reduced import solve_volterra

    spec = _system(cfg)
    model = _model(cfg, spec.dim_H)
    drive = _drive(cfg, spec.dim_V)
    ext, coup = _extension(cfg, spec, model)
    it = cfg["integration"]
    u0 = _u0(cfg, spec)
    T, dt = it["T"], it["dt"]
    traj = simulate(ext, drive, T, dt, u0=u0, probes=(T,))
    vol = solve_volterra(spec, model, drive, dt, T, u0=u0)
    s, c = cfg["system"], cfg["susceptibility"]
    analytic = np.full(len(traj.t), np.nan)
    metrics = {}
    free = cfg["drive"]["kind"] == "zero" or not np.any(cfg["drive"]["amplitude"])
    lamb_like = s["kind"] == "oscillator" and c["model"] in ("markov", "zero") and free
    if lamb_like:
        gamma = c["gamma"] if c["model"] == "markov" else 0.0
        analytic = damped_reference(s["m"], s["k"], gamma, traj.t, s["q0"])
        metrics["q_linf_analytic"] = float(np.max(np.abs(traj.u[:, -1] - analytic)))
        if gamma > 0:
            sg = cfg["coupling"]["ds"] * np.arange(int(round(T / cfg["coupling"]["ds"])) + 1)
            prof = string_profile(ext, traj, T, sg)[:, 0]
            tt = T - sg
            exact = np.sqrt(0.5 * gamma * s["m"]) * (
                damped_reference(s["m"], s["k"], gamma, np.maximum(tt, 0), s["q0"]) - s["q0"])
            exact = np.where(tt >= 0, exact, 0.0)
            metrics["string_profile_linf"] = float(np.max(np.abs(prof - exact)))
    q_ext, q_vol = traj.u[:, -1], vol.u[:, -1]
    ref = analytic if lamb_like else q_vol
    write_csv(out / "compare.csv", ["t", "q_ext", "q_volterra", "q_analytic", "abs_err"],
              np.column_stack([traj.t, q_ext, q_vol, analytic, np.abs(q_ext - ref)]))
    h = traj.ledger.H_total
    metrics["oracle_linf_rel"] = float(np.max(np.abs(traj.f - vol.f)) / max(np.max(np.abs(vol.f)), 1e-300))
    metrics["energy_drift_rel"] = (_post_drive_drift(traj.ledger, drive) if not free
                                   else float(np.max(np.abs(h - h[0])) / max(abs(h[0]), 1e-300)))
    plot = ("compare", traj.t, {"q_ext": q_ext, "q_volterra": q_vol})
    return metrics, True, plot


def cmd_brillouin(cfg, out):
    import numpy as np

    from . import experiments
    from .csvio import write_csv

    c, d, s = cfg["susceptibility"], cfg["drive"], cfg["system"]
    if c["model"] != "lorentz":
        from .errors import ConfigInvalid
        raise ConfigInvalid("susceptibility.model", "the brillouin command needs a lorentz model")
    common = dict(dt=cfg["integration"]["dt"], min_sigma_omega=cfg["diagnostics"]["min_sigma_omega"],
                  strength=c["strength"], w0=c["w0"], m=s["m"], k=s["k"])
    if c["damping"] == 0:
        r = experiments.brillouin_lossless_energy(d["delta"], d["omega"], **common)
        write_csv(out / "brillouin.csv", ["t", "measured", "predicted", "valid"],
                  np.column_stack([r["t"], r["measured"], r["predicted"], r["valid"]]))
        metrics = {"brillouin_energy_rel_err": r["brillouin_energy_rel_err"], "delta": d["delta"]}
        return metrics, True, ("brillouin", r["t"], {"measured": r["measured"], "predicted": r["predicted"]})
    r = experiments.brillouin_power(d["delta"], d["omega"], kmax=cfg["coupling"]["kmax"],
                                    damping=c["damping"], **common)
    write_csv(out / "brillouin.csv",
              ["t", "measured", "predicted_full", "predicted_leading", "valid"],
              np.column_stack([r["t"], r["measured"], r["full"], r["leading"], r["valid"]]))
    metrics = {k: r[k] for k in ("brillouin_rel_err_full", "brillouin_rel_err_leading",
                                 "delta", "delta_estimate")}
    plot = ("brillouin", r["t"], {"measured": r["measured"], "full": r["full"], "leading": r["leading"]})
    return metrics, True, plot


def cmd_maxwell1d(cfg, out):
    from . import experiments
    from .csvio import write_csv

    s, c = cfg["system"], cfg["susceptibility"]
    r = experiments.maxwell_slab(
        s["dx"], T=cfg["integration"]["T"], slab=(s["slab_left"], s["slab_right"]),
        eps_slab=s["eps_slab"], strength=c["strength"], w0=c["w0"], damping=c["damping"],
        kmax=cfg["coupling"]["kmax"], pulse_width=s["pulse_width"],
        probe_times=(0.2 * cfg["integration"]["T"], 0.4 * cfg["integration"]["T"]))
    mx, ext = r["maxwell"], r["extension"]
    h_str = mx.string_energy_density(ext, r["final_state"])
    header, rows = mx.snapshot_table(r["final_state"].u, r["final_stress"], h_str)
    write_csv(out / "fields.csv", header, rows)
    metrics = {k: r[k] for k in ("injected", "reflected", "transmitted", "stored", "absorbed",
                                 "audit_rel", "poynting_residual", "H_str_final")}
    plot = ("fields", rows[:, 0], {"E": rows[:, 1], "H": rows[:, 2]})
    return metrics, True, plot


HANDLERS = {
    "pdc-check": cmd_pdc_check,
    "coupling": cmd_coupling,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "brillouin": cmd_brillouin,
    "maxwell1d": cmd_maxwell1d,
}


def export_summary(out_dir, metrics):
    """Write ``summary.txt`` (sorted key=value) next to the run's CSV files."""
    from .csvio import write_summary
    from .errors import NoArtifacts

    out = Path(out_dir)
    if not out.is_dir() or not any(out.glob("*.csv")):
        raise NoArtifacts(f"no CSV artifacts in {out}")
    path = out / "summary.txt"
    write_summary(path, metrics)
    return path


def render_figure(out_dir, plot):
    """Draw one PNG per run; matplotlib is optional and imported only here."""
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("figures need matplotlib (install the 'plot' extra)") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    name, x, series = plot
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label, lw=1)
    ax.set_xlabel("x" if name == "fields" else "t")
    ax.legend()
    fig.tight_layout()
    path = Path(out_dir) / f"{name}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def run_scenario(config_path, out_dir, command, figures=False):
    """Run one command; returns the process exit status."""
    from .errors import ConfigInvalid, LightConeViolation, NotPSD, TddError

    try:
        cfg = load_config(config_path)
    except ConfigInvalid as exc:
        print(f"config error: {exc.key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        metrics, passed, plot = HANDLERS[command](cfg, out)
    except ConfigInvalid as exc:
        print(f"config error: {exc.key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotPSD as exc:
        print(f"PDC failed: {exc}", file=sys.stderr)
        (out / "failure.csv").write_text("reason\nnot_psd\n", encoding="utf-8")
        export_summary(out, {"pdc_passed": False, "error": "NotPSD"})
        return EXIT_FAILED
    except LightConeViolation as exc:
        print(f"light cone: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except TddError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    export_summary(out, metrics)
    if figures and plot is not None:
        render_figure(out, plot)
    if not passed:
        print("validation failed; see summary.txt", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(prog="tddstring", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--figures", action="store_true", help="also write PNG figures (needs matplotlib)")
    args = ap.parse_args(argv)
    if args.threads < 1:
        ap.error("--threads must be at least 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(args.threads)
    return run_scenario(args.config, args.out, args.command, figures=args.figures)


if __name__ == "__main__":
    sys.exit(main())
