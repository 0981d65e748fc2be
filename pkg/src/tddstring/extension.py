"""Conservative extension: system ⊕ hidden string, and its time integration.

Both string representations are written in one canonical form.  With string
coordinates φ_i (node i of an s-grid or a κ-grid, one vector per stress
channel) and velocities v_i = ∂_t φ_i,

    H_str = ½ Σ_i μ_i ‖v_i‖² + ½ φᵀ S φ
    f     = K u - Σ_i β_i φ_i - D g
    ∂_t u = J Kᵀ f + ρ (+ J ∇h₁(u)),   μ_i ∂_t v_i = -(S φ)_i + β_i f,   ∂_t g = f.

Spatial string: μ_i = Δs, S a finite-difference -∂_s² (times Δs) with
hard ends, β_i = Δs ς(s_i).  Spectral string: μ_j = W_j/2π,
S = diag(W_j κ_j²/2π), β_j = W_j σ̂(κ_j)/2π, where W_j are full-line trapezoid
weights on κ >= 0; v_j equals 2π times the Fourier momentum.

``g`` is the time integral of the stress.  The point-mass part of the
coupling (Markov friction) is an independent δ-coupled string whose only
effect on the system is the memoryless term ``D g`` with D = Φ_∞; the energy
it radiates is accumulated in ``e_dirac`` and counted in H_str.
"""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_solve_banded, cholesky_banded, lu_factor, lu_solve
from scipy.sparse.linalg import splu

from .errors import DimensionMismatch, LightConeViolation, SolverDiverged
from .linalg import check_symplectic

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAXITER = 50
SUPPORT_REL = 1e-6
SMALL_DENSE = 32
_AVF_RULE = tuple(zip(0.5 * (np.polynomial.legendre.leggauss(4)[0] + 1),
                      0.5 * np.polynomial.legendre.leggauss(4)[1]))

# interior stencils of -d²/ds² (times ds²), centre first
_FD_STENCIL = {2: (2.0, -1.0), 4: (2.5, -4.0 / 3.0, 1.0 / 12.0)}


def _is_symplectic(j):
    if sp.issparse(j):
        n = j.shape[0]
        eye = sp.identity(n, format="csr")
        a = sp.linalg.norm(j.T @ j - eye)
        b = sp.linalg.norm(j @ j + eye)
        return a <= 1e-12 and b <= 1e-12
    return check_symplectic(j)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Phase space with symplectic J, impedance K, optional nonlinear part.

    ``grad_h1`` is the gradient of the non-quadratic energy h₁(u) and
    ``h1`` its value (only used for energy reporting).  ``split`` records the
    sizes (n_p, n_q) of a canonical p/q decomposition when there is one.
    """

    J: object
    K: object
    grad_h1: Callable | None = None
    h1: Callable | None = None
    split: tuple | None = None

    def __post_init__(self):
        J = self.J if sp.issparse(self.J) else np.atleast_2d(np.asarray(self.J, dtype=float))
        K = self.K if sp.issparse(self.K) else np.atleast_2d(np.asarray(self.K, dtype=float))
        if J.shape[0] != J.shape[1]:
            raise DimensionMismatch("J must be square")
        if K.shape[1] != J.shape[0]:
            raise DimensionMismatch(f"K has {K.shape[1]} columns, phase space has {J.shape[0]}")
        if not _is_symplectic(J):
            raise DimensionMismatch("J is not symplectic")
        if self.split is not None:
            n_p, n_q = self.split
            if n_p + n_q != J.shape[0]:
                raise DimensionMismatch("p/q split does not cover the phase space")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "K", K)

    @property
    def dim_V(self):
        return self.J.shape[0]

    @property
    def dim_H(self):
        return self.K.shape[0]

    def kjk(self):
        """The skew generator K J Kᵀ of the lossless stress dynamics."""
        out = self.K @ self.J @ self.K.T
        return out.toarray() if sp.issparse(out) else np.asarray(out)


@dataclass(eq=False)
class ExtendedState:
    """Full conservative state.  ``v`` is ∂_t φ at each string node."""

    u: np.ndarray
    phi: np.ndarray
    v: np.ndarray
    g: np.ndarray
    e_dirac: float = 0.0
    t: float = 0.0
    representation: str = "spectral"

    @property
    def theta(self):
        """Canonical string momentum: ∂_t φ in space, ∂_t φ̃ / 2π in κ."""
        return self.v / (2 * np.pi) if self.representation == "spectral" else self.v

    def copy(self):
        return replace(self, u=self.u.copy(), phi=self.phi.copy(), v=self.v.copy(), g=self.g.copy())


@dataclass(eq=False)
class ExtendedSystem:
    spec: SystemSpec
    coupling: object
    representation: str
    nodes: np.ndarray
    mu: np.ndarray
    stiffness: np.ndarray
    beta: np.ndarray
    channels: np.ndarray
    diagonal: bool
    friction: np.ndarray
    integrator: str = "midpoint"
    fd_order: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def markov_channel(self):
        return bool(np.any(self.friction != 0))

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_active(self):
        return len(self.channels)

    def zero_state(self, u0=None):
        n_v = self.spec.dim_V
        u = np.zeros(n_v) if u0 is None else np.array(u0, dtype=float).reshape(n_v)
        shape = (self.n_nodes, self.n_active)
        return ExtendedState(
            u=u,
            phi=np.zeros(shape),
            v=np.zeros(shape),
            g=np.zeros(self.spec.dim_H),
            representation=self.representation,
        )

    # string operators -------------------------------------------------

    def apply_stiffness(self, phi):
        if self.representation == "spectral":
            return self.stiffness[:, None] * phi
        # stiffness holds the symmetric band in lower form: row k = k-th subdiagonal
        out = self.stiffness[0][:, None] * phi
        for k in range(1, self.stiffness.shape[0]):
            d = self.stiffness[k][: len(phi) - k, None]
            out[k:] += d * phi[:-k]
            out[:-k] += d * phi[k:]
        return out

    def beta_dot(self, phi):
        """Σ_i β_i φ_i, an active-channel vector."""
        if self.diagonal:
            return np.einsum("na,na->a", self.beta, phi)
        return np.tensordot(self.beta, phi, axes=([0, 2], [0, 1]))

    def beta_times(self, f_act):
        """β_i f for every node."""
        if self.diagonal:
            return self.beta * f_act
        return self.beta @ f_act

    def friction_times(self, f):
        return self.friction * f if self.friction.ndim == 1 else self.friction @ f

    def embed(self, x_act):
        out = np.zeros(self.spec.dim_H)
        out[self.channels] = x_act
        return out


def _active_channels(string_sigma, dirac_friction, diagonal, m):
    if diagonal:
        mag = np.abs(string_sigma).max(axis=0) if len(string_sigma) else np.zeros(m)
    else:
        mag = np.abs(string_sigma).max(axis=(0, 2)) if len(string_sigma) else np.zeros(m)
    return np.flatnonzero(mag > 0)


def _spatial_stiffness(n, ds, order):
    """Band (lower form) of Δs·(-D²) with φ = 0 beyond both ends."""
    stencil = _FD_STENCIL[order]
    band = np.zeros((len(stencil), n))
    for k, c in enumerate(stencil):
        band[k, : n - k] = c / ds
    return band


def support_extent(coupling, rel=SUPPORT_REL):
    """Largest |s| where the spatial coupling exceeds ``rel`` of its maximum."""
    samples = coupling.spatial_samples
    mag = np.abs(samples.reshape(len(samples), -1)).max(axis=1)
    if mag.max() == 0:
        return 0.0
    idx = np.flatnonzero(mag > rel * mag.max())
    return float(np.abs(coupling.s_grid[idx]).max())


def build_extension(spec, coupling, representation="spectral", t_max=None,
                    integrator="midpoint", fd_order=4):
    """Assemble the extended system for ``spec`` and ``coupling``.

    The spatial representation uses ``coupling.s_grid`` and requires the
    extent L to satisfy L >= support + t_max so no signal reaches the ends.
    """
    if coupling.stress_dim != spec.dim_H:
        raise DimensionMismatch(
            f"coupling has stress dimension {coupling.stress_dim}, system has {spec.dim_H}"
        )
    if representation not in ("spectral", "spatial"):
        raise ValueError(f"unknown representation {representation!r}")
    if integrator not in ("midpoint", "exponential"):
        raise ValueError(f"unknown integrator {integrator!r}")
    if integrator == "exponential" and representation != "spectral":
        raise ValueError("exponential midpoint needs the spectral representation")

    diagonal = coupling.diagonal
    friction = np.array(coupling.markov_friction, dtype=float)

    if representation == "spectral":
        nodes = coupling.kappa
        w = coupling.weights
        mu = w / (2 * np.pi)
        stiffness = w * nodes**2 / (2 * np.pi)
        sig = coupling.string_sigma_hat
        scale = mu
        order = 0
    else:
        if coupling.spatial_samples is None:
            raise ValueError("spatial representation needs a coupling built with s_grid")
        nodes = coupling.s_grid
        ds = float(nodes[1] - nodes[0])
        extent = float(nodes[-1])
        if t_max is not None:
            need = support_extent(coupling) + t_max
            if extent < need:
                raise LightConeViolation(
                    f"string extent {extent:.3g} < support + horizon = {need:.3g}"
                )
        mu = np.full(len(nodes), ds)
        stiffness = _spatial_stiffness(len(nodes), ds, fd_order)
        sig = coupling.spatial_samples
        scale = mu
        order = fd_order

    channels = _active_channels(sig, friction, diagonal, spec.dim_H)
    if diagonal:
        beta = scale[:, None] * sig[:, channels]
    else:
        beta = scale[:, None, None] * sig[:, channels][:, :, channels]
        if len(channels) == 1:
            beta = beta[:, :, 0]
            diagonal = True
    if len(channels) == 0:
        nodes = nodes[:0]
        mu = mu[:0]
        stiffness = stiffness[:0] if representation == "spectral" else np.zeros((1, 0))

    return ExtendedSystem(
        spec=spec,
        coupling=coupling,
        representation=representation,
        nodes=nodes,
        mu=mu,
        stiffness=stiffness,
        beta=beta,
        channels=channels,
        diagonal=diagonal,
        friction=friction,
        integrator=integrator,
        fd_order=order,
    )


def kinematical_stress(sys, state):
    """f = K u - Tφ, including the point-mass channel."""
    f = np.asarray(sys.spec.K @ state.u, dtype=float)
    if sys.n_active:
        f = f - sys.embed(sys.beta_dot(state.phi))
    return f - sys.friction_times(state.g)


def _string_parts(sys, state):
    """Kinetic and potential energy of the grid string."""
    if not sys.n_active:
        return 0.0, 0.0
    kin = 0.5 * float(np.einsum("i,ia,ia->", sys.mu, state.v, state.v))
    if sys.representation == "spectral":
        pot = 0.5 * float(np.einsum("i,ia,ia->", sys.stiffness, state.phi, state.phi))
    else:
        pot = 0.5 * float(np.vdot(state.phi, sys.apply_stiffness(state.phi)))
    return kin, pot


def energies(sys, state):
    """(H_sys, H_str, H_total).  H_sys includes h₁(u) when the spec has one."""
    f = kinematical_stress(sys, state)
    h_sys = 0.5 * float(f @ f)
    if sys.spec.h1 is not None:
        h_sys += float(sys.spec.h1(state.u))
    kin, pot = _string_parts(sys, state)
    h_str = state.e_dirac + kin + pot
    return h_sys, h_str, h_sys + h_str


def string_lagrangian(sys, state):
    """½Σμ‖v‖² - ½φᵀSφ (the point-mass string's outgoing wave contributes 0)."""
    kin, pot = _string_parts(sys, state)
    return kin - pot


class _Stepper:
    """Per-dt factorizations for the structured midpoint solve."""

    def __init__(self, sys, h):
        self.sys = sys
        self.h = h
        spec = sys.spec
        m = spec.dim_H
        q = h * h / 4
        if sys.n_active == 0:
            self.z = None
            g_act = None
        elif sys.representation == "spectral":
            k = sys.nodes
            if sys.integrator == "midpoint":
                a = 1.0 / (1.0 + q * k**2)
                self.pmul = -q * k**2 * a
                self.vmul = 0.5 * h * a
                zc = q * a
            else:
                kh = k * h
                c, s = np.cos(kh), np.sin(kh)
                safe = np.where(k > 0, k, 1.0)
                self.cos, self.sin_k, self.k_sin = c, np.where(k > 0, s / safe, h), k * s
                self.one_c = np.where(k > 0, (1 - c) / safe**2, 0.5 * h * h)
                self.pmul = -0.5 * k**2 * self.one_c
                self.vmul = 0.5 * self.sin_k
                zc = 0.5 * self.one_c
            # Z_j = zc_j σ̂_j with σ̂_j = β_j / μ_j
            self.z = (zc / sys.mu)[:, None] * sys.beta if sys.diagonal else (
                (zc / sys.mu)[:, None, None] * sys.beta
            )
        else:
            band = sys.stiffness * q
            band[0] += sys.mu
            self.chol = cholesky_banded(band, lower=True)
            self.z = q * cho_solve_banded((self.chol, True), sys.beta.reshape(sys.n_nodes, -1))
            self.z = self.z.reshape(sys.beta.shape)

        if self.z is not None:
            if sys.diagonal:
                g_act = np.einsum("na,na->a", sys.beta, self.z)
            else:
                g_act = np.einsum("nab,nbc->ac", sys.beta, self.z)

        fr = sys.friction
        K, J = spec.K, spec.J
        if sp.issparse(K) or sp.issparse(J):
            mat = sp.identity(m, format="csc") - 0.5 * h * sp.csc_matrix(K @ J @ K.T)
            if g_act is not None:
                if sys.diagonal:
                    gfull = np.zeros(m)
                    gfull[sys.channels] = g_act
                    mat = mat + sp.diags(gfull)
                else:
                    blk = np.zeros((m, m))
                    blk[np.ix_(sys.channels, sys.channels)] = g_act
                    mat = mat + sp.csc_matrix(blk)
            if np.any(fr != 0):
                mat = mat + 0.5 * h * (sp.diags(fr) if fr.ndim == 1 else sp.csc_matrix(fr))
            self.lu = splu(sp.csc_matrix(mat))
            self.solve = self.lu.solve
        else:
            mat = np.eye(m) - 0.5 * h * spec.kjk()
            if g_act is not None:
                ch = sys.channels
                if sys.diagonal:
                    mat[ch, ch] += g_act
                else:
                    mat[np.ix_(ch, ch)] += g_act
            mat += 0.5 * h * (np.diag(fr) if fr.ndim == 1 else fr)
            if not np.all(np.isfinite(mat)):
                raise SolverDiverged("non-finite midpoint matrix")
            if m <= SMALL_DENSE:
                minv = np.linalg.inv(mat)
                self.solve = minv.__matmul__
            else:
                self.lu = lu_factor(mat)
                self.solve = lambda r: lu_solve(self.lu, r)

    def string_predictor(self, state):
        """Free increment d with φ_mid = φ + d + Z f_mid (active channels).

        Formed directly rather than as a difference of midpoint and start
        values, which would lose digits once divided by the step.
        """
        sys = self.sys
        if sys.representation == "spectral":
            return self.pmul[:, None] * state.phi + self.vmul[:, None] * state.v
        rhs = sys.mu[:, None] * (0.5 * self.h) * state.v - (0.25 * self.h**2) * sys.apply_stiffness(state.phi)
        return cho_solve_banded((self.chol, True), rhs)

    def z_times(self, f_act):
        if self.sys.diagonal:
            return self.z * f_act
        return self.z @ f_act


def step(sys, state, dt, rho_mid, stepper=None):
    """One implicit-midpoint (or exponential-midpoint) step.

    ``rho_mid`` is the drive at the step midpoint.  Returns the new state and
    a dict with midpoint stress and the work increments of the step.
    """
    if not dt > 0:
        raise ValueError("time step must be positive")
    if stepper is None:
        stepper = sys._cache.get(dt)
        if stepper is None:
            stepper = sys._cache.setdefault(dt, _Stepper(sys, dt))
    h = dt
    spec = sys.spec
    K, J = spec.K, spec.J
    rho_mid = np.asarray(rho_mid, dtype=float)
    active = sys.n_active > 0

    base = -sys.friction_times(state.g)
    if active:
        d0 = stepper.string_predictor(state)
        base = base - sys.embed(sys.beta_dot(state.phi) + sys.beta_dot(d0))

    q = state.u + 0.5 * h * rho_mid
    if spec.grad_h1 is None:
        f_mid = stepper.solve(K @ q + base)
        u_mid = q + 0.5 * h * (J @ (K.T @ f_mid))
    else:
        # ∇h₁ is averaged over the segment [u_n, u_{n+1}] (Gauss-Legendre);
        # this keeps h₁ inside the exactly conserved energy and equals the
        # midpoint value whenever h₁ is quadratic.
        u_mid = state.u.copy()
        for _ in range(FIXED_POINT_MAXITER):
            du = 2 * (u_mid - state.u)
            grad = sum(w * spec.grad_h1(state.u + x * du) for x, w in _AVF_RULE)
            q_it = q + 0.5 * h * (J @ grad)
            f_mid = stepper.solve(K @ q_it + base)
            u_new = q_it + 0.5 * h * (J @ (K.T @ f_mid))
            err = np.max(np.abs(u_new - u_mid))
            u_mid = u_new
            if err <= FIXED_POINT_TOL * (1 + np.max(np.abs(u_mid))):
                break
        else:
            raise SolverDiverged("midpoint fixed-point iteration did not converge")
    if not np.all(np.isfinite(f_mid)):
        raise SolverDiverged("non-finite stress in midpoint solve")

    new = ExtendedState(
        u=2 * u_mid - state.u,
        phi=state.phi,
        v=state.v,
        g=state.g + h * f_mid,
        e_dirac=state.e_dirac,
        t=state.t + h,
        representation=state.representation,
    )
    p_string = 0.0
    if active:
        f_act = f_mid[sys.channels]
        if sys.integrator == "exponential" and sys.representation == "spectral":
            drive = sys.beta_times(f_act) / sys.mu[:, None]
            c = stepper.cos[:, None]
            phi_new = c * state.phi + stepper.sin_k[:, None] * state.v + stepper.one_c[:, None] * drive
            v_new = -stepper.k_sin[:, None] * state.phi + c * state.v + stepper.sin_k[:, None] * drive
            v_avg = 0.5 * (state.v + v_new)
        else:
            dphi = d0 + stepper.z_times(f_act)
            v_mid = (2.0 / h) * dphi
            phi_new = state.phi + 2 * dphi
            v_new = 2 * v_mid - state.v
            v_avg = v_mid
        new.phi, new.v = phi_new, v_new
        p_string = float(f_act @ sys.beta_dot(v_avg))
    p_dirac = float(f_mid @ sys.friction_times(f_mid))
    new.e_dirac = state.e_dirac + h * p_dirac
    w_ext = h * float((K.T @ f_mid) @ rho_mid)
    return new, {"f_mid": f_mid, "work_ext": w_ext, "work_fr": -h * (p_string + p_dirac)}


@dataclass(eq=False)
class EnergyLedger:
    t: np.ndarray
    H_sys: np.ndarray
    H_str: np.ndarray
    H_total: np.ndarray
    work_ext: np.ndarray
    work_fr: np.ndarray
    L_str: np.ndarray


@dataclass(eq=False)
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    f: np.ndarray
    g: np.ndarray
    ledger: EnergyLedger
    probes: dict
    dt: float
    sample_every: int

    def table(self):
        """Header and rows in the fixed CSV column order."""
        n_u = self.u.shape[1]
        n_f = self.f.shape[1]
        header = (
            ["t"] + [f"u{i}" for i in range(n_u)] + [f"f{i}" for i in range(n_f)]
            + ["H_sys", "H_str", "H_total", "work_ext", "work_fr"]
        )
        lg = self.ledger
        rows = np.column_stack(
            [self.t, self.u, self.f, lg.H_sys, lg.H_str, lg.H_total, lg.work_ext, lg.work_fr]
        )
        return header, rows


def _drive_fn(drive, n_v):
    if drive is None:
        return lambda t: np.zeros(n_v)
    return drive


def simulate(sys, drive, T, dt, probes=(), u0=None, sample_every=1, state0=None):
    """Integrate from rest (or an impulsive start ``u0``) up to time T.

    ``drive(t)`` returns the force vector at time t.  Stress, u and g are
    stored every ``sample_every`` steps together with the energy ledger;
    ``probes`` are times at which full state snapshots are kept (nearest step).
    """
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be an integer multiple of dt")
    spec = sys.spec
    rho = _drive_fn(drive, spec.dim_V)
    state = sys.zero_state(u0) if state0 is None else state0.copy()
    stepper = sys._cache.get(dt) or sys._cache.setdefault(dt, _Stepper(sys, dt))

    idx = np.arange(0, n_steps + 1, sample_every)
    n_s = len(idx)
    ts = np.empty(n_s)
    us = np.empty((n_s, spec.dim_V))
    fs = np.empty((n_s, spec.dim_H))
    gs = np.empty((n_s, spec.dim_H))
    hs = np.empty((n_s, 3))
    ls = np.empty(n_s)
    wext = np.empty(n_s)
    wfr = np.empty(n_s)
    probe_steps = {int(round(p / dt)): p for p in probes}
    snaps = {}

    f = kinematical_stress(sys, state)
    acc_ext = acc_fr = 0.0
    t0 = state.t
    k = 0

    def record(n, state, f):
        nonlocal k
        ts[k] = state.t
        us[k] = state.u
        fs[k] = f
        gs[k] = state.g
        h_sys = 0.5 * float(f @ f)
        if spec.h1 is not None:
            h_sys += float(spec.h1(state.u))
        kin, pot = _string_parts(sys, state)
        hs[k] = h_sys, state.e_dirac + kin + pot, h_sys + state.e_dirac + kin + pot
        ls[k] = kin - pot
        wext[k] = acc_ext
        wfr[k] = acc_fr
        k += 1

    record(0, state, f)
    if 0 in probe_steps:
        snaps[probe_steps[0]] = state.copy()
    for n in range(1, n_steps + 1):
        t_mid = t0 + (n - 0.5) * dt
        state, info = step(sys, state, dt, rho(t_mid), stepper)
        f = 2 * info["f_mid"] - f
        acc_ext += info["work_ext"]
        acc_fr += info["work_fr"]
        if n % sample_every == 0:
            record(n, state, f)
        if n in probe_steps:
            snaps[probe_steps[n]] = state.copy()

    ledger = EnergyLedger(
        t=ts, H_sys=hs[:, 0], H_str=hs[:, 1], H_total=hs[:, 2],
        work_ext=wext, work_fr=wfr, L_str=ls,
    )
    return Trajectory(t=ts, u=us, f=fs, g=gs, ledger=ledger, probes=snaps,
                      dt=dt, sample_every=sample_every)


def string_profile(sys, traj, t, s):
    """String displacement at time t on points s, grid part plus point-mass wave.

    The point-mass string carries the outgoing wave ½ d g(t - |s|); its
    history is read from the trajectory by linear interpolation.
    """
    s = np.asarray(s, dtype=float)
    m = sys.spec.dim_H
    out = np.zeros(s.shape + (m,))
    if sys.n_active and sys.representation == "spatial":
        snap = traj.probes.get(t)
        if snap is None:
            raise KeyError(f"no snapshot stored at t={t}")
        for j, ch in enumerate(sys.channels):
            out[..., ch] = np.interp(s, sys.nodes, snap.phi[:, j])
    if sys.markov_channel:
        c = sys.coupling
        d = c.dirac_weight
        tt = t - np.abs(s)
        g_hist = np.stack([np.interp(tt, traj.t, traj.g[:, i], left=0.0) for i in range(m)], axis=-1)
        out += 0.5 * (d * g_hist if d.ndim == 1 else g_hist @ d.T)
    return out


def string_exact_response(coupling, t_hist, f_hist, s, t):
    """Oracle string field φ(s, t) = ½∫₀^∞dτ ∫_{s-τ}^{s+τ} ς(σ) f(t-τ) dσ.

    ``f_hist`` is sampled on the uniform ``t_hist`` from rest (f = 0 before
    ``t_hist[0]``).  The inner σ-integral uses the cumulative integral of the
    spatial samples; the outer τ-integral is a trapezoid rule.  The point-mass
    part adds ½ d ∫_{|s|}^∞ f(t-τ) dτ.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t_hist = np.asarray(t_hist, dtype=float)
    f_hist = np.asarray(f_hist, dtype=float)
    m = f_hist.shape[1]
    dt = t_hist[1] - t_hist[0]
    n = int(round((t - t_hist[0]) / dt))
    tau = dt * np.arange(n + 1)
    f_lag = f_hist[n::-1]
    w = np.full(n + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    out = np.zeros((len(s), m))
    diag = coupling.diagonal

    if coupling.spatial_samples is not None and np.any(coupling.spatial_samples != 0):
        sg = coupling.s_grid
        sig = coupling.spatial_samples
        dsg = sg[1] - sg[0]
        cum = np.concatenate([np.zeros((1,) + sig.shape[1:]),
                              np.cumsum(0.5 * (sig[1:] + sig[:-1]), axis=0) * dsg])
        flat = cum.reshape(len(sg), -1)

        def big_f(x):
            x = np.clip(x, sg[0], sg[-1])
            return np.stack([np.interp(x, sg, flat[:, i]) for i in range(flat.shape[1])], axis=-1)

        for i, si in enumerate(s):
            span = big_f(si + tau) - big_f(si - tau)
            if diag:
                out[i] = 0.5 * np.einsum("k,ka,ka->a", w, span, f_lag)
            else:
                span = span.reshape(len(tau), m, m)
                out[i] = 0.5 * np.einsum("k,kab,kb->a", w, span, f_lag)

    if coupling.split and coupling.has_dirac:
        d = coupling.dirac_weight
        cum_f = np.concatenate([np.zeros((1, m)), np.cumsum(0.5 * (f_hist[1:] + f_hist[:-1]), axis=0) * dt])
        tt = t - np.abs(s)
        g = np.stack([np.interp(tt, t_hist, cum_f[:, i], left=0.0) for i in range(m)], axis=-1)
        out += 0.5 * (d * g if d.ndim == 1 else g @ d.T)
    return out
