"""Ready-made systems: damped and nonlinear oscillators, a periodic chain,
and a one-dimensional Maxwell field in a dispersive dielectric."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .errors import DimensionMismatch, GridTooCoarse
from .extension import SystemSpec
from .linalg import canonical_j
from .susceptibility import Conjugated, Embedded, Lorentz, Markov, Zero

MIN_POINTS_PER_WAVELENGTH = 20


# oscillators ---------------------------------------------------------------

def damped_reference(m, k, gamma, t, q0=1.0, v0=0.0):
    """q(t) for m q̈ + γ m q̇ + k q = 0, all three damping regimes."""
    t = np.asarray(t, dtype=float)
    w0sq = k / m
    a = 0.5 * gamma
    disc = w0sq - a * a
    scale = max(w0sq, a * a)
    if abs(disc) <= 1e-12 * scale:
        return np.exp(-a * t) * (q0 + (v0 + a * q0) * t)
    if disc > 0:
        nu = np.sqrt(disc)
        return np.exp(-a * t) * (q0 * np.cos(nu * t) + (v0 + a * q0) / nu * np.sin(nu * t))
    r = np.sqrt(-disc)
    r1, r2 = -a + r, -a - r
    c1 = (v0 - r2 * q0) / (r1 - r2)
    c2 = q0 - c1
    return c1 * np.exp(r1 * t) + c2 * np.exp(r2 * t)


@dataclass(frozen=True, eq=False)
class DampedOscillator:
    spec: SystemSpec
    model: object
    m: float
    k: float
    gamma: float

    def reference(self, t, q0=1.0, v0=0.0):
        return damped_reference(self.m, self.k, self.gamma, t, q0, v0)

    def initial_state(self, q0=1.0, v0=0.0):
        """u = (p, q) for the given position and velocity."""
        return np.array([self.m * v0, q0])

    def string_profile(self, q_of_t, t, s, q0=1.0):
        """Outgoing wave √(γm/2)(q(t-|s|) - q₀) inside the light cone.

        The constant q₀ appears because the run starts impulsively from q₀
        rather than from rest; outside the light cone the string is at rest.
        """
        tt = t - np.abs(np.asarray(s, dtype=float))
        amp = np.sqrt(0.5 * self.gamma * self.m)
        return np.where(tt >= 0, amp * (q_of_t(np.maximum(tt, 0.0)) - q0), 0.0)


def damped_oscillator(m=1.0, k=1.0, gamma=0.0):
    """Mass m on a spring k with friction γ on the momentum channel.

    u = (p, q), K = diag(1/√m, √k); the equation of motion is
    q̈ + γq̇ + (k/m) q = 0.
    """
    if not (m > 0 and k > 0) or gamma < 0:
        raise ValueError("need m, k > 0 and γ >= 0")
    spec = SystemSpec(canonical_j(1), np.diag([1 / np.sqrt(m), np.sqrt(k)]), split=(1, 1))
    model = Markov(np.array([gamma, 0.0])) if gamma > 0 else Zero(stress_dim=2)
    return DampedOscillator(spec=spec, model=model, m=m, k=k, gamma=gamma)


def lorentz_oscillator(strength=1.0, w0=1.0, damping=0.1, m=1.0, k=1.0):
    """Oscillator whose momentum channel carries a Lorentz susceptibility."""
    spec = SystemSpec(canonical_j(1), np.diag([1 / np.sqrt(m), np.sqrt(k)]), split=(1, 1))
    return spec, Lorentz(np.array([strength, 0.0]), w0, damping)


@dataclass(frozen=True, eq=False)
class NonlinearOscillator:
    spec: SystemSpec
    model: object
    m: float
    gamma: float
    dV: Callable

    def reference(self, t, q0, v0=0.0, rtol=1e-12, atol=1e-14):
        """High-accuracy solution of q̈ = -V'(q)/m - γq̇ for comparison."""
        t = np.asarray(t, dtype=float)

        def rhs(_, y):
            return [y[1], -self.dV(y[0]) / self.m - self.gamma * y[1]]

        sol = solve_ivp(rhs, (t[0], t[-1]), [q0, v0], method="DOP853", t_eval=t,
                        rtol=rtol, atol=atol)
        return sol.y[0]


def nonlinear_oscillator(m, gamma, V, dV):
    """Quadratic kinetic energy p²/2m, potential V(q), friction γ.

    Only the momentum is a stress channel (K = [1/√m, 0]); the potential
    enters through the non-quadratic energy h₁(u) = V(q).
    """
    if not m > 0 or gamma < 0:
        raise ValueError("need m > 0 and γ >= 0")
    spec = SystemSpec(
        canonical_j(1),
        np.array([[1 / np.sqrt(m), 0.0]]),
        grad_h1=lambda u: np.array([0.0, float(dV(u[1]))]),
        h1=lambda u: float(V(u[1])),
        split=(1, 1),
    )
    model = Markov(np.array([gamma])) if gamma > 0 else Zero(stress_dim=1)
    return NonlinearOscillator(spec=spec, model=model, m=m, gamma=gamma, dV=dV)


def circular_string(n, m=1.0, k=1.0):
    """Periodic chain of n masses: u = (p₁..pₙ, x₁..xₙ).

    K = diag(I/√m, √k·Δ) with Δ the periodic forward difference, so the
    rigid translation x = const lies in ker K and the total momentum is the
    corresponding conserved J·ker K component.
    """
    if n < 2:
        raise ValueError("need at least two masses")
    eye = np.eye(n)
    diff = np.roll(eye, 1, axis=1) - eye
    K = np.block([[eye / np.sqrt(m), np.zeros((n, n))], [np.zeros((n, n)), np.sqrt(k) * diff]])
    return SystemSpec(canonical_j(n), K, split=(n, n))


def chain_zero_mode(n):
    """Unit vector along J·(rigid translation), i.e. total momentum."""
    v = np.zeros(2 * n)
    v[:n] = -1.0 / np.sqrt(n)
    return v


# Maxwell -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Maxwell1D:
    """E_y, H_z on a staggered grid with hard ends.

    Phase space u = (Π̃, Ã) = α(Π, A) at the n E-nodes with α = √(Δx/4π), so
    the Euclidean norm of the stress reproduces the Gaussian-unit energy
    (1/8π)∫(εE² + μH²)dx.  H and B live on the n-1 half nodes.
    """

    x: np.ndarray
    eps: np.ndarray
    mu: np.ndarray
    spec: SystemSpec
    model: object
    chi_E: object

    @property
    def n(self):
        return len(self.x)

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def alpha(self):
        return np.sqrt(self.dx / (4 * np.pi))

    @property
    def x_half(self):
        return 0.5 * (self.x[1:] + self.x[:-1])

    def E(self, f):
        return np.asarray(f)[..., : self.n] / (self.alpha * np.sqrt(self.eps))

    def H(self, f):
        return np.asarray(f)[..., self.n:] / (self.alpha * np.sqrt(self.mu))

    def D(self, u):
        return -np.asarray(u)[..., : self.n] / self.alpha

    def A(self, u):
        return np.asarray(u)[..., self.n:] / self.alpha

    def B(self, u):
        return np.diff(self.A(u), axis=-1) / self.dx

    def current_amplitude(self, j_profile):
        """Force vector for a current density j(x): ∂_tΠ picks up 4πj."""
        j = np.asarray(j_profile, dtype=float)
        if j.shape != (self.n,):
            raise DimensionMismatch("current profile must live on the E nodes")
        out = np.zeros(2 * self.n)
        out[: self.n] = 4 * np.pi * self.alpha * j
        return out

    def field_energy_density(self, f):
        """(εE² + μH²)/8π at E nodes, H² split between the two neighbours."""
        e = self.E(f)
        h = self.H(f)
        he = self.eps * e**2
        hh = self.mu * h**2
        out = he.copy()
        out[..., 1:] += 0.5 * hh
        out[..., :-1] += 0.5 * hh
        return out / (8 * np.pi)

    def string_energy_density(self, ext, state):
        """Hidden-string energy per unit length at each E node."""
        out = np.zeros(self.n)
        if not ext.n_active:
            return out
        if ext.representation != "spectral":
            raise ValueError("local string energy needs the spectral representation")
        node = 0.5 * (np.einsum("i,ia->a", ext.mu, state.v**2)
                      + np.einsum("i,ia->a", ext.stiffness, state.phi**2))
        out[ext.channels] = node
        return out / self.dx

    def flux(self, f):
        """S = EH/4π at half nodes with E averaged onto them.

        The sign follows the discrete equations ∂_tD = -∂_xH - 4πj and
        ∂_tB = -∂_xE, for which the energy flows along +EH.
        """
        e = self.E(f)
        return 0.5 * (e[..., 1:] + e[..., :-1]) * self.H(f) / (4 * np.pi)

    def poynting_residual(self, ext, before, at, after, h, j_at):
        """Relative residual of ∂_t h + ∂_x S + jE at interior E nodes.

        ``before``/``at``/``after`` are extended states a time ``h`` apart,
        ``j_at`` the current density at the middle time.  The time derivative
        is a centred difference, the flux the collocated S of :meth:`flux`;
        the residual therefore vanishes at the order of the discretization.
        Returns max|residual| / max|∂_t h|.
        """
        from .extension import kinematical_stress

        def density(state):
            f = kinematical_stress(ext, state)
            return self.field_energy_density(f) + self.string_energy_density(ext, state)

        dhdt = (density(after) - density(before)) / (2 * h)
        f = kinematical_stress(ext, at)
        s = self.flux(f)
        res = dhdt[1:-1] + np.diff(s) / self.dx + (np.asarray(j_at) * self.E(f))[1:-1]
        scale = np.max(np.abs(dhdt))
        return float(np.max(np.abs(res)) / scale) if scale > 0 else float(np.max(np.abs(res)))

    def snapshot_table(self, u, f, h_str=None):
        """Columns x, E, H, D, B, h_sys, h_str with H, B averaged to E nodes."""
        def to_nodes(y):
            out = np.zeros(self.n)
            out[1:] += 0.5 * y
            out[:-1] += 0.5 * y
            return out

        h_str = np.zeros(self.n) if h_str is None else h_str
        header = ["x", "E", "H", "D", "B", "h_sys", "h_str"]
        rows = np.column_stack([
            self.x, self.E(f), to_nodes(self.H(f)), self.D(u), to_nodes(self.B(u)),
            self.field_energy_density(f), h_str,
        ])
        return header, rows


def maxwell1d(eps, mu, chi_E, x, omega_max=None):
    """Assemble the 1D Maxwell system on E nodes ``x``.

    ``eps`` is given on the E nodes and ``mu`` on the half nodes (scalars are
    broadcast).  ``chi_E`` is a diagonal susceptibility with one channel per
    E node (or None).  With ``omega_max`` the grid is required to resolve
    the shortest wavelength 2π/(ω_max·√(εμ)) by 20 points.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 3:
        raise DimensionMismatch("need at least three grid points")
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise DimensionMismatch("grid must be uniform")
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (n,)).copy()
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (n - 1,)).copy()
    if np.any(eps <= 0) or np.any(mu <= 0):
        raise ValueError("ε and μ must be positive")
    if omega_max is not None:
        index = np.sqrt(eps.max() * mu.max())
        ppw = 2 * np.pi / (omega_max * index * dx)
        if ppw < MIN_POINTS_PER_WAVELENGTH:
            raise GridTooCoarse(
                f"{ppw:.1f} points per wavelength, need {MIN_POINTS_PER_WAVELENGTH}"
            )

    diff = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n)) / dx
    K = sp.bmat([
        [sp.diags(-1 / np.sqrt(eps)), None],
        [None, sp.diags(1 / np.sqrt(mu)) @ diff],
    ], format="csr")
    eye = sp.identity(n, format="csr")
    J = sp.bmat([[None, -eye], [eye, None]], format="csr")
    spec = SystemSpec(J, K, split=(n, n))

    m = 2 * n - 1
    if chi_E is None:
        model = Zero(stress_dim=m)
    else:
        if chi_E.stress_dim != n or not chi_E.is_diagonal:
            raise DimensionMismatch("χ_E must be diagonal with one channel per E node")
        conj = np.concatenate([1 / np.sqrt(eps), np.ones(n - 1)])
        model = Conjugated(Embedded(chi_E, np.arange(n), m), conj)
    return Maxwell1D(x=x, eps=eps, mu=mu, spec=spec, model=model, chi_E=chi_E)


def slab_lorentz(x, left, right, strength, w0, damping):
    """Lorentz χ_E that is non-zero only for left <= x <= right."""
    x = np.asarray(x, dtype=float)
    mask = ((x >= left) & (x <= right)).astype(float)
    return Lorentz(strength * mask, w0, damping)
