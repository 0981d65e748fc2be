"""Causal matrix-valued susceptibilities and their frequency-domain data.

Every model is a finite sum of terms ``k(t) * P`` where ``k`` is a scalar
causal kernel with closed-form transforms and ``P`` is a symmetric parameter
matrix.  ``P`` may also be stored as a vector, meaning a diagonal matrix;
models whose terms are all diagonal are evaluated in that compact form, which
keeps large stress spaces (a discretized field) cheap.

Conventions: ``chi_hat(z) = ∫₀^∞ exp(i z t) chi(t) dt`` for ``Im z >= 0`` and
``Phi(w) = Im{w chi_hat(w + i0)}``.
"""

from dataclasses import dataclass, field
from math import gamma as gamma_fn
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NegativeTime, PoleOnAxis, UndefinedAtZero

PDC_TOL = 1e-9


def _as_param(p):
    """Validate a parameter: scalar -> (1,), vector -> diagonal, matrix -> symmetric."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim == 2:
        if p.shape[0] != p.shape[1]:
            raise DimensionMismatch(f"parameter must be square, got {p.shape}")
        if not np.array_equal(p, p.T):
            if not np.allclose(p, p.T, rtol=1e-13, atol=1e-15):
                raise DimensionMismatch("parameter matrix must be symmetric")
            p = 0.5 * (p + p.T)
    elif p.ndim != 1:
        raise DimensionMismatch(f"parameter must be scalar, vector or matrix, got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DimensionMismatch("parameter has non-finite entries")
    return p


def _to_dense(p):
    return np.diag(p) if p.ndim == 1 else p


def _complex_upper(z):
    """Complex array with any negative-zero imaginary part flipped to +0."""
    z = np.asarray(z, dtype=complex)
    return z.real + 1j * (z.imag + 0.0)


class _Kernel:
    """Scalar causal kernel with closed-form transforms (internal)."""

    def k(self, t):
        raise NotImplementedError

    def dk(self, t):
        raise NotImplementedError

    k0 = 0.0

    def zk(self, z):
        """z * khat(z), regular wherever the model has finite dissipation."""
        raise NotImplementedError

    def dzk(self, z):
        """d/dz [z * khat(z)]."""
        raise NotImplementedError

    def khat(self, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.zk(z) / z


class _MarkovKernel(_Kernel):
    k0 = 1.0

    def k(self, t):
        return np.ones_like(t)

    def dk(self, t):
        return np.zeros_like(t)

    def zk(self, z):
        return np.full(np.shape(z), 1j)

    def dzk(self, z):
        return np.zeros(np.shape(z), dtype=complex)


class _DebyeKernel(_Kernel):
    def __init__(self, tau):
        self.tau = tau
        self.k0 = 1.0 / tau

    def k(self, t):
        return np.exp(-t / self.tau) / self.tau

    def dk(self, t):
        return -np.exp(-t / self.tau) / self.tau**2

    def khat(self, z):
        return 1 / (1 - 1j * z * self.tau)

    def zk(self, z):
        return z / (1 - 1j * z * self.tau)

    def dzk(self, z):
        return 1 / (1 - 1j * z * self.tau) ** 2


class _LorentzKernel(_Kernel):
    def __init__(self, w0, damping):
        self.w0 = w0
        self.damping = damping
        # complex for the overdamped branch, where sin(nu t)/nu becomes sinh
        self.nu = np.sqrt(complex(w0**2 - damping**2 / 4))

    def _sinc(self, t):
        if self.nu == 0:
            return t
        return np.real(np.sin(self.nu * t) / self.nu)

    def k(self, t):
        return np.exp(-self.damping * t / 2) * self._sinc(t)

    def dk(self, t):
        c = np.real(np.cos(self.nu * t))
        return np.exp(-self.damping * t / 2) * (c - 0.5 * self.damping * self._sinc(t))

    def _den(self, z):
        return self.w0**2 - z**2 - 1j * self.damping * z

    def khat(self, z):
        return 1 / self._den(z)

    def zk(self, z):
        return z / self._den(z)

    def dzk(self, z):
        return (self.w0**2 + z**2) / self._den(z) ** 2


class _PowerKernel(_Kernel):
    def __init__(self, alpha):
        self.alpha = alpha
        self.k0 = 1.0 if alpha == 0 else 0.0
        self.c = 1j * gamma_fn(alpha + 1) * np.exp(0.5j * np.pi * alpha)

    def k(self, t):
        return np.power(t, self.alpha)

    def dk(self, t):
        if self.alpha == 0:
            return np.zeros_like(t)
        with np.errstate(divide="ignore"):
            return self.alpha * np.power(t, self.alpha - 1)

    def zk(self, z):
        return self.c * np.power(z, -self.alpha)

    def dzk(self, z):
        return -self.alpha * self.c * np.power(z, -self.alpha - 1)

    def khat(self, z):
        return self.c * np.power(z, -self.alpha - 1)


class SusceptibilityModel:
    """Base class; concrete variants below."""

    stress_dim: int

    def terms(self):
        """List of (kernel, parameter) pairs whose sum is the model."""
        raise NotImplementedError

    @property
    def is_diagonal(self):
        return all(p.ndim == 1 for _, p in self.terms())

    # compact evaluation: (..., m) if diagonal else (..., m, m)
    def _combine(self, fn, x, dtype):
        x = np.asarray(x)
        m = self.stress_dim
        diag = self.is_diagonal
        shape = x.shape + ((m,) if diag else (m, m))
        out = np.zeros(shape, dtype=dtype)
        for kern, p in self.terms():
            val = fn(kern, x)
            if diag:
                out += val[..., None] * p
            else:
                out += val[..., None, None] * _to_dense(p)
        return out

    def expand(self, compact):
        """Turn a compact evaluation into full matrices."""
        if not self.is_diagonal:
            return compact
        m = self.stress_dim
        out = np.zeros(compact.shape + (m,), dtype=compact.dtype)
        idx = np.arange(m)
        out[..., idx, idx] = compact
        return out

    def chi(self, t, compact=False):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise NegativeTime("susceptibility evaluated at negative time")
        c = self._combine(lambda k, x: k.k(x), t, float)
        return c if compact else self.expand(c)

    def dchi(self, t, compact=False):
        t = np.asarray(t, dtype=float)
        c = self._combine(lambda k, x: k.dk(x), t, float)
        return c if compact else self.expand(c)

    def chi0(self, compact=False):
        """χ(0+), the weight of the instantaneous friction."""
        c = self._combine(lambda k, x: np.asarray(k.k0, dtype=float), 0.0, float)
        return c if compact else self.expand(c)

    def _checked(self, fn, z, compact):
        z = _complex_upper(z)
        if np.any(z.imag < 0):
            raise ValueError("transform requires Im z >= 0")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            c = self._combine(fn, z, complex)
        if not np.all(np.isfinite(c)):
            raise PoleOnAxis("evaluation hits a singularity of the transform")
        return c if compact else self.expand(c)

    def chi_hat(self, z, compact=False):
        return self._checked(lambda k, x: k.khat(x), z, compact)

    def z_chi_hat(self, z, compact=False):
        """z·χ̂(z); finite at z=0 for Markov friction."""
        return self._checked(lambda k, x: k.zk(x), z, compact)

    def dz_z_chi_hat(self, z, compact=False):
        """d/dz [z·χ̂(z)], analytic per variant."""
        return self._checked(lambda k, x: k.dzk(x), z, compact)

    def phi(self, w, compact=False):
        w = np.asarray(w, dtype=float)
        return self.z_chi_hat(w, compact=compact).imag


def _check_dim(p, dim):
    n = p.shape[0]
    if dim is not None and n != dim:
        raise DimensionMismatch(f"parameter has dimension {n}, expected {dim}")
    return n


@dataclass(frozen=True, eq=False)
class Zero(SusceptibilityModel):
    stress_dim: int = 1

    def terms(self):
        return []

    @property
    def is_diagonal(self):
        return True


@dataclass(frozen=True, eq=False)
class Markov(SusceptibilityModel):
    """Instantaneous friction: χ(t) = γ for t > 0."""

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _as_param(self.gamma))

    @property
    def stress_dim(self):
        return self.gamma.shape[0]

    def terms(self):
        return [(_MarkovKernel(), self.gamma)]


@dataclass(frozen=True, eq=False)
class Debye(SusceptibilityModel):
    """Relaxation: χ(t) = (Δ/τ) exp(-t/τ)."""

    delta: np.ndarray
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "delta", _as_param(self.delta))
        if not self.tau > 0:
            raise ValueError("Debye relaxation time must be positive")

    @property
    def stress_dim(self):
        return self.delta.shape[0]

    def terms(self):
        return [(_DebyeKernel(float(self.tau)), self.delta)]


@dataclass(frozen=True, eq=False)
class Lorentz(SusceptibilityModel):
    """Resonance: χ(t) = S exp(-γt/2) sin(νt)/ν, ν² = ω₀² - γ²/4."""

    strength: np.ndarray
    w0: float
    damping: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "strength", _as_param(self.strength))
        if not self.w0 > 0 or self.damping < 0:
            raise ValueError("Lorentz needs w0 > 0 and damping >= 0")

    @property
    def stress_dim(self):
        return self.strength.shape[0]

    def terms(self):
        return [(_LorentzKernel(float(self.w0), float(self.damping)), self.strength)]


@dataclass(frozen=True, eq=False)
class PowerLaw(SusceptibilityModel):
    """χ(t) = scale · t^α with 0 <= α <= 1/3.

    ``scale`` is only required to be symmetric so that PDC-violating
    kernels such as -t^0.2 can be represented and rejected downstream.
    """

    alpha: float
    scale: np.ndarray = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scale", _as_param(self.scale))
        if not 0 <= self.alpha <= 1 / 3:
            raise ValueError("power-law exponent must lie in [0, 1/3]")

    @property
    def stress_dim(self):
        return self.scale.shape[0]

    def terms(self):
        return [(_PowerKernel(float(self.alpha)), self.scale)]


@dataclass(frozen=True, eq=False)
class Sum(SusceptibilityModel):
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("Sum needs at least one part")
        dims = {p.stress_dim for p in parts}
        if len(dims) != 1:
            raise DimensionMismatch(f"Sum parts have differing dimensions {dims}")
        object.__setattr__(self, "parts", parts)

    @property
    def stress_dim(self):
        return self.parts[0].stress_dim

    def terms(self):
        out = []
        diag = all(p.is_diagonal for p in self.parts)
        for part in self.parts:
            for kern, p in part.terms():
                out.append((kern, p if diag else _to_dense(p)))
        return out


@dataclass(frozen=True, eq=False)
class Conjugated(SusceptibilityModel):
    """C·χ·Cᵀ.  A vector C means diag(C) and keeps diagonal bases diagonal."""

    base: SusceptibilityModel
    C: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.C, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1)
        if c.ndim == 1 and c.shape[0] != self.base.stress_dim:
            raise DimensionMismatch("diagonal congruence must match the base dimension")
        if c.ndim == 2 and c.shape[1] != self.base.stress_dim:
            raise DimensionMismatch("congruence columns must match the base dimension")
        object.__setattr__(self, "C", c)

    @property
    def stress_dim(self):
        return self.C.shape[0]

    def terms(self):
        c = self.C
        out = []
        for kern, p in self.base.terms():
            if c.ndim == 1 and p.ndim == 1:
                out.append((kern, c * p * c))
            else:
                cm = np.diag(c) if c.ndim == 1 else c
                out.append((kern, cm @ _to_dense(p) @ cm.T))
        return out

    @property
    def is_diagonal(self):
        return self.C.ndim == 1 and self.base.is_diagonal


@dataclass(frozen=True, eq=False)
class Embedded(SusceptibilityModel):
    """``base`` acting on the listed channels of a larger stress space."""

    base: SusceptibilityModel
    channels: np.ndarray
    dim: int

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=int).reshape(-1)
        if len(ch) != self.base.stress_dim:
            raise DimensionMismatch("one channel per base dimension is required")
        if len(ch) and (ch.min() < 0 or ch.max() >= self.dim):
            raise DimensionMismatch("channel index outside the stress space")
        object.__setattr__(self, "channels", ch)

    @property
    def stress_dim(self):
        return int(self.dim)

    def terms(self):
        out = []
        ch = self.channels
        for kern, p in self.base.terms():
            if p.ndim == 1:
                q = np.zeros(self.dim)
                q[ch] = p
            else:
                q = np.zeros((self.dim, self.dim))
                q[np.ix_(ch, ch)] = p
            out.append((kern, q))
        return out


def chi_time(model, t):
    """χ(t) as full symmetric matrices; raises NegativeTime for t < 0."""
    return model.chi(t)


def odd_extension(model, tau):
    """χᵒ(τ): χ(τ) for τ > 0 and -χ(-τ)ᵀ for τ < 0."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau == 0):
        if np.any(model.chi0(compact=True) != 0):
            raise UndefinedAtZero("odd extension is discontinuous at 0")
    out = model.chi(np.abs(tau))
    sign = np.sign(tau)
    return out * sign[..., None, None]


def chi_hat(model, z):
    """Fourier–Laplace transform χ̂(z) for Im z >= 0 (boundary = analytic limit)."""
    return model.chi_hat(z)


def phi_boundary(model, w):
    """Dissipation density Φ(ω + i0) = Im{ω χ̂(ω + i0)}."""
    return model.phi(w)


@dataclass(frozen=True)
class PdcReport:
    grid: np.ndarray
    min_eig: float
    worst_point: tuple
    passed: bool


def _min_eig(mats, diagonal):
    if diagonal:
        return mats.min(axis=-1)
    return np.linalg.eigvalsh(mats)[..., 0]


def check_pdc(model, omega_grid, eta_grid=(), pdc_tol=PDC_TOL):
    """Minimum eigenvalue of Im{ζ χ̂(ζ)} over ζ = ω + iη, always including η = 0.

    Singular probe points (poles on the axis) are skipped.
    """
    omega = np.asarray(omega_grid, dtype=float)
    eta = np.unique(np.concatenate([[0.0], np.asarray(eta_grid, dtype=float)]))
    if np.any(eta < 0):
        raise ValueError("eta grid must be non-negative")
    zz = (omega[None, :] + 1j * eta[:, None]).ravel()
    diag = model.is_diagonal
    vals = np.full(zz.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mats = model._combine(lambda k, x: k.zk(x), _complex_upper(zz), complex).imag
    finite = np.all(np.isfinite(mats.reshape(len(zz), -1)), axis=1)
    if np.any(finite):
        vals[finite] = _min_eig(mats[finite], diag)
    i = int(np.argmin(vals))
    min_eig = float(vals[i]) if np.isfinite(vals[i]) else 0.0
    worst = (float(zz[i].real), float(zz[i].imag))
    return PdcReport(
        grid=np.stack([zz.real, zz.imag], axis=1),
        min_eig=min_eig,
        worst_point=worst,
        passed=bool(min_eig >= -pdc_tol),
    )


@dataclass(frozen=True)
class FrictionFunction:
    """a(t) = dirac_weight·δ(t) + smooth_part(t), with dirac_weight = χ(0+)."""

    dirac_weight: np.ndarray
    smooth_part: Callable = field(repr=False)


def friction_function(model):
    return FrictionFunction(dirac_weight=model.chi0(), smooth_part=model.dchi)
