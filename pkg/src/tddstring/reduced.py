"""Reference solvers that never build the string.

``solve_lossless`` propagates the dispersionless system exactly through
matrix exponentials; ``solve_volterra`` marches the convolution material
relation directly.  ``friction_work`` evaluates the work done by the memory
term from a stress history alone.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad_vec
from scipy.linalg import LinAlgError, expm, lu_factor, lu_solve
from scipy.signal import fftconvolve

from .errors import SingularStep, UndefinedAtZero
from .linalg import skew_exp

GAUSS_NODES = 8


@dataclass(eq=False)
class ReducedTrajectory:
    t: np.ndarray
    u: np.ndarray
    f: np.ndarray

    def table(self):
        header = (["t"] + [f"u{i}" for i in range(self.u.shape[1])]
                  + [f"f{i}" for i in range(self.f.shape[1])])
        return header, np.column_stack([self.t, self.u, self.f])


def _dense(a):
    return a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)


def _n_steps(T, dt):
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be a positive integer multiple of the step")
    return n


def solve_lossless(spec, u0, T, sample_dt, drive=None):
    """Exact lossless evolution sampled every ``sample_dt``.

    Without drive, f(t) = exp(t KJKᵀ) K u₀ and ∫₀ᵗ f comes from the
    exponential of the augmented generator [[KJKᵀ, 0], [I, 0]].  A drive is
    added by Duhamel's formula with Gauss-Legendre quadrature on each sample
    interval.
    """
    K = _dense(spec.K)
    J = _dense(spec.J)
    u0 = np.asarray(u0, dtype=float)
    m = K.shape[0]
    g = K @ J @ K.T
    n = _n_steps(T, sample_dt)
    ts = sample_dt * np.arange(n + 1)
    f0 = K @ u0
    aug = np.zeros((2 * m, 2 * m))
    aug[:m, :m] = g
    aug[m:, :m] = np.eye(m)
    jkt = J @ K.T

    if drive is None:
        fs = np.stack([skew_exp(g, t) @ f0 for t in ts])
        ws = np.stack([(expm(t * aug)[m:, :m]) @ f0 for t in ts])
        us = u0 + ws @ jkt.T
        return ReducedTrajectory(t=ts, u=us, f=fs)

    x, wq = np.polynomial.legendre.leggauss(GAUSS_NODES)
    sq = 0.5 * sample_dt * (x + 1)
    wq = 0.5 * sample_dt * wq
    step = expm(sample_dt * aug)
    kernels = [expm((sample_dt - s) * aug)[:, :m] for s in sq]
    z = np.concatenate([f0, np.zeros(m)])
    r_int = np.zeros_like(u0)
    fs = [f0]
    us = [u0.copy()]
    for k in range(n):
        rho = [np.asarray(drive(ts[k] + s), dtype=float) for s in sq]
        z = step @ z + sum(w * (e @ (K @ r)) for w, e, r in zip(wq, kernels, rho))
        r_int = r_int + sum(w * r for w, r in zip(wq, rho))
        fs.append(z[:m].copy())
        us.append(u0 + jkt @ z[m:] + r_int)
    return ReducedTrajectory(t=ts, u=np.array(us), f=np.array(fs))


def solve_volterra(spec, model, drive, dt, T, u0=None):
    """Trapezoidal marching of u̇ = JKᵀf + ρ, Ku = f + ∫₀ᵗχ(τ)f(t-τ)dτ.

    Starts from rest (or impulsively from ``u0`` with f(0) = K u₀).  The
    history is kept in full and stored reversed, so each step's convolution
    is one contiguous dot product per active channel.
    """
    K = _dense(spec.K)
    J = _dense(spec.J)
    m, n_v = K.shape
    n = _n_steps(T, dt)
    ts = dt * np.arange(n + 1)
    chi = model.chi(ts, compact=True)
    diag = model.is_diagonal
    if diag:
        active = np.flatnonzero(np.any(chi != 0, axis=0))
    else:
        active = np.flatnonzero(np.any(chi != 0, axis=(0, 2)))

    chi0 = np.diag(chi[0]) if diag else chi[0]
    mat = np.eye(m) + 0.5 * dt * chi0 - 0.5 * dt * (K @ J @ K.T)
    try:
        with np.errstate(all="raise"):
            lu = lu_factor(mat, check_finite=True)
        if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.max(np.abs(lu[0])):
            raise SingularStep("midpoint stress matrix is singular")
    except (LinAlgError, FloatingPointError, ValueError) as exc:
        raise SingularStep(str(exc)) from exc

    rho = np.zeros(n_v) if drive is None else None
    u = np.zeros(n_v) if u0 is None else np.array(u0, dtype=float)
    jkt = J @ K.T
    us = np.empty((n + 1, n_v))
    fs = np.empty((n + 1, m))
    us[0] = u
    fs[0] = K @ u
    na = len(active)
    if diag:
        kern = np.ascontiguousarray(chi[:, active].T)            # (na, n+1)
    else:
        kern = np.ascontiguousarray(chi[:, active][:, :, active])  # (n+1, na, na)
    rev = np.zeros((na, n + 1))                                  # rev[:, n-j] = f_j
    rev[:, n] = fs[0][active]

    def rho_at(t):
        return rho if drive is None else np.asarray(drive(t), dtype=float)

    r_prev = rho_at(0.0)
    for k in range(1, n + 1):
        r_now = rho_at(ts[k])
        hist = np.zeros(na)
        if na:
            lo = n - k + 1
            if diag:
                for a in range(na):
                    hist[a] = np.dot(kern[a, 1:k], rev[a, lo:n]) + 0.5 * kern[a, k] * rev[a, n]
            else:
                hist = np.tensordot(kern[1:k], rev[:, lo:n].T, axes=([0, 2], [0, 1]))
                hist += 0.5 * kern[k] @ rev[:, n]
        u_half = u + 0.5 * dt * (jkt @ fs[k - 1] + r_now + r_prev)
        rhs = K @ u_half
        rhs[active] -= dt * hist
        f = lu_solve(lu, rhs)
        u = u_half + 0.5 * dt * (jkt @ f)
        fs[k] = f
        us[k] = u
        if na:
            rev[:, n - k] = f[active]
        r_prev = r_now
    return ReducedTrajectory(t=ts, u=us, f=fs)


def _bspline_slope(v):
    """sign(v)·P'(|v|) for the cubic B-spline P (the autocorrelation of a hat)."""
    a = np.abs(v)
    inner = -2 * a + 1.5 * a * a
    outer = -0.5 * (2 - a) ** 2
    return np.sign(v) * np.where(a <= 1, inner, np.where(a <= 2, outer, 0.0))


def _odd_chi(model, x):
    """χᵒ(x) compact, x ≠ 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise UndefinedAtZero("odd extension evaluated at 0")
    return np.sign(x)[(...,) + (None,) * (1 if model.is_diagonal else 2)] * model.chi(
        np.abs(x), compact=True
    )


def _work_kernel(model, dt, n):
    """B_k = ∫ a_e(x) Λ(x - k dt) dx for k = 0..n-1, Λ = hat ⋆ hat.

    Integration by parts moves the derivative of a_e = ∂χᵒ (including its
    jump at 0) onto Λ, leaving χᵒ against a piecewise quadratic on four
    unit cells, each integrated by Gauss-Legendre.  Cells that end at the
    origin are done adaptively to absorb non-smooth behaviour there.
    """
    x, w = np.polynomial.legendre.leggauss(GAUSS_NODES)
    k = np.arange(n)
    diag = model.is_diagonal
    tail = (None,) * (1 if diag else 2)
    out = 0.0
    for c in (-2, -1, 0, 1):
        v = c + 0.5 * (x + 1)                          # nodes inside [c, c+1]
        pos = dt * (k[:, None] + v[None, :])           # never 0: v not integer
        vals = _odd_chi(model, pos)
        wt = (0.5 * w * _bspline_slope(v))[(None, slice(None)) + tail]
        out = out + np.sum(vals * wt, axis=1)
    out = -dt * out

    for kk in range(min(n, 3)):
        acc = 0.0
        for c in (-2, -1, 0, 1):
            if not (c <= -kk <= c + 1):
                continue

            def integrand(v, kk=kk):
                return _odd_chi(model, dt * (kk + v)) * _bspline_slope(v)

            acc = acc + quad_vec(integrand, c, c + 1, epsabs=1e-15, epsrel=1e-13)[0]
            v = c + 0.5 * (x + 1)
            approx = np.sum(_odd_chi(model, dt * (kk + v)) * (0.5 * w * _bspline_slope(v))[
                (slice(None),) + tail], axis=0)
            acc = acc - approx
        out[kk] = out[kk] - dt * acc
    return out


def friction_work(model, f_samples, dt):
    """Work done on the system by the memory term, -½∬⟨f, a_e(t-τ) f⟩.

    ``f_samples`` (N, m) is read as the piecewise-linear interpolant of the
    samples (the function the trapezoid rule integrates).  For that function
    the double integral is evaluated exactly up to quadrature of χ, so the
    result inherits the sign of the dissipation density.
    """
    f = np.asarray(f_samples, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    n, m = f.shape
    if n == 0 or not np.any(f):
        return 0.0
    b = _work_kernel(model, dt, n)
    diag = model.is_diagonal
    total = 0.0
    pairs = [(a, a) for a in range(m)] if diag else [(a, c) for a in range(m) for c in range(m)]
    for a, c in pairs:
        ker = b[:, a] if diag else b[:, a, c]
        if not np.any(ker):
            continue
        # corr[k] = Σ_i f_{i,a} f_{i-k,c} for lags k >= 0, and the mirror for k < 0
        full = fftconvolve(f[:, a], f[::-1, c])
        pos = full[n - 1:]
        neg = full[n - 1::-1]
        total += ker[0] * pos[0] + np.dot(ker[1:], pos[1:]) + np.dot(ker[1:], neg[1:])
    return float(-0.5 * total)
