"""Hidden-string coupling synthesized from a susceptibility.

The coupling is ``sigma_hat(κ) = sqrt(2 Φ(κ))`` (PSD square root) on a
uniform grid ``κ_j = j Δκ``, ``0 <= κ_j <= K_max``.  Everything is even in κ,
so only the non-negative half is stored and ``weights`` are the full-line
trapezoid weights (doubled interior weights).

Normalization: ``χ̂(ζ) = (1/2π) ∫ σ̂(κ)² / (κ² - ζ²) dκ`` over the real line.

When Φ tends to a non-zero constant Φ_∞ = χ(0+) the spatial coupling has a
point mass ``d δ(s)`` with ``d = sqrt(2 Φ_∞)``.  If ``Φ - Φ_∞`` is itself PSD,
the point mass is an independent string that acts as memoryless friction
(``split=True``); the remaining modes then carry ``sqrt(2 (Φ - Φ_∞))``.
Otherwise the point mass cannot be separated and the string keeps the full
band-limited coupling (``split=False``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.integrate import quad_vec

from .errors import DimensionMismatch, NotPSD, PoleOnAxis, TailNotResolved
from .linalg import psd_sqrt

TAIL_TOL_REL = 1e-3


def kappa_grid(dk, kmax):
    """Non-negative uniform grid and full-line trapezoid weights."""
    if not dk > 0 or not kmax > 0:
        raise ValueError("grid spacing and cutoff must be positive")
    n = int(round(kmax / dk))
    if abs(n * dk - kmax) > 1e-9 * kmax:
        raise ValueError("cutoff must be an integer multiple of the spacing")
    kappa = dk * np.arange(n + 1)
    w = np.full(n + 1, 2 * dk)
    w[0] = dk
    w[-1] = dk
    return kappa, w


def _sqrt_compact(m, diagonal, tol):
    """PSD square root of compact matrices: elementwise for diagonal storage."""
    if diagonal:
        if np.any(m < -tol):
            raise NotPSD(f"minimum eigenvalue {m.min():.3e} below -{tol:.3e}")
        return np.sqrt(np.clip(m, 0.0, None))
    return psd_sqrt(m, tol_eig=tol)


def _square_compact(s, diagonal):
    return s * s if diagonal else s @ s


def _norms(m, diagonal):
    axes = (-1,) if diagonal else (-2, -1)
    return np.sqrt(np.sum(m * m, axis=axes))


def _phi_on_grid(model, kappa, cell):
    """Φ at grid points; a singular κ = 0 gets the average over its own cell."""
    try:
        return model.phi(kappa, compact=True)
    except PoleOnAxis:
        if kappa[0] != 0:
            raise
        out = np.empty(kappa.shape + model.chi0(compact=True).shape)
        out[1:] = model.phi(kappa[1:], compact=True)
        half = 0.5 * cell
        avg, _ = quad_vec(lambda k: model.phi(k, compact=True), 0.0, half)
        out[0] = avg / half
        return out


@dataclass(frozen=True, eq=False)
class CouplingFunction:
    kappa: np.ndarray
    weights: np.ndarray
    sigma_hat: np.ndarray
    string_sigma_hat: np.ndarray
    phi_inf: np.ndarray
    dirac_weight: np.ndarray
    split: bool
    diagonal: bool
    stress_dim: int
    s_grid: np.ndarray | None = None
    spatial_samples: np.ndarray | None = None

    @property
    def dk(self):
        return float(self.kappa[1] - self.kappa[0])

    @property
    def kmax(self):
        return float(self.kappa[-1])

    @property
    def has_dirac(self):
        return bool(np.any(self.dirac_weight != 0))

    @property
    def markov_friction(self):
        """Memoryless friction weight d²/2 = Φ_∞ carried by the point-mass string."""
        return self.phi_inf if self.split else np.zeros_like(self.phi_inf)

    def expand(self, compact):
        if not self.diagonal:
            return compact
        m = self.stress_dim
        out = np.zeros(compact.shape + (m,), dtype=compact.dtype)
        idx = np.arange(m)
        out[..., idx, idx] = compact
        return out

    def sigma_hat_full(self):
        return self.expand(self.sigma_hat)


def coupling_hat(model, kappa, tol_eig=None):
    """σ̂(κ) = sqrt(2 Φ(κ + i0)) as full symmetric matrices."""
    return psd_sqrt(2 * model.phi(kappa), tol_eig=tol_eig)


def spatial_coupling(model, sigma_of_kappa, ds, n_s, kmax):
    """ς(s_i), s_i = i·ds, by a type-I cosine transform on a fine κ-grid.

    ``sigma_of_kappa`` maps a κ array to compact σ̂ values.  The transform
    is band-limited to ``min(kmax, π/ds)`` and the κ spacing is chosen so the
    implied period in s is at least eight times the requested extent.
    """
    m_fine = 1 << int(np.ceil(np.log2(8 * max(n_s, 2))))
    k_nyq = np.pi / ds
    dkf = k_nyq / m_fine
    kf = dkf * np.arange(m_fine + 1)
    g = sigma_of_kappa(kf)
    g[kf > kmax] = 0.0
    y = dct(g, type=1, axis=0) * dkf / (2 * np.pi)
    return y[:n_s]


def build_coupling(model, dk, kmax, s_grid=None, tail_tol=None, tol_eig=None):
    """Synthesize the coupling for ``model`` on the grid (dk, kmax).

    ``s_grid`` is an optional uniform non-negative grid starting at 0; the
    spatial samples are returned mirrored onto the symmetric grid [-L, L].
    Raises NotPSD when the dissipation density fails the PDC on the grid and
    TailNotResolved when Φ - Φ_∞ has not decayed by ``kmax``.
    """
    kappa, w = kappa_grid(dk, kmax)
    diag = model.is_diagonal
    phi = _phi_on_grid(model, kappa, dk)
    scale = float(np.max(_norms(phi, diag))) if phi.size else 0.0
    tol = 1e-10 * max(2 * scale, 1e-300) if tol_eig is None else tol_eig
    sigma_hat = _sqrt_compact(2 * phi, diag, tol)

    phi_inf = model.chi0(compact=True)
    dirac = _sqrt_compact(2 * phi_inf, diag, tol)
    phi_reg = phi - phi_inf
    tail = float(_norms(phi_reg[-1], diag))
    if tail_tol is None:
        tail_tol = TAIL_TOL_REL * scale
    if tail > tail_tol:
        raise TailNotResolved(
            f"|Φ - Φ_∞| = {tail:.3e} at K_max = {kmax} exceeds {tail_tol:.3e}"
        )

    split = False
    string_sigma = sigma_hat
    if np.any(phi_inf != 0):
        try:
            string_sigma = _sqrt_compact(2 * phi_reg, diag, tol)
            split = True
        except NotPSD:
            string_sigma = sigma_hat

    s_full = samples = None
    if s_grid is not None:
        s = np.asarray(s_grid, dtype=float)
        ds = s[1] - s[0]
        if s[0] != 0 or not np.allclose(np.diff(s), ds, rtol=1e-9, atol=0):
            raise DimensionMismatch("s_grid must be uniform and start at 0")

        def string_sigma_at(k):
            ph = _phi_on_grid(model, k, k[1] - k[0])
            if split:
                ph = ph - phi_inf
            return _sqrt_compact(2 * ph, diag, tol)

        half = spatial_coupling(model, string_sigma_at, ds, len(s), kmax)
        s_full = np.concatenate([-s[:0:-1], s])
        samples = np.concatenate([half[:0:-1], half])

    return CouplingFunction(
        kappa=kappa,
        weights=w,
        sigma_hat=sigma_hat,
        string_sigma_hat=string_sigma,
        phi_inf=phi_inf,
        dirac_weight=dirac,
        split=split,
        diagonal=diag,
        stress_dim=model.stress_dim,
        s_grid=s_full,
        spatial_samples=samples,
    )


def verify_herglotz(coupling, model, zetas):
    """Max relative residual of the κ-integral representation of χ̂ at ``zetas``.

    The quadrature runs over ``σ̂² - 2Φ_∞``; the constant part contributes
    ``iΦ_∞/ζ`` exactly.
    """
    c = coupling
    sq = _square_compact(c.sigma_hat, c.diagonal) - 2 * c.phi_inf
    worst = 0.0
    for z in np.atleast_1d(np.asarray(zetas, dtype=complex)):
        if z.imag <= 0:
            raise ValueError("probes must lie in the open upper half-plane")
        wk = c.weights / (c.kappa**2 - z**2)
        integral = np.tensordot(wk, sq, axes=(0, 0)) / (2 * np.pi)
        integral = integral + 1j * c.phi_inf / z
        exact = model.chi_hat(z, compact=True)
        denom = np.linalg.norm(exact)
        err = np.linalg.norm(integral - exact)
        worst = max(worst, err / denom if denom > 0 else err)
    return worst


def reconstruct_chi(coupling, tau):
    """χ(τ) recovered from the coupling, τ > 0, as full matrices.

    χ(τ) = Φ_∞ + (1/π) Σ_j W_j (σ̂_j²/2 - Φ_∞) sin(κ_j τ)/κ_j.
    """
    c = coupling
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("reconstruction needs τ > 0")
    phi_reg = 0.5 * _square_compact(c.sigma_hat, c.diagonal) - c.phi_inf
    kt = np.outer(tau, c.kappa)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(c.kappa > 0, np.sin(kt) / np.where(c.kappa > 0, c.kappa, 1), tau[:, None])
    out = np.tensordot(sinc * c.weights, phi_reg, axes=(1, 0)) / np.pi + c.phi_inf
    return c.expand(out)


def coupling_table(coupling):
    """Header and rows (κ, entries of σ̂(κ)) for CSV export."""
    full = coupling.sigma_hat_full()
    m = coupling.stress_dim
    header = ["kappa"] + [f"sigma_{i}_{j}" for i in range(m) for j in range(m)]
    rows = np.column_stack([coupling.kappa, full.reshape(len(coupling.kappa), -1)])
    return header, rows
