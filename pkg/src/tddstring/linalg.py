"""Dense symmetric and skew-symmetric matrix primitives."""

import numpy as np

from .errors import DimensionMismatch, NonFinite, NotPSD

SYMPLECTIC_TOL = 1e-12


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")
    return a


def symmetrize(a):
    """Return ½(A + Aᵀ) over the last two axes, exactly symmetric in storage."""
    a = np.asarray(a)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def psd_sqrt(m, tol_eig=None):
    """Non-negative symmetric square root of a symmetric PSD matrix.

    Works on a single matrix or a stack (``..., n, n``).  Eigenvalues in
    ``[-tol_eig, 0)`` are clamped to zero; anything more negative raises
    :class:`NotPSD`.  The default tolerance is ``1e-10 * ||M||_2`` per matrix.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has non-finite entries")
    m = symmetrize(m)
    w, v = np.linalg.eigh(m)
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    tol = 1e-10 * scale if tol_eig is None else np.broadcast_to(tol_eig, scale.shape)
    if np.any(w < -tol):
        raise NotPSD(f"minimum eigenvalue {w.min():.3e} below -{np.max(tol):.3e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (v * root[..., None, :]) @ np.swapaxes(v, -1, -2)
    return symmetrize(s)


def skew_exp(a, t=1.0):
    """exp(tA) for a real skew-symmetric A, via the Hermitian matrix iA.

    iA is Hermitian with real eigenvalues λ and unitary eigenvectors V, so
    exp(tA) = V diag(exp(-iλt)) Vᴴ.  The result is real orthogonal.
    """
    a = _square(a, "A")
    if not np.allclose(a, -a.T, atol=1e-14 * (1 + np.abs(a).max())):
        raise DimensionMismatch("A is not skew-symmetric")
    h = 1j * 0.5 * (a - a.T)
    lam, v = np.linalg.eigh(h)
    q = (v * np.exp(-1j * lam * t)) @ v.conj().T
    q = q.real
    if not np.all(np.isfinite(q)):
        raise NonFinite("skew exponential overflowed")
    return q


def check_symplectic(j, tol=SYMPLECTIC_TOL):
    """True iff JᵀJ = I and J² = -I within ``tol`` in Frobenius norm."""
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise DimensionMismatch(f"J must be square, got shape {j.shape}")
    eye = np.eye(j.shape[0])
    return bool(
        np.linalg.norm(j.T @ j - eye) <= tol and np.linalg.norm(j @ j + eye) <= tol
    )


def canonical_j(n):
    """The canonical 2n×2n symplectic matrix [[0, -I], [I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])
