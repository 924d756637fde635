"""
Spectral calculus for real symmetric matrices.

Every matrix function here goes through one symmetric eigendecomposition
(``numpy.linalg.eigh``); there is no Pade or scaling-and-squaring path.
Matrices are plain ``numpy.ndarray`` objects; the ``as_sym`` / ``as_spd``
validators are the only gatekeepers.
"""
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

SYM_RTOL = 1e-12
# smallest admissible lambda_min / lambda_max for an SPD input
SPD_RCOND = 1e-10


class SpectralDecomposition(NamedTuple):
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q, lam = self.eigenvectors, self.eigenvalues
        return (Q * lam) @ Q.T


def as_sym(A, name: str = "matrix") -> np.ndarray:
    """Validate ``A`` as a square symmetric real matrix and return it as float64.

    Raises
    ------
    ValidationError
        If ``A`` is not square, not finite, or not symmetric within
        ``1e-12 * max(1, |a_ij|)`` entrywise.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.any(np.abs(A - A.T) > SYM_RTOL * np.maximum(1.0, np.abs(A))):
        raise ValidationError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def as_spd(A, name: str = "matrix") -> np.ndarray:
    """Validate ``A`` as symmetric positive definite.

    Matrices whose smallest eigenvalue is at most ``1e-10`` times the
    largest are rejected outright; nothing is clipped.
    """
    A = as_sym(A, name)
    lam = np.linalg.eigvalsh(A)
    if lam[-1] <= 0 or lam[0] <= SPD_RCOND * lam[-1]:
        raise DomainError(
            f"{name} is not positive definite (eigenvalue range [{lam[0]:.3g}, {lam[-1]:.3g}])"
        )
    return A


def check_same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise ValidationError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def sym_eig(A) -> SpectralDecomposition:
    """Symmetric eigendecomposition with ascending eigenvalues."""
    A = as_sym(A)
    lam, Q = np.linalg.eigh(A)
    return SpectralDecomposition(lam, Q)


def apply_spectral(A, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Return ``Q fn(Lambda) Q^T`` for symmetric ``A``.

    No validation beyond symmetry; callers check the domain of ``fn``.
    """
    lam, Q = sym_eig(A)
    out = (Q * fn(lam)) @ Q.T
    return 0.5 * (out + out.T)


def _spd_eig(A) -> SpectralDecomposition:
    A = as_spd(A)
    lam, Q = np.linalg.eigh(A)
    return SpectralDecomposition(lam, Q)


def _rebuild(Q, vals):
    out = (Q * vals) @ Q.T
    return 0.5 * (out + out.T)


def logm_spd(A) -> np.ndarray:
    """Principal matrix logarithm of an SPD matrix."""
    lam, Q = _spd_eig(A)
    return _rebuild(Q, np.log(lam))


def expm_sym(A) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (always SPD)."""
    return apply_spectral(A, np.exp)


def sqrtm_spd(A) -> np.ndarray:
    """Principal square root of an SPD matrix."""
    lam, Q = _spd_eig(A)
    return _rebuild(Q, np.sqrt(lam))


def sandwich(S, X) -> np.ndarray:
    """``S X S^T`` made exactly symmetric; rounding otherwise breaks symmetry for ill-conditioned ``S``."""
    Y = S @ X @ S.T
    return 0.5 * (Y + Y.T)


def invsqrtm_spd(A) -> np.ndarray:
    lam, Q = _spd_eig(A)
    return _rebuild(Q, 1.0 / np.sqrt(lam))


def powm_spd(A, p: float) -> np.ndarray:
    """``A**p`` for real ``p`` via the spectral route."""
    lam, Q = _spd_eig(A)
    return _rebuild(Q, lam ** p)


def inv_spd(A) -> np.ndarray:
    lam, Q = _spd_eig(A)
    return _rebuild(Q, 1.0 / lam)


def logdet_spd(A) -> float:
    """``log det A`` computed as the sum of log-eigenvalues."""
    lam, _ = _spd_eig(A)
    return float(np.sum(np.log(lam)))


def solve_lyapunov(P, V) -> np.ndarray:
    """Solve ``X P + P X = V`` for symmetric ``X`` given SPD ``P``.

    In the eigenbasis of ``P`` the equation decouples entrywise:
    ``X'_ij = V'_ij / (p_i + p_j)``.
    """
    lam, Q = _spd_eig(P)
    V = as_sym(V, "V")
    check_same_dim(Q, V)
    Vt = Q.T @ V @ Q
    Xt = Vt / (lam[:, None] + lam[None, :])
    return _rebuild_full(Q, Xt)


def _rebuild_full(Q, M):
    out = Q @ M @ Q.T
    return 0.5 * (out + out.T)


def frobenius_inner(A, B) -> float:
    """``trace(A^T B)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValidationError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(np.sum(A * B))


def rel_fro_error(X, Y) -> float:
    """``||X - Y||_F / max(||Y||_F, 1e-14)``."""
    return float(np.linalg.norm(X - Y) / max(np.linalg.norm(Y), 1e-14))


def random_spd(
    rng: np.random.Generator, n: int, cond: float = 1e3, log_scale: float = 1.0
) -> np.ndarray:
    """Random SPD matrix with log-uniform spectrum in ``[1, cond]``.

    The whole matrix is multiplied by ``exp(U(-log_scale, log_scale))``.
    """
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    scale = np.exp(rng.uniform(-log_scale, log_scale))
    return _rebuild(Q, scale * lam)
