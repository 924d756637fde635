"""
Riemannian structures on the cone of SPD matrices.

Three geometries are provided: affine-invariant (``ai``), Bures-Wasserstein
(``bw``) and Log-Euclidean (``loge``).  Each comes with a distance, a
geodesic ``gamma(t)`` between two points, and the metric tensor
``g(P)(U, V)`` on symmetric tangent directions.  The Log-Euclidean vector
space operations (``logE_mult``, ``logE_scale``, ``logE_inner``) live here too.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .matfun import (
    as_spd,
    as_sym,
    check_same_dim,
    expm_sym,
    frobenius_inner,
    inv_spd,
    invsqrtm_spd,
    logm_spd,
    powm_spd,
    sandwich,
    solve_lyapunov,
    sqrtm_spd,
    sym_eig,
)

# radicand guard for the trace form of the Bures-Wasserstein distance
BW_RADICAND_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GeodesicQuery:
    a: np.ndarray
    b: np.ndarray
    t: float

    def __post_init__(self):
        a, b = as_spd(self.a, "A"), as_spd(self.b, "B")
        check_same_dim(a, b)
        t = float(self.t)
        if not 0.0 <= t <= 1.0:
            raise ValidationError(f"geodesic parameter t must lie in [0, 1], got {t}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "t", t)


def _pair(A, B):
    A, B = as_spd(A, "A"), as_spd(B, "B")
    check_same_dim(A, B)
    return A, B


def _tangent(P, U, V):
    P = as_spd(P, "P")
    U, V = as_sym(U, "U"), as_sym(V, "V")
    check_same_dim(P, U, V)
    return P, U, V


# ---------------------------------------------------------------- affine-invariant


def ai_distance(A, B) -> float:
    """``||log(A^{-1/2} B A^{-1/2})||_F``."""
    A, B = _pair(A, B)
    Aih = invsqrtm_spd(A)
    lam = sym_eig(sandwich(Aih, B)).eigenvalues
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def ai_geodesic(A, B, t: float) -> np.ndarray:
    """``A^{1/2} exp[t log(A^{-1/2} B A^{-1/2})] A^{1/2}``."""
    q = GeodesicQuery(A, B, t)
    Ah, Aih = sqrtm_spd(q.a), invsqrtm_spd(q.a)
    M = powm_spd(sandwich(Aih, q.b), q.t)
    out = Ah @ M @ Ah
    return 0.5 * (out + out.T)


def ai_metric(P, U, V) -> float:
    """``trace(P^{-1} U P^{-1} V)``."""
    P, U, V = _tangent(P, U, V)
    Pi = inv_spd(P)
    return float(np.trace(Pi @ U @ Pi @ V))


# ---------------------------------------------------------------- Bures-Wasserstein


def bw_distance_trace(A, B) -> float:
    """Trace form ``sqrt(tr A + tr B - 2 tr (A^{1/2} B A^{1/2})^{1/2})``.

    A radicand in ``[-tol, 0)`` is clipped to zero, with ``tol = 1e-10``
    scaled by ``max(1, tr A + tr B)``; anything more negative raises
    :class:`NumericalError`.  Loses about half the significant digits when
    ``A`` and ``B`` are close; see :func:`bw_distance`.
    """
    A, B = _pair(A, B)
    Ah = sqrtm_spd(A)
    mu = sym_eig(sandwich(Ah, B)).eigenvalues
    total = np.trace(A) + np.trace(B)
    r = total - 2.0 * np.sum(np.sqrt(np.clip(mu, 0.0, None)))
    if r < 0:
        if r < -BW_RADICAND_TOL * max(1.0, total):
            raise NumericalError(f"Bures-Wasserstein radicand {r:.3g} is negative")
        r = 0.0
    return float(np.sqrt(r))


def bw_distance(A, B) -> float:
    """Bures-Wasserstein distance in Procrustes form.

    ``d(A, B) = ||A^{1/2} - B^{1/2} U||_F`` with ``U`` the orthogonal polar
    factor of ``B^{1/2} A^{1/2}``.  Algebraically identical to the trace form
    but without the cancellation inside the square root, so ``d(A, A)`` comes
    out at rounding level instead of ``sqrt(eps)``.
    """
    A, B = _pair(A, B)
    Ah, Bh = sqrtm_spd(A), sqrtm_spd(B)
    M = Bh @ Ah
    MtM = M.T @ M
    U = M @ invsqrtm_spd(0.5 * (MtM + MtM.T))
    return float(np.linalg.norm(Ah - Bh @ U))


def bw_geodesic(A, B, t: float) -> np.ndarray:
    """``(1-t)^2 A + t^2 B + t(1-t)[(AB)^{1/2} + (BA)^{1/2}]``.

    ``(AB)^{1/2} = A^{1/2}(A^{1/2} B A^{1/2})^{1/2} A^{-1/2}`` and
    ``(BA)^{1/2}`` is its transpose.
    """
    q = GeodesicQuery(A, B, t)
    Ah, Aih = sqrtm_spd(q.a), invsqrtm_spd(q.a)
    R = Ah @ sqrtm_spd(sandwich(Ah, q.b)) @ Aih
    s = q.t
    out = (1 - s) ** 2 * q.a + s ** 2 * q.b + s * (1 - s) * (R + R.T)
    return 0.5 * (out + out.T)


def bw_metric(P, U, V) -> float:
    """``trace(L_P(U) P L_P(V))`` where ``L_P(U)`` solves ``X P + P X = U``."""
    P, U, V = _tangent(P, U, V)
    return float(np.trace(solve_lyapunov(P, U) @ P @ solve_lyapunov(P, V)))


# ---------------------------------------------------------------- Log-Euclidean


def logE_distance(A, B) -> float:
    """``||log A - log B||_F``."""
    A, B = _pair(A, B)
    return float(np.linalg.norm(logm_spd(A) - logm_spd(B)))


def logE_geodesic(A, B, t: float) -> np.ndarray:
    """``exp((1-t) log A + t log B)``."""
    q = GeodesicQuery(A, B, t)
    return expm_sym((1 - q.t) * logm_spd(q.a) + q.t * logm_spd(q.b))


def logE_mult(A, B) -> np.ndarray:
    """Group product ``A (.) B = exp(log A + log B)``."""
    A, B = _pair(A, B)
    return expm_sym(logm_spd(A) + logm_spd(B))


def logE_scale(lam: float, A) -> np.ndarray:
    """Scalar action ``lam (*) A = exp(lam log A) = A^lam``."""
    return expm_sym(float(lam) * logm_spd(A))


def logE_inner(A, B) -> float:
    """``<log A, log B>_F``."""
    A, B = _pair(A, B)
    return frobenius_inner(logm_spd(A), logm_spd(B))


def logE_norm(A) -> float:
    return float(np.linalg.norm(logm_spd(A)))


def _log_divided_differences(lam: np.ndarray) -> np.ndarray:
    """Loewner matrix ``(log l_i - log l_j)/(l_i - l_j)`` with ``1/l_i`` on ties."""
    li, lj = lam[:, None], lam[None, :]
    diff = li - lj
    close = np.abs(diff) <= 1e-12 * np.maximum(li, lj)
    safe = np.where(close, 1.0, diff)
    # log1p keeps precision when the eigenvalues are near each other
    F = np.log1p(np.where(close, 0.0, diff) / lj) / safe
    return np.where(close, 2.0 / (li + lj), F)


def dlog(P, U) -> np.ndarray:
    """Frechet derivative ``D log(P)(U)`` of the matrix logarithm."""
    P = as_spd(P, "P")
    U = as_sym(U, "U")
    check_same_dim(P, U)
    lam, Q = sym_eig(P)
    out = Q @ (_log_divided_differences(lam) * (Q.T @ U @ Q)) @ Q.T
    return 0.5 * (out + out.T)


def logE_metric(P, U, V) -> float:
    """``<D log(P)(U), D log(P)(V)>_F``."""
    P, U, V = _tangent(P, U, V)
    return frobenius_inner(dlog(P, U), dlog(P, V))


# ---------------------------------------------------------------- dispatch

DISTANCES: Dict[str, Callable[[np.ndarray, np.ndarray], float]] = {
    "ai": ai_distance,
    "bw": bw_distance,
    "loge": logE_distance,
}
GEODESICS = {"ai": ai_geodesic, "bw": bw_geodesic, "loge": logE_geodesic}
METRICS = {"ai": ai_metric, "bw": bw_metric, "loge": logE_metric}


def _lookup(table, metric: str):
    try:
        return table[metric]
    except KeyError:
        raise ValidationError(f"unknown metric {metric!r}; choose from {sorted(table)}") from None


def distance(metric: str, A, B) -> float:
    return _lookup(DISTANCES, metric)(A, B)


def geodesic(metric: str, A, B, t: float) -> np.ndarray:
    return _lookup(GEODESICS, metric)(A, B, t)


def metric_tensor(metric: str, P, U, V) -> float:
    return _lookup(METRICS, metric)(P, U, V)


def pairwise_distances(metric: str, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Symmetric matrix of distances between all pairs of ``mats``."""
    fn = _lookup(DISTANCES, metric)
    m = len(mats)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = fn(mats[i], mats[j])
    return D
