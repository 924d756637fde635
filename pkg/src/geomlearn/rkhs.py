"""
Kernel mean embeddings, MMD, correct losses on finite spaces, and
Log-Hilbert-Schmidt distances between regularized RKHS covariance operators.

All RKHS quantities are expressed through Gram matrices, so nothing here
ever materializes a feature map.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import NumericalError, ValidationError
from .kernels import KernelSpec, cross_gram, euclidean_gaussian
from .markov import JointMeasure, MarkovKernel, _check_space

MMD_CLIP = 1e-12
BLOCK_CLIP = 1e-10
LOGHS_CLIP = 1e-9


@dataclass(frozen=True, eq=False)
class Sample:
    """Weighted point sample; rows of ``points`` are observations."""

    points: np.ndarray = field(repr=False)
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValidationError("a sample needs at least one point")
        if not np.all(np.isfinite(X)):
            raise ValidationError("non-finite sample coordinates")
        if self.weights is None:
            w = np.full(X.shape[0], 1.0 / X.shape[0])
        else:
            w = np.asarray(self.weights, dtype=float).reshape(-1)
            if w.shape[0] != X.shape[0]:
                raise ValidationError("one weight per point is required")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValidationError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", X)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def compress(self) -> "Sample":
        """Merge repeated points, summing their weights."""
        uniq, inv = np.unique(self.points, axis=0, return_inverse=True)
        w = np.bincount(inv.reshape(-1), weights=self.weights, minlength=uniq.shape[0])
        return Sample(uniq, w / w.sum())


def _vec_spec(spec: KernelSpec):
    if spec.domain != "vector":
        raise ValidationError("mmd works on vector samples; embed matrices first")


def mmd(spec: KernelSpec, S1: Sample, S2: Sample) -> float:
    """Distance between the kernel mean embeddings of two weighted samples.

    Plug-in (V-statistic) form
    ``sqrt(w'K11w - 2 w'K12v + v'K22v)``; values in ``[-1e-12, 0)`` are
    clipped to zero.
    """
    _vec_spec(spec)
    if S1.points.shape[1] != S2.points.shape[1]:
        raise ValidationError("samples live in different dimensions")
    if _order_key(S2.points, S2.weights) < _order_key(S1.points, S1.weights):
        # canonical argument order makes the result symmetric to the last bit
        S1, S2 = S2, S1
    X, Y = list(S1.points), list(S2.points)
    w, v = S1.weights, S2.weights
    sq = (
        w @ cross_gram(spec, X, X) @ w
        - 2.0 * w @ cross_gram(spec, X, Y) @ v
        + v @ cross_gram(spec, Y, Y) @ v
    )
    return _clipped_sqrt(sq, MMD_CLIP, "squared MMD")


def _order_key(points: np.ndarray, weights, extra: float = 0.0):
    return (points.shape, extra, points.tobytes(), np.asarray(weights).tobytes())


def _clipped_sqrt(sq: float, tol: float, what: str) -> float:
    if sq < 0:
        if sq < -tol:
            raise NumericalError(f"{what} is negative ({sq:.3g})")
        sq = 0.0
    return float(np.sqrt(sq))


def concentration_bound(n: int, eps: float, kbar: float = 1.0) -> float:
    """``2 sqrt(kbar/n) + sqrt(2 log(1/eps) / n)``.

    With probability at least ``1 - eps`` the embedding of an n-point iid
    empirical measure lies within this distance of the true embedding,
    provided the kernel's unit ball consists of functions bounded by one
    (checked by the caller, e.g. ``k(y, y) <= 1``).

    Examples
    --------
    >>> round(concentration_bound(100, 0.1, 1.0), 6)
    0.414599
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    if not 0 < eps < 1:
        raise ValidationError("eps must lie in (0, 1)")
    if kbar < 0:
        raise ValidationError("kbar must be nonnegative")
    return float(2.0 * np.sqrt(kbar / n) + np.sqrt(2.0 * np.log(1.0 / eps) / n))


class ConcentrationResult(NamedTuple):
    rate: float
    failures: int
    trials: int
    bound: float
    kbar: float
    proxy_size: int
    proxy_error: float


def concentration_montecarlo(
    spec: KernelSpec,
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    proxy_factor: int = 50,
) -> ConcentrationResult:
    """Empirical failure rate of the concentration bound.

    The true embedding is replaced by that of a held-out sample of size
    ``proxy_factor * n``.  ``proxy_error`` is ``sqrt(kbar / proxy_size)``,
    the root-mean-square embedding error of that proxy, i.e. the slack one
    should allow on the bound when reading the rate.  Repeated points are
    merged before any Gram matrix is formed, so discrete laws are cheap.
    """
    _vec_spec(spec)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    ref = Sample(sampler(rng, proxy_factor * n)).compress()
    kbar = float(np.mean([cross_gram(spec, [x], [x])[0, 0] for x in ref.points[:1000]]))
    bound = concentration_bound(n, eps, kbar)
    failures = 0
    for _ in range(trials):
        emp = Sample(sampler(rng, n)).compress()
        if mmd(spec, emp, ref) > bound:
            failures += 1
    m = proxy_factor * n
    return ConcentrationResult(failures / trials, failures, trials, bound, kbar, m, float(np.sqrt(kbar / m)))


# ---------------------------------------------------------------- correct loss


@lru_cache(maxsize=64)
def simplex_embedding(p: int, q: int) -> np.ndarray:
    """Points ``e_x + e_{p+y}`` in ``R^{p+q}`` for the cells of a p x q product, row-major."""
    E = np.eye(p + q)
    out = np.array([E[x] + E[p + y] for x in range(p) for y in range(q)])
    out.setflags(write=False)
    return out


def _graph_gap(h: MarkovKernel, mu: JointMeasure) -> np.ndarray:
    _check_space(h.source, mu.xspace, "correct_loss")
    _check_space(h.target, mu.yspace, "correct_loss")
    marg = mu.table.sum(axis=1)
    gap = np.zeros_like(mu.table)
    pos = marg > 0
    # mu_X (h - mu/mu_X): vanishes bitwise when h is the disintegration of mu
    gap[pos] = marg[pos, None] * (h.rows[pos] - mu.table[pos] / marg[pos, None])
    return gap.reshape(-1)


def correct_loss(
    h: MarkovKernel,
    mu: JointMeasure,
    spec: Optional[KernelSpec] = None,
    embed: Optional[np.ndarray] = None,
) -> float:
    """``|| M_K (Gamma_h)_* mu_X - M_K mu ||`` for finite ``X x Y``.

    Parameters
    ----------
    h : MarkovKernel
        Candidate conditional ``X ~> Y``.
    mu : JointMeasure
        Data distribution on ``X x Y``.
    spec : KernelSpec, optional
        Kernel on the embedded cells; defaults to a unit Gaussian.
    embed : ndarray, optional
        Row ``i`` is the ambient point of cell ``i`` in row-major order.
        Defaults to :func:`simplex_embedding`, which is injective.
    """
    spec = euclidean_gaussian(gamma=1.0) if spec is None else spec
    p, q = mu.table.shape
    pts = simplex_embedding(p, q) if embed is None else np.asarray(embed, dtype=float)
    if pts.shape[0] != p * q:
        raise ValidationError(f"embedding needs {p * q} rows")
    w = _graph_gap(h, mu)
    G = cross_gram(spec, list(pts), list(pts))
    return _clipped_sqrt(w @ G @ w, MMD_CLIP, "squared loss")


# ---------------------------------------------------------------- covariance operators


@dataclass(frozen=True, eq=False)
class RegularizedCovariancePair:
    """Two datasets (columns are observations) with their regularizers.

    Represents ``C_{Phi(X1)} + gamma1 I`` and ``C_{Phi(X2)} + gamma2 I`` for
    the feature map of ``spec``.
    """

    data1: np.ndarray = field(repr=False)
    data2: np.ndarray = field(repr=False)
    gamma1: float = 1.0
    gamma2: float = 1.0
    spec: KernelSpec = field(default_factory=lambda: euclidean_gaussian(gamma=1.0))

    def __post_init__(self):
        for name in ("data1", "data2"):
            X = np.asarray(getattr(self, name), dtype=float)
            if X.ndim == 1:
                X = X[:, None]
            if X.ndim != 2 or X.shape[1] < 1 or not np.all(np.isfinite(X)):
                raise ValidationError(f"{name} must be a finite d x m matrix with m >= 1")
            object.__setattr__(self, name, X)
        if self.data1.shape[0] != self.data2.shape[0]:
            raise ValidationError("datasets have different ambient dimensions")
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValidationError("regularizers must be positive")
        _vec_spec(self.spec)

    def swapped(self) -> "RegularizedCovariancePair":
        return RegularizedCovariancePair(self.data2, self.data1, self.gamma2, self.gamma1, self.spec)


class GramBlocks(NamedTuple):
    AA: np.ndarray
    BB: np.ndarray
    AB: np.ndarray
    BA: np.ndarray


def centering(m: int) -> np.ndarray:
    """``J_m = I - 11^T / m``."""
    return np.eye(m) - np.full((m, m), 1.0 / m)


def cov_gram_blocks(pair: RegularizedCovariancePair) -> GramBlocks:
    """Centered, scaled Gram blocks.

    ``A*A = J K[X1] J / (m1 g1)``, ``B*B = J K[X2] J / (m2 g2)`` and
    ``A*B = J K[X1, X2] J / sqrt(m1 m2 g1 g2)``, ``B*A = (A*B)^T``.
    """
    X1, X2 = list(pair.data1.T), list(pair.data2.T)
    m1, m2 = len(X1), len(X2)
    J1, J2 = centering(m1), centering(m2)
    g1, g2 = pair.gamma1, pair.gamma2
    AA = J1 @ cross_gram(pair.spec, X1, X1) @ J1 / (m1 * g1)
    BB = J2 @ cross_gram(pair.spec, X2, X2) @ J2 / (m2 * g2)
    AB = J1 @ cross_gram(pair.spec, X1, X2) @ J2 / np.sqrt(m1 * m2 * g1 * g2)
    return GramBlocks(0.5 * (AA + AA.T), 0.5 * (BB + BB.T), AB, AB.T.copy())


def _psd_eig(S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lam, U = np.linalg.eigh(S)
    floor = -BLOCK_CLIP * max(1.0, abs(lam[-1]))
    if lam[0] < floor:
        raise NumericalError(f"Gram block has a negative eigenvalue {lam[0]:.3g}")
    return np.clip(lam, 0.0, None), U


def log1p_over(lam: np.ndarray) -> np.ndarray:
    """``h(l) = log(1 + l) / l`` with ``h(0) = 1``."""
    lam = np.asarray(lam, dtype=float)
    small = np.abs(lam) < 1e-8
    safe = np.where(small, 1.0, lam)
    return np.where(small, 1.0 - lam / 2.0, np.log1p(lam) / safe)


def _canonical(pair: RegularizedCovariancePair) -> RegularizedCovariancePair:
    k1 = _order_key(pair.data1.T, (), pair.gamma1)
    k2 = _order_key(pair.data2.T, (), pair.gamma2)
    return pair.swapped() if k2 < k1 else pair


def _loghs_parts(pair: RegularizedCovariancePair):
    """Self terms and cross trace, evaluated in canonical argument order."""
    b = cov_gram_blocks(_canonical(pair))
    la, Ua = _psd_eig(b.AA)
    lb, Ub = _psd_eig(b.BB)
    hA = (Ua * log1p_over(la)) @ Ua.T
    hB = (Ub * log1p_over(lb)) @ Ub.T
    cross = float(np.trace(b.BA @ hA @ b.AB @ hB))
    return float(np.sum(np.log1p(la) ** 2)), float(np.sum(np.log1p(lb) ** 2)), cross


def loghs_cov_distance(pair: RegularizedCovariancePair) -> float:
    """Log-Hilbert-Schmidt distance between the two regularized covariance operators.

    ``d^2 = ||log(I + A*A)||^2 + ||log(I + B*B)||^2
    - 2 tr[B*A h(A*A) A*B h(B*B)] + log(g2/g1)^2`` with
    ``h(l) = log(1+l)/l``.  This is the infinite-dimensional convention: the
    identity component contributes only through ``log(g2/g1)^2``.
    """
    sa, sb, cross = _loghs_parts(pair)
    sq = sa + sb - 2.0 * cross + (np.log(pair.gamma2) - np.log(pair.gamma1)) ** 2
    return _clipped_sqrt(sq, LOGHS_CLIP, "squared Log-HS distance")


def loghs_cov_inner(pair: RegularizedCovariancePair) -> float:
    """Extended Hilbert-Schmidt inner product of the two operator logarithms.

    ``tr[B*A h(A*A) A*B h(B*B)] + log(g1) log(g2)``.
    """
    _, _, cross = _loghs_parts(pair)
    return cross + float(np.log(pair.gamma1) * np.log(pair.gamma2))


def two_layer_distance_matrix(datasets: Sequence[np.ndarray], spec: KernelSpec, gamma: float) -> np.ndarray:
    """Pairwise Log-HS distances between the regularized covariances of ``datasets``."""
    if len(datasets) < 2:
        raise ValidationError("need at least two datasets")
    m = len(datasets)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = loghs_cov_distance(
                RegularizedCovariancePair(datasets[i], datasets[j], gamma, gamma, spec)
            )
    return D


def two_layer_kernel(D: np.ndarray, sigma2: float) -> np.ndarray:
    """Second-layer Gram ``exp(-D^2 / sigma2^2)``."""
    if sigma2 == 0:
        raise ValidationError("sigma2 must be nonzero")
    D = np.asarray(D, dtype=float)
    return np.exp(-(D ** 2) / sigma2 ** 2)


def classify_1nn(distances: Sequence[float], labels: Sequence) -> object:
    """Label of the nearest training item; ties go to the lowest index."""
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise ValidationError("empty training set")
    if d.size != len(labels):
        raise ValidationError("one label per training item is required")
    return labels[int(np.argmin(d))]
