"""
Positive-definite kernels on vectors and SPD matrices, Gram matrices, and
empirical (non-)definiteness checks.

Kernels are described declaratively by :class:`KernelSpec` and evaluated
with :func:`evaluate`, :func:`gram` or :func:`cross_gram`.  Exponential-type
kernels on SPD matrices follow ``exp(-d^p / sigma^2)``; the Euclidean
Gaussian is stored in the ``exp(-gamma ||z - z'||^2)`` form.
"""
import itertools
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, ValidationError
from .matfun import as_spd, logdet_spd, logm_spd
from .spd_geometry import DISTANCES

KINDS = ("gaussian_metric", "logE_poly", "logE_exp", "stein", "euclidean_gaussian", "linear")
PSD_RTOL = 1e-9
WITNESS_THRESHOLD = -1e-8


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    domain: str
    sigma: float = 1.0
    p: float = 2.0
    c: float = 0.0
    degree: int = 1
    gamma: float = 1.0
    metric: str = "loge"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.domain not in ("vector", "spd"):
            raise ValidationError(f"unknown domain {self.domain!r}")
        if self.kind in ("gaussian_metric", "logE_exp"):
            if self.sigma == 0 or not np.isfinite(self.sigma):
                raise ValidationError("sigma must be finite and nonzero")
            if not 0 < self.p <= 2:
                raise ValidationError(f"exponent p must lie in (0, 2], got {self.p}")
            if self.metric not in DISTANCES:
                raise ValidationError(f"unknown metric {self.metric!r}")
        if self.kind == "logE_poly":
            if self.c < 0:
                raise ValidationError("offset c must be nonnegative")
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValidationError("degree must be a positive integer")
        if self.kind == "stein" and not self.sigma > 0:
            raise ValidationError("stein kernel needs sigma > 0")
        if self.kind == "euclidean_gaussian" and not self.gamma > 0:
            raise ValidationError("gamma must be positive")


def gaussian_metric(metric: str, sigma: float, p: float = 2.0) -> KernelSpec:
    """``exp(-d(A, B)^p / sigma^2)`` for an SPD distance ``d``."""
    return KernelSpec("gaussian_metric", "spd", sigma=sigma, p=p, metric=metric)


def logE_poly(c: float, degree: int) -> KernelSpec:
    """``(<log A, log B>_F + c)^degree``."""
    return KernelSpec("logE_poly", "spd", c=c, degree=degree)


def logE_exp(sigma: float, p: float = 2.0) -> KernelSpec:
    """``exp(-||log A - log B||_F^p / sigma^2)``."""
    return KernelSpec("logE_exp", "spd", sigma=sigma, p=p, metric="loge")


def stein(sigma: float) -> KernelSpec:
    """``det(A)^{s/2} det(B)^{s/2} / det((A+B)/2)^s = exp(-(s/4) d^0_logdet(A, B))``."""
    return KernelSpec("stein", "spd", sigma=sigma)


def sigma_to_gamma(sigma: float) -> float:
    """Convert the ``exp(-d^2/sigma^2)`` bandwidth to the ``exp(-gamma d^2)`` one."""
    return 1.0 / float(sigma) ** 2


def euclidean_gaussian(gamma: Optional[float] = None, sigma: Optional[float] = None) -> KernelSpec:
    """``exp(-gamma ||z - z'||^2)``; pass exactly one of ``gamma`` or ``sigma`` (``gamma = 1/sigma^2``)."""
    if (gamma is None) == (sigma is None):
        raise ValidationError("give exactly one of gamma or sigma")
    if gamma is None:
        if sigma == 0:
            raise ValidationError("sigma must be nonzero")
        gamma = sigma_to_gamma(sigma)
    return KernelSpec("euclidean_gaussian", "vector", gamma=float(gamma))


def linear(domain: str = "vector") -> KernelSpec:
    """Inner-product kernel (dot product or Frobenius)."""
    return KernelSpec("linear", domain)


# ---------------------------------------------------------------- evaluation


def _prepare(spec: KernelSpec, points: Sequence) -> List[np.ndarray]:
    if len(points) == 0:
        raise ValidationError("need at least one point")
    if spec.domain == "spd":
        pts = [as_spd(P, "point") for P in points]
        if len({P.shape for P in pts}) != 1:
            raise ValidationError("heterogeneous matrix sizes")
        return pts
    pts = [np.atleast_1d(np.asarray(x, dtype=float)) for x in points]
    if any(x.ndim != 1 for x in pts) or len({x.shape for x in pts}) != 1:
        raise ValidationError("vector points must be 1-D arrays of equal length")
    if not all(np.all(np.isfinite(x)) for x in pts):
        raise ValidationError("non-finite point coordinates")
    return pts


def _pairwise_sqdist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    D = np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :] - 2.0 * X @ Y.T
    return np.maximum(D, 0.0)


def _flat(pts: List[np.ndarray]) -> np.ndarray:
    return np.stack([P.reshape(-1) for P in pts])


def _cross(spec: KernelSpec, xs: List[np.ndarray], ys: List[np.ndarray]) -> np.ndarray:
    kind = spec.kind
    if kind == "linear":
        return _flat(xs) @ _flat(ys).T
    if kind == "euclidean_gaussian":
        X, Y = _flat(xs), _flat(ys)
        return np.exp(-spec.gamma * _pairwise_sqdist(X, Y))
    if kind in ("logE_poly", "logE_exp") or (kind == "gaussian_metric" and spec.metric == "loge"):
        LX, LY = _flat([logm_spd(P) for P in xs]), _flat([logm_spd(P) for P in ys])
        if kind == "logE_poly":
            return (LX @ LY.T + spec.c) ** int(spec.degree)
        D = np.sqrt(np.sum((LX[:, None, :] - LY[None, :, :]) ** 2, axis=2))
        return np.exp(-(D ** spec.p) / spec.sigma ** 2)
    if kind == "gaussian_metric":
        dist = DISTANCES[spec.metric]
        D = np.array([[dist(A, B) for B in ys] for A in xs])
        return np.exp(-(D ** spec.p) / spec.sigma ** 2)
    if kind == "stein":
        lx = np.array([logdet_spd(P) for P in xs])
        ly = np.array([logdet_spd(P) for P in ys])
        X, Y = np.stack(xs), np.stack(ys)
        # midpoints of SPD matrices are SPD; batched spectral log-determinants
        lam = np.linalg.eigvalsh(0.5 * (X[:, None] + Y[None, :]))
        mid = np.sum(np.log(lam), axis=-1)
        s = spec.sigma
        return np.exp(0.5 * s * (lx[:, None] + ly[None, :]) - s * mid)
    raise ValidationError(f"unhandled kernel kind {kind!r}")


def evaluate(spec: KernelSpec, x, y) -> float:
    """``k(x, y)`` for a single pair."""
    xs, ys = _prepare(spec, [x]), _prepare(spec, [y])
    if xs[0].shape != ys[0].shape:
        raise ValidationError("points have different shapes")
    return float(_cross(spec, xs, ys)[0, 0])


@dataclass(frozen=True, eq=False)
class GramMatrix:
    spec: KernelSpec
    points: list = field(repr=False)
    entries: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def gram(spec: KernelSpec, points: Sequence) -> GramMatrix:
    """Symmetric Gram matrix ``K[i, j] = k(x_i, x_j)``."""
    pts = _prepare(spec, points)
    K = _cross(spec, pts, pts)
    K = 0.5 * (K + K.T)
    return GramMatrix(spec, list(pts), K)


def cross_gram(spec: KernelSpec, xs: Sequence, ys: Sequence) -> np.ndarray:
    """Rectangular matrix ``K[i, j] = k(x_i, y_j)``."""
    px, py = _prepare(spec, xs), _prepare(spec, ys)
    if px[0].shape != py[0].shape:
        raise ValidationError("point sets have different shapes")
    return _cross(spec, px, py)


# ---------------------------------------------------------------- definiteness


def _entries(G) -> np.ndarray:
    K = G.entries if isinstance(G, GramMatrix) else np.asarray(G, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("Gram matrix must be square")
    return 0.5 * (K + K.T)


def min_eigenvalue(G) -> float:
    return float(np.linalg.eigvalsh(_entries(G))[0])


def is_psd(G, tol: Optional[float] = None) -> bool:
    """True iff the smallest eigenvalue is at least ``-tol``.

    The default tolerance is relative: ``1e-9 * ||G||_2``.
    """
    K = _entries(G)
    lam = np.linalg.eigvalsh(K)
    if tol is None:
        tol = PSD_RTOL * max(abs(lam[0]), abs(lam[-1]))
    return bool(lam[0] >= -tol)


def negdef_check(phi, points: Optional[Sequence] = None) -> float:
    """Worst value of ``sum c_i c_j phi(x_i, x_j)`` over unit zero-sum ``c``.

    ``phi`` is either a precomputed symmetric matrix or a pairwise function
    applied to ``points``.  The maximum is the top eigenvalue of ``phi``
    restricted to the zero-sum subspace, parametrized by the difference basis
    ``e_i - e_{i+1}`` (so a constant ``phi`` gives exactly 0).  A kernel is
    negative definite iff the result is ``<= 0`` up to rounding.
    """
    if callable(phi):
        if points is None:
            raise ValidationError("points are required with a pairwise function")
        m = len(points)
        Phi = np.array([[phi(points[i], points[j]) for j in range(m)] for i in range(m)], dtype=float)
    else:
        Phi = np.asarray(phi, dtype=float)
    Phi = 0.5 * (Phi + Phi.T)
    m = Phi.shape[0]
    if m < 2:
        raise ValidationError("need at least two points")
    # M = D^T Phi D with D = [e_i - e_{i+1}], computed by differencing
    R = Phi[:-1] - Phi[1:]
    M = R[:, :-1] - R[:, 1:]
    DtD = 2.0 * np.eye(m - 1) - np.eye(m - 1, k=1) - np.eye(m - 1, k=-1)
    return float(scipy.linalg.eigh(0.5 * (M + M.T), DtD, eigvals_only=True)[-1])


def stein_admissible(n: int, sigma: float) -> bool:
    """Whether the Stein kernel with parameter ``sigma`` is positive definite on n x n SPD matrices.

    True for ``sigma`` in ``{1/2, 1, ..., (n-1)/2}`` or ``sigma > (n-1)/2``.
    """
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    if int(n) != n or n < 1:
        raise ValidationError("n must be a positive integer")
    if sigma > (n - 1) / 2:
        return True
    k = round(2 * sigma)
    return bool(abs(2 * sigma - k) <= 2e-12 and 1 <= k <= n - 1)


# ---------------------------------------------------------------- witness search


class Witness(NamedTuple):
    points: list
    min_eig: float
    trials: int


Sampler = Callable[[np.random.Generator], List[np.ndarray]]


def wishart_sampler(n: int, sizes: Sequence[int] = range(4, 13), eps: Sequence[float] = (1e-3, 1e-2, 1e-1)) -> Sampler:
    """Point sets of ``G G^T + eps I`` with Gaussian ``G``, size drawn from ``sizes``."""
    sizes, eps = list(sizes), list(eps)

    def draw(rng):
        m = sizes[rng.integers(len(sizes))]
        e = eps[rng.integers(len(eps))]
        out = []
        for _ in range(m):
            G = rng.standard_normal((n, n))
            out.append(G @ G.T + e * np.eye(n))
        return out

    return draw


def _unit_sym(n: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((n, n))
    if i == j:
        E[i, i] = 1.0
    else:
        E[i, j] = E[j, i] = 0.5
    return E


def determinant_stencil(n: int, h: float) -> List[np.ndarray]:
    """Central-difference nodes of the operator ``det(d/dX)`` around the identity.

    Nodes are ``I + h sum_r s_r E_{r, pi(r)}`` over permutations ``pi`` and
    signs ``s_r = +-1/2``, with ``E_ij`` the symmetric unit matrix (off-diagonal
    halves).  Duplicated nodes are dropped.  A negative quadratic form of the
    Stein kernel along this stencil exposes failure of positive
    definiteness for ``sigma`` strictly between admissible values.
    """
    if not 0 < h < 2:
        raise ValidationError("stencil step must lie in (0, 2)")
    nodes, seen = [], set()
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((-0.5, 0.5), repeat=n):
            X = np.eye(n) + h * sum(s * _unit_sym(n, r, perm[r]) for r, s in zip(range(n), signs))
            key = tuple(np.round(X, 12).ravel())
            if key not in seen:
                seen.add(key)
                nodes.append(X)
    return nodes


def stencil_sampler(n: int, h_range=(0.5, 1.2)) -> Sampler:
    """Random congruences ``C X C^T`` of the determinant stencil.

    The Stein kernel is invariant under ``X -> C X C^T``, so this explores
    the same quadratic form in general position.
    """

    def draw(rng):
        h = rng.uniform(*h_range)
        C = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
        while abs(np.linalg.det(C)) < 1e-3:
            C = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
        out = []
        for X in determinant_stencil(n, h):
            Y = C @ X @ C.T
            out.append(0.5 * (Y + Y.T))
        return out

    return draw


def mixed_sampler(n: int) -> Sampler:
    """Alternate between the Wishart and stencil samplers."""
    samplers = [wishart_sampler(n), stencil_sampler(n)]
    state = {"k": 0}

    def draw(rng):
        s = samplers[state["k"] % 2]
        state["k"] += 1
        return s(rng)

    return draw


def nonpd_witness_search(
    spec: KernelSpec,
    sampler: Sampler,
    budget: int,
    rng: np.random.Generator,
    threshold: float = WITNESS_THRESHOLD,
) -> Optional[Witness]:
    """Search for a point set whose Gram matrix has an eigenvalue below ``threshold``.

    Returns the first such set, or ``None`` when ``budget`` Gram evaluations
    find nothing ("no witness within budget" is not a proof of definiteness).
    """
    if budget < 1:
        raise ValidationError("budget must be at least 1")
    for trial in range(1, int(budget) + 1):
        pts = sampler(rng)
        try:
            lam = min_eigenvalue(gram(spec, pts))
        except DomainError:
            continue
        if lam < threshold:
            return Witness(pts, lam, trial)
    return None
