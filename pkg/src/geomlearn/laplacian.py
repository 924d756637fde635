"""
Heat-kernel graph Laplacians on point clouds sampled from a manifold.

The quadratic form ``(1/2) sum_ij W_ij (z_i - z_j)^2`` of the unnormalized
graph Laplacian, the point-cloud Laplace operator evaluated at an arbitrary
point, and its normalized version which converges (in probability) to
``(Delta f)(p) / vol(M)`` for uniform samples of a compact ``n``-manifold.
The positive-semidefinite sign convention ``Delta = -div grad`` is used
throughout, so ``Delta cos = cos`` on the circle.
"""
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Sequence

import numpy as np

from .errors import ValidationError
from .parallel import map_units

RealFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PointCloud:
    """``m`` points in ``R^d`` (rows) sampled from an ``n``-dimensional manifold."""

    points: np.ndarray
    manifold_dim: int

    def __post_init__(self):
        P = np.array(self.points, dtype=float)
        if P.ndim != 2 or P.shape[0] < 2:
            raise ValidationError("a point cloud needs an (m, d) array with m >= 2")
        if not np.all(np.isfinite(P)):
            raise ValidationError("point cloud contains non-finite coordinates")
        if int(self.manifold_dim) < 1:
            raise ValidationError("manifold dimension must be positive")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "manifold_dim", int(self.manifold_dim))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]


class HeatWeights(NamedTuple):
    t: float
    matrix: np.ndarray


def _check_t(t: float) -> float:
    t = float(t)
    if not t > 0:
        raise ValidationError(f"heat parameter t must be positive, got {t}")
    return t


def _sq_dists(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def heat_weights(cloud: PointCloud, t: float) -> HeatWeights:
    """``W_ij = exp(-||x_i - x_j||^2 / (4t))`` with ambient distances."""
    t = _check_t(t)
    X = cloud.points
    W = np.exp(-_sq_dists(X, X) / (4.0 * t))
    return HeatWeights(t, W)


def quadratic_form(W: HeatWeights, z) -> float:
    """``(1/2) sum_ij W_ij (z_i - z_j)^2``; nonnegative and zero on constants."""
    z = np.asarray(z, dtype=float)
    if z.shape != (W.matrix.shape[0],):
        raise ValidationError(f"need a vector of length {W.matrix.shape[0]}, got shape {z.shape}")
    diff = z[:, None] - z[None, :]
    return float(0.5 * np.sum(W.matrix * diff * diff))


def graph_laplacian(W: HeatWeights) -> np.ndarray:
    """Unnormalized Laplacian ``D - W`` with ``D`` the diagonal of row sums."""
    return np.diag(W.matrix.sum(axis=1)) - W.matrix


def _evaluate(f: RealFunction, X: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(X), dtype=float)
    if vals.shape != (X.shape[0],):
        raise ValidationError("f must map an (m, d) array to m values")
    return vals


def pointcloud_laplacian(cloud: PointCloud, t: float, f: RealFunction, x) -> float:
    """Point-cloud Laplace operator of ``f`` at ``x``.

    ``f(x) (1/m) sum_j k_j - (1/m) sum_j f(x_j) k_j`` with
    ``k_j = exp(-||x - x_j||^2 / (4t))``.  ``f`` is vectorized: it receives an
    ``(m, d)`` array of points and returns ``m`` values.
    """
    t = _check_t(t)
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != cloud.ambient_dim:
        raise ValidationError("evaluation point has the wrong dimension")
    k = np.exp(-_sq_dists(x, cloud.points)[0] / (4.0 * t))
    fx = _evaluate(f, x)[0]
    fj = _evaluate(f, cloud.points)
    # one sum of k_j (f(x) - f(x_j)): exactly zero for constant f
    return float(np.mean(k * (fx - fj)))


def bn_scale(m: int, n: int, alpha: float = 1.0) -> float:
    """Bandwidth schedule ``t_m = m^(-1/(n + 2 + alpha))``."""
    if m < 1 or n < 1:
        raise ValidationError("need m >= 1 and n >= 1")
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    return float(m ** (-1.0 / (n + 2 + alpha)))


def bn_estimate(cloud: PointCloud, f: RealFunction, p, alpha: float = 1.0) -> float:
    """Normalized operator ``Delta^t f(p) / (t (4 pi t)^(n/2))`` at ``t = t_m``.

    Approximates ``(Delta f)(p) / vol(M)`` for uniform samples.
    """
    n = cloud.manifold_dim
    t = bn_scale(cloud.size, n, alpha)
    return pointcloud_laplacian(cloud, t, f, p) / (t * (4.0 * np.pi * t) ** (n / 2.0))


# ---------------------------------------------------------------- samplers


def sample_circle(m: int, seed: int) -> PointCloud:
    """Uniform sample of the unit circle in ``R^2``."""
    theta = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, m)
    return PointCloud(np.column_stack([np.cos(theta), np.sin(theta)]), 1)


def sample_sphere(m: int, seed: int) -> PointCloud:
    """Uniform sample of the unit sphere in ``R^3`` via normalized Gaussians."""
    G = np.random.default_rng(seed).standard_normal((m, 3))
    return PointCloud(G / np.linalg.norm(G, axis=1, keepdims=True), 2)


def sample_flat_torus(m: int, seed: int) -> PointCloud:
    """Uniform sample of ``S^1 x S^1`` embedded in ``R^4``."""
    a, b = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, (2, m))
    return PointCloud(np.column_stack([np.cos(a), np.sin(a), np.cos(b), np.sin(b)]), 2)


SAMPLERS = {"circle": sample_circle, "sphere": sample_sphere, "torus": sample_flat_torus}


class Eigenfunction(NamedTuple):
    """An eigenfunction ``f`` with ``Delta f = eigenvalue * f`` on a manifold of volume ``vol``."""

    f: RealFunction
    eigenvalue: float
    vol: float

    def laplacian(self, X) -> np.ndarray:
        return self.eigenvalue * self.f(np.asarray(X, dtype=float))


def _coordinate(i: int) -> RealFunction:
    return lambda X: np.asarray(X, dtype=float)[:, i]


def _constant(X) -> np.ndarray:
    return np.ones(np.asarray(X).shape[0])


_EIGEN = {
    ("circle", "cos"): (_coordinate(0), 1.0, 2.0 * np.pi),
    ("circle", "sin"): (_coordinate(1), 1.0, 2.0 * np.pi),
    ("circle", "const"): (_constant, 0.0, 2.0 * np.pi),
    ("sphere", "z"): (_coordinate(2), 2.0, 4.0 * np.pi),
    ("sphere", "x"): (_coordinate(0), 2.0, 4.0 * np.pi),
    ("sphere", "const"): (_constant, 0.0, 4.0 * np.pi),
    ("torus", "cos1"): (_coordinate(0), 1.0, 4.0 * np.pi ** 2),
    ("torus", "const"): (_constant, 0.0, 4.0 * np.pi ** 2),
}


def analytic_laplacian(manifold: str, eigenfunction: str) -> Eigenfunction:
    """Reference eigenfunctions of the positive Laplacian.

    ``cos`` on the circle has eigenvalue 1, the coordinate ``z`` on the
    sphere has eigenvalue 2 (degree-one harmonic), constants have 0.
    """
    try:
        return Eigenfunction(*_EIGEN[(manifold, eigenfunction)])
    except KeyError:
        raise ValidationError(f"no reference eigenfunction {eigenfunction!r} on {manifold!r}") from None


# ---------------------------------------------------------------- convergence


class ConvergenceRow(NamedTuple):
    m: int
    median_error: float
    target: float


def _target(ref: Eigenfunction, p: np.ndarray) -> float:
    target = float(ref.laplacian(p[None, :])[0]) / ref.vol
    if target == 0:
        raise ValidationError("relative error needs a point where the Laplacian is nonzero")
    return target


def _estimate_unit(unit) -> float:
    manifold, eigenfunction, p, m, seed, alpha = unit
    ref = analytic_laplacian(manifold, eigenfunction)
    return bn_estimate(SAMPLERS[manifold](m, seed), ref.f, p, alpha)


def relative_errors(
    manifold: str, eigenfunction: str, p, m: int, seeds: Sequence[int], alpha: float = 1.0, workers: int = 1
) -> np.ndarray:
    """``|bn_estimate - (Delta f)(p)/vol| / |(Delta f)(p)/vol|`` for each seed."""
    if manifold not in SAMPLERS:
        raise ValidationError(f"unknown manifold {manifold!r}; choose from {sorted(SAMPLERS)}")
    p = np.asarray(p, dtype=float)
    target = _target(analytic_laplacian(manifold, eigenfunction), p)
    units = [(manifold, eigenfunction, p, int(m), int(s), alpha) for s in seeds]
    est = np.array(map_units(_estimate_unit, units, workers))
    return np.abs(est - target) / abs(target)


def convergence_sweep(
    manifold: str = "circle",
    eigenfunction: str = "cos",
    p=(1.0, 0.0),
    sizes: Sequence[int] = (500, 2000, 8000),
    seeds: Sequence[int] = range(20),
    alpha: float = 1.0,
    workers: int = 1,
) -> List[ConvergenceRow]:
    """Median relative error of the normalized estimator for each sample size."""
    pp = np.asarray(p, dtype=float)
    target = _target(analytic_laplacian(manifold, eigenfunction), pp)
    return [
        ConvergenceRow(int(m), float(np.median(relative_errors(manifold, eigenfunction, pp, m, seeds, alpha, workers))), target)
        for m in sizes
    ]
