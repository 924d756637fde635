"""
Regularized empirical risk minimization for conditional distributions on a grid.

Inputs live on ``X = {x_1 < ... < x_p}`` and labels on ``Y = {y_1 < ... < y_q}``,
both inside ``[0, 1]``.  They are embedded in the plane as ``x -> (x, 0)`` and
``y -> (0, y)``, so a cell ``(x, y)`` of ``X x Y`` sits at the point ``(x, y)``.
A Gaussian kernel on the plane then induces two kernel norms on signed
measures: ``||.||_1`` on ``X x Y`` and ``||.||_2`` on ``Y``.  A hypothesis is a
Markov kernel ``f: X -> P(Y)``, stored as a ``p x q`` row-stochastic matrix.

The regularized risk of ``f`` on a sample ``S`` is

    ||(Gamma_f)_* mu_{S,X} - mu_S||_1^2 + gamma W(f)

where ``Gamma_f(x) = delta_x (x) f(x)`` and
``W(f) = ||f||_M + L(f) + L_Gamma(f)`` adds the sup norm, the Lipschitz
constant of ``x -> f(x)`` and the Lipschitz constant of ``x -> Gamma_f(x)``.
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import markov as mk
from .errors import ValidationError
from .kernels import KernelSpec, cross_gram, euclidean_gaussian
from .parallel import map_units

# kernel parameter of the ambient Gaussian exp(-g ||u - v||^2)
DEFAULT_KERNEL_GAMMA = 1.0
DEFAULT_BUDGET = 10_000
DEFAULT_RESTARTS = 5
# soft-max temperatures for screening restarts and for polishing the winner
SCREEN_SHARE = 0.5
COARSE_TAUS = (3e-1, 3e-2)
FINE_TAUS = (1e-2, 1e-3, 1e-4, 1e-5)


# ---------------------------------------------------------------- model


@dataclass(frozen=True, eq=False)
class GridModel:
    """Input and label grids with the ambient Gaussian kernel.

    Parameters
    ----------
    xgrid, ygrid : sequence of float
        Strictly increasing points of ``[0, 1]``.
    spec : KernelSpec, optional
        Translation-invariant kernel on ``R^2``; defaults to
        ``euclidean_gaussian(gamma=1)``.
    """

    xgrid: np.ndarray
    ygrid: np.ndarray
    spec: KernelSpec = field(default_factory=lambda: euclidean_gaussian(gamma=DEFAULT_KERNEL_GAMMA))

    def __post_init__(self):
        for name in ("xgrid", "ygrid"):
            g = np.array(getattr(self, name), dtype=float).ravel()
            if g.size < 1 or np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] > 1:
                raise ValidationError(f"{name} must be strictly increasing inside [0, 1]")
            g.setflags(write=False)
            object.__setattr__(self, name, g)
        if self.spec.kind != "euclidean_gaussian":
            raise ValidationError("the ambient kernel must be a Gaussian on the plane")
        x0 = [np.array([x, 0.0]) for x in self.xgrid]
        y0 = [np.array([0.0, y]) for y in self.ygrid]
        # the Gaussian factorizes over the two axes: K((x,y),(x',y')) = Kx(x,x') Ky(y,y')
        kx = cross_gram(self.spec, x0, x0)
        ky = cross_gram(self.spec, y0, y0)
        kx.setflags(write=False)
        ky.setflags(write=False)
        object.__setattr__(self, "_gx", kx)
        object.__setattr__(self, "_gy", ky)
        object.__setattr__(self, "xspace", mk.FiniteSpace(tuple(f"{v:g}" for v in self.xgrid)))
        object.__setattr__(self, "yspace", mk.FiniteSpace(tuple(f"{v:g}" for v in self.ygrid)))

    @classmethod
    def uniform(cls, p: int, q: int, kernel_gamma: float = DEFAULT_KERNEL_GAMMA) -> "GridModel":
        """``p x q`` grid of equispaced points covering ``[0, 1]``."""
        grid = lambda k: np.linspace(0.0, 1.0, k) if k > 1 else np.array([0.5])
        return cls(grid(p), grid(q), euclidean_gaussian(gamma=kernel_gamma))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.xgrid.size, self.ygrid.size

    @property
    def gram_x(self) -> np.ndarray:
        """Kernel between the embedded input points ``(x, 0)``."""
        return self._gx

    @property
    def gram_y(self) -> np.ndarray:
        """Kernel between the embedded labels ``(0, y)``; the Gram of ``||.||_2``."""
        return self._gy

    def cell_gram(self) -> np.ndarray:
        """Gram of the ``p q`` embedded cells in row-major order."""
        return np.kron(self._gx, self._gy)

    def same(self, other: "GridModel") -> bool:
        return (
            self is other
            or (np.array_equal(self.xgrid, other.xgrid)
                and np.array_equal(self.ygrid, other.ygrid)
                and self.spec == other.spec)
        )


@dataclass(frozen=True, eq=False)
class HypothesisField:
    """A Markov kernel ``X -> P(Y)`` on the grid, optionally with a Lipschitz cap."""

    model: GridModel
    rows: np.ndarray
    lip_bound: float = np.inf

    def __post_init__(self):
        R = np.array(self.rows, dtype=float)
        if R.shape != self.model.shape:
            raise ValidationError(f"rows must have shape {self.model.shape}, got {R.shape}")
        mk._check_stochastic(R)
        R.setflags(write=False)
        object.__setattr__(self, "rows", R)
        if not self.lip_bound >= 0:
            raise ValidationError("lip_bound must be nonnegative")
        if np.isfinite(self.lip_bound) and lipschitz_constant(self) > self.lip_bound * (1 + 1e-12):
            raise ValidationError("field violates its Lipschitz bound")

    def as_kernel(self) -> mk.MarkovKernel:
        return mk.MarkovKernel(self.model.xspace, self.model.yspace, self.rows)

    @classmethod
    def from_kernel(cls, model: GridModel, T: mk.MarkovKernel) -> "HypothesisField":
        return cls(model, T.rows)


@dataclass(frozen=True)
class Schedule:
    """Penalty weights ``gamma_1 > gamma_2 > ... > 0`` and slacks ``c_1 >= c_2 >= ... >= 0``."""

    gammas: Tuple[float, ...]
    cs: Tuple[float, ...]

    def __post_init__(self):
        g, c = np.asarray(self.gammas, dtype=float), np.asarray(self.cs, dtype=float)
        if g.size != c.size or g.size == 0:
            raise ValidationError("gammas and cs must be nonempty and of equal length")
        if np.any(g <= 0) or np.any(np.diff(g) >= 0):
            raise ValidationError("gammas must be positive and strictly decreasing")
        if np.any(c < 0) or np.any(np.diff(c) > 0):
            raise ValidationError("cs must be nonnegative and nonincreasing")
        object.__setattr__(self, "gammas", tuple(map(float, g)))
        object.__setattr__(self, "cs", tuple(map(float, c)))

    @classmethod
    def power(cls, sizes: Sequence[int], exponent: float = 1.0 / 3.0, slack: bool = True) -> "Schedule":
        """``gamma_n = n^(-exponent)`` and ``c_n = gamma_n^2`` (or 0 without slack)."""
        g = np.asarray(sizes, dtype=float) ** (-float(exponent))
        return cls(tuple(g), tuple(g * g if slack else np.zeros_like(g)))


# ---------------------------------------------------------------- norms and functionals


def ktilde_norm(model: GridModel, mu) -> float:
    """Kernel norm ``sqrt(w' G w)`` of a signed measure on the embedded grid.

    A length-``q`` vector is a measure on ``Y`` (norm ``||.||_2``); a
    ``p x q`` table is a measure on ``X x Y`` (norm ``||.||_1``).

    Examples
    --------
    >>> m = GridModel.uniform(2, 2, kernel_gamma=1.0)
    >>> round(ktilde_norm(m, [1.0, -1.0]), 6)  # sqrt(2 - 2 exp(-1))
    1.124298
    """
    w = np.asarray(mu, dtype=float)
    if w.shape == (model.ygrid.size,):
        sq = w @ model.gram_y @ w
    elif w.shape == model.shape:
        sq = np.sum(w * (model.gram_x @ w @ model.gram_y))
    else:
        raise ValidationError(f"measure of shape {w.shape} does not live on the grid")
    return float(np.sqrt(max(sq, 0.0)))


def _row_gram(F: np.ndarray, Gy: np.ndarray) -> np.ndarray:
    """``<f_i, f_k>_2`` for all row pairs; leading batch axes allowed."""
    return np.einsum("...ij,jl,...kl->...ik", F, Gy, F)


def _pair_index(p: int):
    return np.triu_indices(p, 1)


def _field_terms(model: GridModel, F: np.ndarray):
    """Squared row norms, squared row-difference norms and squared graph-difference norms."""
    Gy, Gx = model.gram_y, model.gram_x
    i, k = _pair_index(F.shape[-2])
    C = _row_gram(F, Gy)
    r = np.einsum("...ii->...i", C)
    D = F[..., i, :] - F[..., k, :]
    d2 = np.maximum(np.einsum("...pj,jl,...pl->...p", D, Gy, D), 0.0)
    g = Gx[i, k]
    # ||Gamma_i - Gamma_k||^2 = g ||f_i - f_k||^2 + (1 - g)(||f_i||^2 + ||f_k||^2), both parts >= 0
    gam2 = g * d2 + (1.0 - g) * (r[..., i] + r[..., k])
    return np.maximum(r, 0.0), d2, gam2


def _spacing(model: GridModel) -> np.ndarray:
    i, k = _pair_index(model.xgrid.size)
    return np.abs(model.xgrid[i] - model.xgrid[k])


def _sup_norm(r: np.ndarray) -> np.ndarray:
    # ||f(x)||_2 + ||Gamma_f(x)||_1 and the two summands coincide on the grid
    return 2.0 * np.sqrt(r).max(axis=-1)


def _lipschitz(sq: np.ndarray, dx: np.ndarray) -> np.ndarray:
    if sq.shape[-1] == 0:
        return np.zeros(sq.shape[:-1])
    return (np.sqrt(sq) / dx).max(axis=-1)


def _check_model(model: GridModel, *fields: HypothesisField):
    for f in fields:
        if not f.model.same(model):
            raise ValidationError("hypothesis fields live on different grid models")


def sup_norm(f: HypothesisField) -> float:
    """``||f||_M = max_x (||f(x)||_2 + ||Gamma_f(x)||_1)``."""
    r, _, _ = _field_terms(f.model, f.rows)
    return float(_sup_norm(r))


def lipschitz_constant(f: HypothesisField) -> float:
    """``max_{x != x'} ||f(x) - f(x')||_2 / |x - x'|`` over grid pairs (0 for a single point)."""
    _, d2, _ = _field_terms(f.model, f.rows)
    return float(_lipschitz(d2, _spacing(f.model)))


def graph_lipschitz_constant(f: HypothesisField) -> float:
    """``max_{x != x'} ||Gamma_f(x) - Gamma_f(x')||_1 / |x - x'|``."""
    _, _, gam2 = _field_terms(f.model, f.rows)
    return float(_lipschitz(gam2, _spacing(f.model)))


def w_functional(f: HypothesisField) -> float:
    """``W(f) = ||f||_M + L(f) + L_Gamma(f)``."""
    r, d2, gam2 = _field_terms(f.model, f.rows)
    dx = _spacing(f.model)
    return float(_sup_norm(r) + _lipschitz(d2, dx) + _lipschitz(gam2, dx))


def dM_distance(f: HypothesisField, g: HypothesisField) -> float:
    """``max_x (||f(x) - g(x)||_2 + ||Gamma_f(x) - Gamma_g(x)||_1)``."""
    _check_model(f.model, g)
    D = f.rows - g.rows
    r = np.maximum(np.einsum("ij,jl,il->i", D, f.model.gram_y, D), 0.0)
    return float(_sup_norm(r))


# ---------------------------------------------------------------- risks


def _locate(grid: np.ndarray, v: float, what: str) -> int:
    hits = np.flatnonzero(np.abs(grid - float(v)) <= 1e-12)
    if hits.size != 1:
        raise ValidationError(f"{what} value {v!r} is not on the grid")
    return int(hits[0])


def empirical_joint(model: GridModel, sample: Sequence[Tuple[float, float]]) -> mk.JointMeasure:
    """Normalized counts of the ``(x, y)`` grid values in ``sample``."""
    if len(sample) == 0:
        raise ValidationError("empty sample")
    counts = np.zeros(model.shape)
    for x, y in sample:
        counts[_locate(model.xgrid, x, "x"), _locate(model.ygrid, y, "y")] += 1
    return mk.JointMeasure(model.xspace, model.yspace, counts / counts.sum())


def _joint_on(model: GridModel, mu: mk.JointMeasure) -> np.ndarray:
    if mu.table.shape != model.shape:
        raise ValidationError("joint measure does not live on the grid")
    return mu.table


def risk(f: HypothesisField, mu: mk.JointMeasure) -> float:
    """``||(Gamma_f)_* mu_X - mu||_1^2``, zero exactly at the conditionals of ``mu``."""
    T = _joint_on(f.model, mu)
    push = mk.graph_pushforward(f.as_kernel(), mk.Measure(f.model.xspace, T.sum(axis=1))).table
    return ktilde_norm(f.model, push - T) ** 2


def regularized_risk(f: HypothesisField, mu_s: mk.JointMeasure, gamma: float) -> float:
    """``risk(f, mu_S) + gamma W(f)``."""
    if gamma < 0:
        raise ValidationError("gamma must be nonnegative")
    value = risk(f, mu_s)
    return value + gamma * w_functional(f) if gamma > 0 else value


# ---------------------------------------------------------------- optimizer


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, v.shape[1] + 1)
    rho = np.count_nonzero(u - css / ind > 0, axis=1)
    theta = css[np.arange(v.shape[0]), rho - 1] / rho
    return np.maximum(v - theta[:, None], 0.0)


def _project_row(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.count_nonzero(u * np.arange(1, v.size + 1) > css)
    return np.maximum(v - css[rho - 1] / rho, 0.0)


def _softmax_grad(v: np.ndarray, tau: float) -> Tuple[float, np.ndarray]:
    """Log-sum-exp ``tau log sum exp(v / tau)`` and its weights."""
    m = v.max()
    e = np.exp((v - m) / tau)
    s = e.sum()
    return float(m + tau * np.log(s)), e / s


class _Objective:
    """Regularized risk with a soft-max smoothed ``W`` for search directions."""

    def __init__(self, model: GridModel, mu: mk.JointMeasure, gamma: float):
        self.model = model
        self.T = _joint_on(model, mu)
        self.a = self.T.sum(axis=1)
        self.gamma = float(gamma)
        self.i, self.k = _pair_index(model.xgrid.size)
        self.dx = _spacing(model)
        self.g = model.gram_x[self.i, self.k]
        # pair incidence: scatter pair contributions back onto rows with one product each
        p = model.xgrid.size
        self.Ei = np.eye(p)[self.i].T
        self.Ek = np.eye(p)[self.k].T
        self.evals = 0

    def exact(self, F: np.ndarray) -> float:
        D = self.a[:, None] * F - self.T
        val = max(float(np.sum(D * (self.model.gram_x @ D @ self.model.gram_y))), 0.0)
        if self.gamma > 0:
            r, d2, gam2 = _field_terms(self.model, F)
            val += self.gamma * float(_sup_norm(r) + _lipschitz(d2, self.dx) + _lipschitz(gam2, self.dx))
        return val

    def smooth(self, F: np.ndarray, tau: float) -> Tuple[float, np.ndarray]:
        """Smoothed value and gradient; the quadratic part is exact."""
        self.evals += 1
        Gx, Gy = self.model.gram_x, self.model.gram_y
        D = self.a[:, None] * F - self.T
        GD = Gx @ D @ Gy
        val = float(np.sum(D * GD))
        grad = 2.0 * self.a[:, None] * GD
        if self.gamma == 0:
            return val, grad
        i, k, dx, g = self.i, self.k, self.dx, self.g
        GF = F @ Gy
        r = np.maximum(np.einsum("ij,ij->i", F, GF), 0.0)
        tau2 = tau * tau
        # sup norm: 2 max_i sqrt(r_i)
        nr = np.sqrt(r + tau2)
        s, w = _softmax_grad(2.0 * nr, tau)
        gW = (2.0 * w / nr)[:, None] * GF
        total = s
        if i.size:
            Dif = F[i] - F[k]
            GDif = GF[i] - GF[k]
            d2 = np.maximum(np.einsum("ij,ij->i", Dif, GDif), 0.0)
            nd = np.sqrt(d2 + tau2)
            s, w = _softmax_grad(nd / dx, tau)
            total += s
            c = (w / (nd * dx))[:, None] * GDif
            gW += (self.Ei - self.Ek) @ c
            gam2 = g * d2 + (1.0 - g) * (r[i] + r[k])
            ng = np.sqrt(gam2 + tau2)
            s, w = _softmax_grad(ng / dx, tau)
            total += s
            c = (w / (ng * dx))[:, None]
            gW += self.Ei @ (c * (GF[i] - g[:, None] * GF[k])) + self.Ek @ (c * (GF[k] - g[:, None] * GF[i]))
        return val + self.gamma * total, grad + self.gamma * gW


class ERMResult(NamedTuple):
    field: HypothesisField
    value: float
    evaluations: int
    restarts: int


def _bcd_run(obj: _Objective, F: np.ndarray, budget: int, slack: float, taus: Sequence[float]):
    """Projected block-coordinate descent over rows; returns the best exact iterate.

    Each temperature in ``taus`` gets an equal share of ``budget``.
    """
    best_F, best_val = F.copy(), obj.exact(F)
    step = np.ones(F.shape[0])
    stages = 1 if obj.gamma == 0 else len(taus)
    for tau in taus[:stages]:
        start = obj.evals
        quota = max(1, budget // stages)
        f_val, grad = obj.smooth(F, tau)
        while obj.evals - start < quota:
            sweep_start = f_val
            for x in range(F.shape[0]):
                while obj.evals - start < quota:
                    row = F[x].copy()
                    F[x] = _project_row(row - step[x] * grad[x])
                    move = F[x] - row
                    if not np.any(move):
                        break
                    new_val, new_grad = obj.smooth(F, tau)
                    # sufficient decrease for a 1/step-smooth block
                    if new_val <= f_val + grad[x] @ move + 0.5 / step[x] * (move @ move):
                        f_val, grad = new_val, new_grad
                        step[x] *= 2.0
                        break
                    F[x] = row
                    step[x] *= 0.5
                    if step[x] < 1e-14:
                        break
            exact = obj.exact(F)
            if exact < best_val:
                best_F, best_val = F.copy(), exact
            if sweep_start - f_val <= max(slack * 1e-3, 1e-15 * (1.0 + abs(f_val))):
                break
    return best_F, best_val


def _initial_rows(model: GridModel, mu: mk.JointMeasure, rng: np.random.Generator, restart: int) -> np.ndarray:
    if restart == 0:
        return mk.disintegrate(mu)[1].rows.copy()
    if restart == 1:
        return np.full(model.shape, 1.0 / model.shape[1])
    return rng.dirichlet(np.ones(model.shape[1]), size=model.shape[0])


def erm_minimize(
    model: GridModel,
    mu_s: mk.JointMeasure,
    gamma: float,
    slack: float = 0.0,
    budget: int = DEFAULT_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    rng: Optional[np.random.Generator] = None,
) -> ERMResult:
    """Approximate minimizer of ``regularized_risk(., mu_S, gamma)``.

    Projected block-coordinate descent over the rows, each step projected
    back onto the simplex.  The max terms of ``W`` are replaced by soft-max
    surrogates whose temperature is lowered in stages; the returned field is
    the best iterate under the exact objective over all restarts.  The
    budget counts objective evaluations and is split evenly over restarts.
    A restart stops early once a sweep gains less than ``slack / 1000``.

    Restarts begin at the empirical conditional, the uniform field and
    random Dirichlet fields.
    """
    if budget < 1 or restarts < 1:
        raise ValidationError("budget and restarts must be positive")
    if gamma < 0 or slack < 0:
        raise ValidationError("gamma and slack must be nonnegative")
    rng = np.random.default_rng(0) if rng is None else rng
    obj = _Objective(model, mu_s, gamma)
    # a share of the budget screens the restarts at coarse temperatures, the rest polishes the best one
    screen = max(1, int(SCREEN_SHARE * budget) // restarts)
    best_F, best_val = None, np.inf
    for r in range(restarts):
        F, val = _bcd_run(obj, _initial_rows(model, mu_s, rng, r), screen, slack, COARSE_TAUS)
        if val < best_val:
            best_F, best_val = F, val
    F, val = _bcd_run(obj, best_F.copy(), max(1, budget - obj.evals), slack, FINE_TAUS)
    if val < best_val:
        best_F, best_val = F, val
    return ERMResult(HypothesisField(model, best_F), best_val, obj.evals, restarts)


# ---------------------------------------------------------------- baselines and experiments


def simplex_grid(q: int, step: float = 0.1) -> np.ndarray:
    """All points of the probability simplex in ``R^q`` with coordinates in ``step`` units."""
    n = int(round(1.0 / step))
    if not np.isclose(n * step, 1.0):
        raise ValidationError("1/step must be an integer")
    pts = []

    def rec(prefix, left, slots):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, slots - 1)

    rec([], n, q)
    return np.array(pts, dtype=float) / n


def field_grid_values(
    model: GridModel,
    mu: mk.JointMeasure,
    gamma: float = 0.0,
    step: float = 0.1,
    max_fields: int = 200_000,
    rng: Optional[np.random.Generator] = None,
    chunk: int = 4096,
) -> Tuple[float, np.ndarray]:
    """Best regularized risk over fields whose rows lie on a coarse simplex grid.

    Exhaustive when there are at most ``max_fields`` such fields, otherwise
    ``max_fields`` of them drawn at random.  Returns the best value and rows.
    """
    p, q = model.shape
    S = simplex_grid(q, step)
    total = S.shape[0] ** p
    T = _joint_on(model, mu)
    a = T.sum(axis=1)
    dx = _spacing(model)
    Gx, Gy = model.gram_x, model.gram_y
    if total <= max_fields:
        index_iter = (np.array(np.unravel_index(np.arange(s, min(s + chunk, total)), (S.shape[0],) * p)).T
                      for s in range(0, total, chunk))
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        draws = rng.integers(0, S.shape[0], size=(max_fields, p))
        index_iter = (draws[s:s + chunk] for s in range(0, max_fields, chunk))
    best_val, best_rows = np.inf, None
    for idx in index_iter:
        F = S[idx]
        D = a[None, :, None] * F - T
        vals = np.maximum(np.einsum("bij,ik,bkl,jl->b", D, Gx, D, Gy), 0.0)
        if gamma > 0:
            r, d2, gam2 = _field_terms(model, F)
            vals = vals + gamma * (_sup_norm(r) + _lipschitz(d2, dx) + _lipschitz(gam2, dx))
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_rows = float(vals[j]), F[j].copy()
    return best_val, best_rows


def estimation_error(f: HypothesisField, mu: mk.JointMeasure, baseline: Optional[float] = None) -> float:
    """``risk(f, mu) - inf_H risk``; the infimum defaults to a coarse field-grid search."""
    if baseline is None:
        baseline, _ = field_grid_values(f.model, mu)
    return risk(f, mu) - baseline


def lipschitz_truth(model: GridModel, width: float = 0.25, slope: float = 0.6, offset: float = 0.2) -> mk.JointMeasure:
    """Uniform inputs with a discretized Gaussian bump conditional centred at ``offset + slope x``."""
    centres = offset + slope * model.xgrid
    rows = np.exp(-0.5 * ((model.ygrid[None, :] - centres[:, None]) / width) ** 2)
    rows /= rows.sum(axis=1, keepdims=True)
    p = model.shape[0]
    return mk.JointMeasure(model.xspace, model.yspace, rows / p)


def sample_joint(mu: mk.JointMeasure, model: GridModel, n: int, rng: np.random.Generator) -> List[Tuple[float, float]]:
    """``n`` i.i.d. ``(x, y)`` grid values drawn from ``mu``."""
    flat = rng.choice(mu.table.size, size=n, p=mu.table.ravel())
    i, j = np.unravel_index(flat, mu.table.shape)
    return [(float(model.xgrid[a]), float(model.ygrid[b])) for a, b in zip(i, j)]


class CurvePoint(NamedTuple):
    n: int
    gamma: float
    slack: float
    median_dM: float
    failure_rate: float


def _curve_unit(unit) -> float:
    model, mu_true, truth, n, gam, c, seed, budget, restarts = unit
    rng = np.random.default_rng([int(seed), int(n)])
    mu_s = empirical_joint(model, sample_joint(mu_true, model, int(n), rng))
    res = erm_minimize(model, mu_s, gam, c, budget, restarts, rng)
    return dM_distance(res.field, truth)


def learning_curve(
    model: GridModel,
    mu_true: mk.JointMeasure,
    sizes: Sequence[int],
    schedule: Schedule,
    seeds: Sequence[int],
    eps: float = 0.5,
    budget: int = DEFAULT_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    workers: int = 1,
) -> List[CurvePoint]:
    """Median ``d_M`` between the ERM output and the true conditional per sample size.

    Sample ``(seed, n)`` is drawn from the generator seeded with ``[seed, n]``.
    Also records how often ``d_M`` exceeds ``eps`` among the seeds.
    """
    T = _joint_on(model, mu_true)
    if np.any(T.sum(axis=1) <= 0):
        raise ValidationError("the true input marginal must charge every grid point")
    if len(sizes) != len(schedule.gammas):
        raise ValidationError("one schedule entry per sample size")
    truth = HypothesisField(model, mk.disintegrate(mu_true)[1].rows)
    seeds = list(seeds)
    units = [
        (model, mu_true, truth, int(n), gam, c, s, budget, restarts)
        for n, gam, c in zip(sizes, schedule.gammas, schedule.cs)
        for s in seeds
    ]
    dists = np.array(map_units(_curve_unit, units, workers)).reshape(len(sizes), len(seeds))
    return [
        CurvePoint(int(n), gam, c, float(np.median(d)), float(np.mean(d > eps)))
        for n, gam, c, d in zip(sizes, schedule.gammas, schedule.cs, dists)
    ]
