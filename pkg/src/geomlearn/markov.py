"""
Probabilistic morphisms between finite spaces.

A Markov kernel ``T: X ~> Y`` on finite spaces is a row-stochastic
``|X| x |Y|`` matrix; measures are weight vectors indexed by the labels of a
:class:`FiniteSpace`.  Product spaces are enumerated row-major (``x`` outer,
``y`` inner) everywhere in this module.
"""
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np

from .errors import ValidationError

MASS_TOL = 1e-12


@dataclass(frozen=True)
class FiniteSpace:
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        if not labels:
            raise ValidationError("a finite space needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValidationError("space labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int, prefix: str = "s") -> "FiniteSpace":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise ValidationError(f"unknown label {label!r}") from None

    def product(self, other: "FiniteSpace") -> "FiniteSpace":
        return FiniteSpace(tuple(f"({a},{b})" for a in self.labels for b in other.labels))


def _check_space(a: FiniteSpace, b: FiniteSpace, what: str):
    if a != b:
        raise ValidationError(f"space mismatch in {what}")


@dataclass(frozen=True, eq=False)
class Measure:
    """A finite signed measure; a probability vector when nonnegative with unit mass."""

    space: FiniteSpace
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != self.space.size:
            raise ValidationError(f"expected {self.space.size} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("measure weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def tv_norm(self) -> float:
        return float(np.abs(self.weights).sum())

    def is_probability(self, tol: float = MASS_TOL) -> bool:
        return bool(np.all(self.weights >= -tol) and abs(self.total - 1.0) <= tol)

    def __add__(self, other: "Measure") -> "Measure":
        _check_space(self.space, other.space, "measure addition")
        return Measure(self.space, self.weights + other.weights)

    def __sub__(self, other: "Measure") -> "Measure":
        _check_space(self.space, other.space, "measure subtraction")
        return Measure(self.space, self.weights - other.weights)

    def __rmul__(self, a: float) -> "Measure":
        return Measure(self.space, a * self.weights)


def prob_vector(space: FiniteSpace, weights) -> Measure:
    """Build a :class:`Measure` and insist that it is a probability vector."""
    mu = Measure(space, weights)
    if not mu.is_probability():
        raise ValidationError("weights must be nonnegative and sum to 1")
    return mu


def _check_stochastic(rows: np.ndarray, tol: float = MASS_TOL):
    if np.any(rows < -tol) or np.any(np.abs(rows.sum(axis=1) - 1.0) > tol * max(1, rows.shape[1])):
        raise ValidationError("kernel rows must be probability vectors")


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    source: FiniteSpace
    target: FiniteSpace
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.shape != (self.source.size, self.target.size):
            raise ValidationError(
                f"kernel rows must have shape {(self.source.size, self.target.size)}, got {rows.shape}"
            )
        _check_stochastic(rows)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def row(self, label) -> Measure:
        return Measure(self.target, self.rows[self.source.index(label)])


@dataclass(frozen=True, eq=False)
class JointMeasure:
    xspace: FiniteSpace
    yspace: FiniteSpace
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != (self.xspace.size, self.yspace.size):
            raise ValidationError(
                f"joint table must have shape {(self.xspace.size, self.yspace.size)}, got {t.shape}"
            )
        if np.any(t < -MASS_TOL) or abs(t.sum() - 1.0) > MASS_TOL * max(1, t.size):
            raise ValidationError("joint table must be nonnegative with total mass 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def as_measure(self) -> Measure:
        """Flatten onto the product space (row-major)."""
        return Measure(self.xspace.product(self.yspace), self.table.reshape(-1))


def identity(space: FiniteSpace) -> MarkovKernel:
    return MarkovKernel(space, space, np.eye(space.size))


def deterministic(source: FiniteSpace, target: FiniteSpace, mapping: Mapping) -> MarkovKernel:
    """Kernel generated by a map ``x -> kappa(x)``, i.e. ``x -> delta_{kappa(x)}``."""
    rows = np.zeros((source.size, target.size))
    for x in source.labels:
        rows[source.index(x), target.index(mapping[x])] = 1.0
    return MarkovKernel(source, target, rows)


def dirac(space: FiniteSpace, label) -> Measure:
    w = np.zeros(space.size)
    w[space.index(label)] = 1.0
    return Measure(space, w)


def compose(T1: MarkovKernel, T2: MarkovKernel) -> MarkovKernel:
    """``T2 o T1`` for ``T1: X ~> Y`` and ``T2: Y ~> Z``."""
    _check_space(T1.target, T2.source, "composition")
    return MarkovKernel(T1.source, T2.target, T1.rows @ T2.rows)


def pushforward(T: MarkovKernel, mu: Measure) -> Measure:
    """``T_* mu (B) = sum_x T(B|x) mu(x)``; linear in ``mu``."""
    _check_space(T.source, mu.space, "pushforward")
    return Measure(T.target, mu.weights @ T.rows)


def join(T1: MarkovKernel, T2: MarkovKernel) -> MarkovKernel:
    """Kernel ``x -> T1(x) (x) T2(x)`` into the product of the targets."""
    _check_space(T1.source, T2.source, "join")
    rows = np.einsum("xi,xj->xij", T1.rows, T2.rows).reshape(T1.source.size, -1)
    return MarkovKernel(T1.source, T1.target.product(T2.target), rows)


def graph(T: MarkovKernel) -> MarkovKernel:
    """The join of the identity with ``T``: ``x -> delta_x (x) T(x)``."""
    return join(identity(T.source), T)


def projection_x(xspace: FiniteSpace, yspace: FiniteSpace) -> MarkovKernel:
    """Deterministic kernel of the canonical projection ``X x Y -> X``."""
    rows = np.kron(np.eye(xspace.size), np.ones((yspace.size, 1)))
    return MarkovKernel(xspace.product(yspace), xspace, rows)


def graph_pushforward(T: MarkovKernel, mu_x: Measure) -> JointMeasure:
    """``(Gamma_T)_* mu_X`` as a joint table: ``mu_X(x) T(x, y)``."""
    _check_space(T.source, mu_x.space, "graph pushforward")
    return JointMeasure(T.source, T.target, mu_x.weights[:, None] * T.rows)


def signed_graph_pushforward(T: MarkovKernel, mu_x: Measure) -> np.ndarray:
    """Same table as :func:`graph_pushforward` without the probability check."""
    _check_space(T.source, mu_x.space, "graph pushforward")
    return mu_x.weights[:, None] * T.rows


def marginal_x(mu: JointMeasure) -> Measure:
    return Measure(mu.xspace, mu.table.sum(axis=1))


def marginal_y(mu: JointMeasure) -> Measure:
    return Measure(mu.yspace, mu.table.sum(axis=0))


def disintegrate(mu: JointMeasure) -> Tuple[Measure, MarkovKernel]:
    """Split ``mu`` into its X-marginal and a regular conditional kernel.

    Rows over zero-marginal points are filled uniformly; any choice there is
    correct up to a ``mu_X``-null set.
    """
    marg = mu.table.sum(axis=1)
    rows = np.full(mu.table.shape, 1.0 / mu.yspace.size)
    pos = marg > 0
    # plain division: marg * (table / marg) reproduces the table to the last bit
    rows[pos] = mu.table[pos] / marg[pos, None]
    return Measure(mu.xspace, marg), MarkovKernel(mu.xspace, mu.yspace, rows)


def verify_conditional(T: MarkovKernel, mu: JointMeasure, tol: float = 1e-12) -> bool:
    """True iff ``(Gamma_T)_* mu_X`` reproduces ``mu`` to ``tol`` in sup-norm."""
    _check_space(T.source, mu.xspace, "verify_conditional")
    _check_space(T.target, mu.yspace, "verify_conditional")
    rebuilt = marginal_x(mu).weights[:, None] * T.rows
    return bool(np.max(np.abs(rebuilt - mu.table)) <= tol)


def ae_equal(T1: MarkovKernel, T2: MarkovKernel, mu_x: Measure, tol: float = 1e-12) -> bool:
    """Rows agree within ``tol`` wherever ``mu_x`` charges the point."""
    _check_space(T1.source, T2.source, "ae_equal")
    _check_space(T1.target, T2.target, "ae_equal")
    _check_space(T1.source, mu_x.space, "ae_equal")
    pos = mu_x.weights > 0
    if not np.any(pos):
        return True
    return bool(np.max(np.abs(T1.rows[pos] - T2.rows[pos])) <= tol)


def noise_channel(
    source: FiniteSpace,
    ygrid: Sequence[float],
    f_index: Sequence[int],
    offsets: Sequence[int],
    noise: Sequence[float],
) -> MarkovKernel:
    """Kernel ``x -> delta_{f(x)} * noise`` on a 1-D grid.

    ``f_index[i]`` is the grid index of ``f`` at the i-th source point; the
    noise law puts mass ``noise[k]`` on the index shift ``offsets[k]``.  Mass
    pushed beyond either end of the grid is accumulated at that edge.
    """
    ygrid = np.asarray(ygrid, dtype=float)
    q = ygrid.shape[0]
    if q == 0:
        raise ValidationError("empty grid")
    noise = np.asarray(noise, dtype=float)
    offsets = np.asarray(offsets, dtype=int)
    if noise.shape != offsets.shape:
        raise ValidationError("offsets and noise weights must have equal length")
    if np.any(noise < 0) or abs(noise.sum() - 1.0) > MASS_TOL:
        raise ValidationError("noise must be a probability vector")
    if len(f_index) != source.size:
        raise ValidationError("f_index needs one grid index per source point")
    rows = np.zeros((source.size, q))
    for i, c in enumerate(f_index):
        if not 0 <= int(c) < q:
            raise ValidationError(f"f_index {c} outside grid")
        idx = np.clip(int(c) + offsets, 0, q - 1)
        np.add.at(rows[i], idx, noise)
    target = FiniteSpace(tuple(f"{v:g}" for v in ygrid))
    return MarkovKernel(source, target, rows)


def regression_function(mu: JointMeasure, yvalues: Sequence[float]) -> np.ndarray:
    """``r(x) = sum_y y mu_{Y|X}(y|x)`` using the uniform null-set fill."""
    yvalues = np.asarray(yvalues, dtype=float)
    if yvalues.shape[0] != mu.yspace.size:
        raise ValidationError("need one y value per Y label")
    _, kernel = disintegrate(mu)
    return kernel.rows @ yvalues


def random_kernel(rng: np.random.Generator, source: FiniteSpace, target: FiniteSpace) -> MarkovKernel:
    rows = rng.dirichlet(np.ones(target.size), size=source.size)
    return MarkovKernel(source, target, rows)


def random_joint(
    rng: np.random.Generator, p: int, q: int, zero_row_prob: float = 0.0
) -> JointMeasure:
    """Random joint table; each X-row is zeroed with probability ``zero_row_prob``."""
    t = rng.exponential(size=(p, q)) * (rng.random((p, q)) < 0.8)
    dead = rng.random(p) < zero_row_prob
    t[dead] = 0.0
    if t.sum() == 0:
        t[rng.integers(p), rng.integers(q)] = 1.0
    t /= t.sum()
    return JointMeasure(FiniteSpace.of_size(p, "x"), FiniteSpace.of_size(q, "y"), t)
