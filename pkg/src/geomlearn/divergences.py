"""
Bregman divergences and the alpha family built on a strictly convex potential.

For ``phi = -log det`` the alpha family becomes the Alpha Log-Det
divergence on SPD matrices, with the two Bregman limits at ``alpha = +-1``.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ValidationError
from .matfun import as_spd, check_same_dim, inv_spd, invsqrtm_spd, logdet_spd, sym_eig

# beyond this |alpha| the closed-form limits replace the 4/(1-alpha^2) formula
ALPHA_LIMIT_SWITCH = 1.0 - 1e-6


@dataclass(frozen=True)
class ConvexSpec:
    """A differentiable, strictly convex potential ``phi`` on a domain ``Omega``.

    Parameters
    ----------
    value, gradient : callable
        ``phi(x)`` and ``grad phi(x)``; the gradient is paired with
        ``x - y`` through the entrywise (Frobenius) inner product.
    contains : callable, optional
        Membership test for ``Omega``; defaults to "everything".
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    contains: Optional[Callable[[np.ndarray], bool]] = None
    name: str = "phi"

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.contains is not None and not self.contains(x):
            raise DomainError(f"point outside the domain of {self.name}")
        return x

    def midpoint_gap(self, x, y) -> float:
        """``(phi(x) + phi(y))/2 - phi((x+y)/2)``; positive for distinct points."""
        x, y = self.check(x), self.check(y)
        return 0.5 * (self.value(x) + self.value(y)) - self.value(0.5 * (x + y))


def _is_spd(X) -> bool:
    try:
        as_spd(X)
    except (DomainError, ValidationError):
        return False
    return True


SQUARED_NORM = ConvexSpec(lambda x: float(np.sum(x * x)), lambda x: 2.0 * x, name="squared norm")
NEG_LOG = ConvexSpec(
    lambda x: float(-np.sum(np.log(x))),
    lambda x: -1.0 / x,
    contains=lambda x: bool(np.all(x > 0)),
    name="-log",
)
NEG_LOGDET = ConvexSpec(
    lambda X: -logdet_spd(X),
    lambda X: -inv_spd(X),
    contains=_is_spd,
    name="-log det",
)


def bregman(phi: ConvexSpec, x, y) -> float:
    """``phi(x) - phi(y) - <grad phi(y), x - y>``."""
    x, y = phi.check(x), phi.check(y)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(phi.value(x) - phi.value(y) - np.sum(phi.gradient(y) * (x - y)))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not -1.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [-1, 1], got {alpha}")
    return alpha


def alpha_divergence(phi: ConvexSpec, alpha: float, x, y) -> float:
    """Alpha divergence ``d^alpha_phi(x, y)``.

    ``4/(1-a^2) [w1 phi(x) + w2 phi(y) - phi(w1 x + w2 y)]`` with
    ``w1 = (1-a)/2``, ``w2 = (1+a)/2``.  At ``|a| >= 1 - 1e-6`` the Bregman
    limits ``B_phi(x, y)`` (a -> 1) and ``B_phi(y, x)`` (a -> -1) are used.
    """
    alpha = _check_alpha(alpha)
    if alpha >= ALPHA_LIMIT_SWITCH:
        return bregman(phi, x, y)
    if alpha <= -ALPHA_LIMIT_SWITCH:
        return bregman(phi, y, x)
    x, y = phi.check(x), phi.check(y)
    w1, w2 = 0.5 * (1 - alpha), 0.5 * (1 + alpha)
    gap = w1 * phi.value(x) + w2 * phi.value(y) - phi.value(phi.check(w1 * x + w2 * y))
    return float(4.0 / (1 - alpha * alpha) * gap)


def _relative_spectrum(A, B) -> np.ndarray:
    """Eigenvalues of ``B^{-1/2} A B^{-1/2}``, i.e. the spectrum of ``B^{-1} A``."""
    Bih = invsqrtm_spd(B)
    C = Bih @ A @ Bih
    return sym_eig(0.5 * (C + C.T)).eigenvalues


def _alpha_gap_sum(c: np.ndarray, w: float) -> float:
    """``sum(log(w c + 1 - w) - w log c)`` computed with ``log1p``."""
    return float(np.sum(np.log1p(w * (c - 1.0)) - w * np.log(c)))


def alpha_logdet(alpha: float, A, B) -> float:
    """Alpha Log-Det divergence between SPD matrices.

    For ``-1 < alpha < 1``::

        4/(1-a^2) log[ det(w1 A + w2 B) / (det(A)^w1 det(B)^w2) ]

    with ``w1 = (1-a)/2`` and ``w2 = (1+a)/2``.  For ``|alpha| >= 1 - 1e-6``
    the limits are used: ``trace(B^{-1}A - I) - log det(B^{-1}A)`` at ``+1``
    and the same with ``A`` and ``B`` swapped at ``-1``.

    Notes
    -----
    Everything is evaluated on the spectrum ``c`` of the pencil, whitened by
    the matrix with the larger weight.  For ``alpha >= 0`` the bracket is
    ``sum(log1p(w1 (c - 1)) - w1 log c)`` with ``c = eig(B^{-1} A)``, which
    avoids the cancellation of three large log-determinants when the
    prefactor ``4/(1-a^2)`` is big.  ``alpha < 0`` mirrors this with the
    roles of ``A`` and ``B`` exchanged, so ``d^a(A, B)`` and ``d^{-a}(B, A)``
    run the same arithmetic.

    Examples
    --------
    >>> round(alpha_logdet(0.0, [[4.0]], [[1.0]]), 6)
    0.892574
    """
    alpha = _check_alpha(alpha)
    A, B = as_spd(A, "A"), as_spd(B, "B")
    check_same_dim(A, B)
    if alpha == 0:
        # average both whitenings so the symmetric member is symmetric bitwise
        g1 = _alpha_gap_sum(_relative_spectrum(A, B), 0.5)
        g2 = _alpha_gap_sum(_relative_spectrum(B, A), 0.5)
        return float(2.0 * (g1 + g2))
    if alpha > 0:
        c, w = _relative_spectrum(A, B), 0.5 * (1 - alpha)
    else:
        c, w = _relative_spectrum(B, A), 0.5 * (1 + alpha)
    if abs(alpha) >= ALPHA_LIMIT_SWITCH:
        return float(np.sum(c - 1.0 - np.log(c)))
    return float(4.0 / (1 - alpha * alpha) * _alpha_gap_sum(c, w))


def check_dual_symmetry(alpha: float, A, B) -> float:
    """``|d^alpha(A, B) - d^{-alpha}(B, A)|``."""
    return abs(alpha_logdet(alpha, A, B) - alpha_logdet(-alpha, B, A))


def fan_gap(A, B, w: float = 0.5) -> float:
    """``log det(wA + (1-w)B) - w log det A - (1-w) log det B`` (nonnegative)."""
    A, B = as_spd(A, "A"), as_spd(B, "B")
    check_same_dim(A, B)
    if not 0.0 <= w <= 1.0:
        raise ValidationError("w must lie in [0, 1]")
    return logdet_spd(w * A + (1 - w) * B) - w * logdet_spd(A) - (1 - w) * logdet_spd(B)
