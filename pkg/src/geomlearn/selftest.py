"""
Fast property checks run by ``geomlearn selftest``.

Each check draws its inputs from one seeded generator, evaluates a property
over a small batch and reports the worst statistic next to its threshold.
Nothing time-dependent is recorded, so two runs with the same seed produce
identical reports.
"""
from typing import Callable, List, NamedTuple

import numpy as np

from . import divergences as dv
from . import kernels as K
from . import markov as mk
from . import rkhs
from . import spd_geometry as sg
from .erm import GridModel, erm_minimize
from .errors import DomainError
from .laplacian import convergence_sweep
from .matfun import logm_spd, random_spd


class CheckResult(NamedTuple):
    name: str
    passed: bool
    statistic: float
    threshold: float

    def row(self) -> tuple:
        return (self.name, "PASS" if bool(self.passed) else "FAIL", float(self.statistic), float(self.threshold))


def make_rng(seed: int) -> np.random.Generator:
    """The named generator used everywhere in the tool: PCG64."""
    return np.random.Generator(np.random.PCG64(seed))


def _pairs(rng, count, **kw):
    for _ in range(count):
        n = int(rng.integers(2, 7))
        yield random_spd(rng, n, **kw), random_spd(rng, n, **kw)


def check_geodesic_endpoints(rng) -> CheckResult:
    worst = 0.0
    for A, B in _pairs(rng, 40):
        scale = np.linalg.norm(A)
        for metric in sg.GEODESICS:
            g0, g1 = sg.geodesic(metric, A, B, 0.0), sg.geodesic(metric, A, B, 1.0)
            worst = max(worst, np.linalg.norm(g0 - A) / scale, np.linalg.norm(g1 - B) / scale)
    return CheckResult("geodesic_endpoints", worst <= 1e-10, worst, 1e-10)


def _axiom_violation(metric: str, rng, count: int) -> float:
    """Largest breach of positivity, symmetry or the triangle inequality."""
    dist = sg.DISTANCES[metric]
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 7))
        A, B, C = (random_spd(rng, n) for _ in range(3))
        ab, ba, ac, cb = dist(A, B), dist(B, A), dist(A, C), dist(C, B)
        worst = max(worst, -ab, abs(ab - ba), ab - ac - cb, abs(dist(A, A)))
    return worst


def check_metric_axioms(metric: str) -> Callable:
    def run(rng) -> CheckResult:
        v = _axiom_violation(metric, rng, 100)
        return CheckResult(f"{metric}_metric_axioms", v <= 1e-8, v, 1e-8)

    run.__name__ = f"check_{metric}_metric_axioms"
    return run


def check_bw_symmetry(rng) -> CheckResult:
    worst = 0.0
    for A, B in _pairs(rng, 100):
        ab, ba = sg.bw_distance(A, B), sg.bw_distance(B, A)
        worst = max(worst, -ab, abs(ab - ba), sg.bw_distance(A, A))
    return CheckResult("bw_symmetry_positivity", worst <= 1e-8, worst, 1e-8)


def check_logE_kernels_psd(rng) -> CheckResult:
    specs = [K.logE_poly(c, d) for c in (0.0, 1.0) for d in (1, 2, 3)]
    specs += [K.logE_exp(s, p) for s in (0.3, 1.0, 3.0) for p in (0.5, 1.0, 2.0)]
    worst = np.inf
    for _ in range(10):
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 16))
        pts = [random_spd(rng, n) for _ in range(m)]
        for spec in specs:
            lam = np.linalg.eigvalsh(K.gram(spec, pts).entries)
            worst = min(worst, lam[0] / max(abs(lam[-1]), 1e-300))
    return CheckResult("logE_kernels_psd", worst >= -1e-9, worst, -1e-9)


def check_stein_admissible(rng) -> CheckResult:
    sampler = K.mixed_sampler(3)
    worst = np.inf
    for sigma in (0.5, 1.0, 1.6):
        spec = K.stein(sigma)
        for _ in range(30):
            lam = np.linalg.eigvalsh(K.gram(spec, sampler(rng)).entries)
            worst = min(worst, lam[0] / lam[-1])
    return CheckResult("stein_admissible_psd", worst >= -1e-9, worst, -1e-9)


def check_stein_witness(rng) -> CheckResult:
    w = K.nonpd_witness_search(K.stein(0.75), K.mixed_sampler(3), 2000, rng)
    value = w.min_eig if w is not None else 0.0
    return CheckResult("stein_witness_sigma_0.75", w is not None, value, K.WITNESS_THRESHOLD)


def _linear_loghs(X1, X2, g1, g2) -> float:
    def cov(X):
        Xc = X - X.mean(axis=1, keepdims=True)
        return Xc @ Xc.T / X.shape[1]

    d = X1.shape[0]
    L1 = logm_spd(np.eye(d) + cov(X1) / g1)
    L2 = logm_spd(np.eye(d) + cov(X2) / g2)
    return float(np.sqrt(np.linalg.norm(L1 - L2) ** 2 + np.log(g1 / g2) ** 2))


def check_loghs_oracle(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        m1, m2 = (int(v) for v in rng.integers(1, 11, 2))
        d = m1 + m2 + 4
        X1, X2 = rng.standard_normal((d, m1)), rng.standard_normal((d, m2))
        g1, g2 = np.exp(rng.uniform(-1, 1, 2))
        got = rkhs.loghs_cov_distance(rkhs.RegularizedCovariancePair(X1, X2, g1, g2, K.linear()))
        ref = _linear_loghs(X1, X2, g1, g2)
        worst = max(worst, abs(got - ref) / max(ref, 1e-300))
    return CheckResult("loghs_linear_oracle", worst <= 1e-8, worst, 1e-8)


def check_loghs_scalar(rng) -> CheckResult:
    worst = 0.0
    spec = K.euclidean_gaussian(gamma=1.0)
    for _ in range(20):
        g1, g2 = np.exp(rng.uniform(-3, 3, 2))
        pair = rkhs.RegularizedCovariancePair(rng.standard_normal((2, 1)), rng.standard_normal((2, 1)), g1, g2, spec)
        worst = max(worst, abs(rkhs.loghs_cov_distance(pair) - abs(np.log(g1 / g2))))
    return CheckResult("loghs_scalar_identity", worst <= 1e-12, worst, 1e-12)


def check_concentration(rng) -> CheckResult:
    def five_points(r, size):
        return r.integers(0, 5, size=size)[:, None].astype(float)

    res = rkhs.concentration_montecarlo(K.euclidean_gaussian(gamma=1.0), five_points, 100, 0.1, 300, rng)
    return CheckResult("concentration_rate", res.rate <= 0.105, res.rate, 0.105)


def check_disintegration(rng) -> CheckResult:
    worst_round, worst_loss, least_gap = 0.0, 0.0, np.inf
    for _ in range(100):
        p, q = (int(v) for v in rng.integers(1, 7, 2))
        mu = mk.random_joint(rng, p, q, zero_row_prob=0.2)
        marg, T = mk.disintegrate(mu)
        worst_round = max(worst_round, np.abs(mk.graph_pushforward(T, marg).table - mu.table).max())
        worst_loss = max(worst_loss, rkhs.correct_loss(T, mu))
        for x in np.flatnonzero(marg.weights > 0):
            j = int(np.argmax(T.rows[x]))
            if q < 2 or T.rows[x, j] < 0.1:
                continue
            rows = T.rows.copy()
            rows[x, j] -= 0.1
            rows[x, (j + 1) % q] += 0.1
            least_gap = min(least_gap, rkhs.correct_loss(mk.MarkovKernel(T.source, T.target, rows), mu))
    ok = worst_round <= 1e-12 and worst_loss == 0.0 and least_gap > 1e-6
    return CheckResult("disintegration_characterization", ok, max(worst_round, worst_loss), 1e-12)


def check_alpha_logdet(rng) -> CheckResult:
    worst_sym, worst_cont, worst_fan = 0.0, 0.0, 0.0
    for A, B in _pairs(rng, 100):
        alpha = float(rng.uniform(-1, 1))
        worst_sym = max(worst_sym, dv.check_dual_symmetry(alpha, A, B))
        worst_fan = max(worst_fan, -dv.fan_gap(A, B, float(rng.uniform())))
    for A, B in _pairs(rng, 100, cond=5.0, log_scale=0.0):
        for a in (1.0, -1.0):
            lim = dv.alpha_logdet(a, A, B)
            near = dv.alpha_logdet(a * (1 - 1e-4), A, B)
            worst_cont = max(worst_cont, abs(near - lim) / (1 + abs(lim)))
    ok = worst_sym <= 1e-10 and worst_cont <= 1e-3 and worst_fan <= 1e-12
    return CheckResult("alpha_logdet", ok, worst_sym, 1e-10)


def check_laplacian_trend(rng) -> CheckResult:
    base = int(rng.integers(0, 2**31))
    rows = convergence_sweep("circle", "cos", (1.0, 0.0), (500, 2000, 8000), range(base, base + 20), 1.0)
    med = [r.median_error for r in rows]
    ok = med[0] >= med[1] >= med[2] and med[2] <= 0.15
    return CheckResult("laplacian_trend", ok, med[2], 0.15)


def check_erm_interpolation(rng) -> CheckResult:
    model = GridModel.uniform(3, 3)
    worst = 0.0
    for _ in range(3):
        mu = mk.random_joint(rng, 3, 3)
        worst = max(worst, erm_minimize(model, mu, 0.0, budget=2000, rng=rng).value)
    return CheckResult("erm_zero_penalty_fit", worst <= 1e-8, worst, 1e-8)


CHECKS: List[Callable] = [
    check_geodesic_endpoints,
    check_metric_axioms("ai"),
    check_metric_axioms("loge"),
    check_bw_symmetry,
    check_logE_kernels_psd,
    check_stein_admissible,
    check_stein_witness,
    check_loghs_oracle,
    check_loghs_scalar,
    check_concentration,
    check_disintegration,
    check_alpha_logdet,
    check_laplacian_trend,
    check_erm_interpolation,
]


def run_checks(seed: int = 0) -> List[CheckResult]:
    """Run every check, each on its own generator spawned from ``seed``."""
    out = []
    for i, check in enumerate(CHECKS):
        rng = make_rng([int(seed), i])
        try:
            out.append(check(rng))
        except DomainError:
            # a numerical failure inside a check counts as a failed property
            out.append(CheckResult(check.__name__[len("check_"):], False, np.nan, np.nan))
    return out
