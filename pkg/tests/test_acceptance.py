"""Acceptance suite: twelve end-to-end properties, each with a runtime budget.

Every test records one PASS/FAIL line (shown in the terminal summary and
printed with ``-s``) before asserting.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from geomlearn import divergences as dv
from geomlearn import kernels as K
from geomlearn import markov as mk
from geomlearn import rkhs
from geomlearn import spd_geometry as sg
from geomlearn.erm import GridModel, Schedule, learning_curve, lipschitz_truth
from geomlearn.laplacian import convergence_sweep
from geomlearn.matfun import logm_spd, random_spd
from geomlearn.selftest import make_rng

pytestmark = pytest.mark.acceptance


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def spd_pairs(rng, count, **kw):
    for _ in range(count):
        n = int(rng.integers(2, 7))
        yield random_spd(rng, n, **kw), random_spd(rng, n, **kw)


def test_01_geodesic_endpoints(report):
    rng = make_rng(1)
    worst = 0.0
    with Timer() as t:
        for A, B in spd_pairs(rng, 200):
            scale = np.linalg.norm(A)
            for metric in ("ai", "bw", "loge"):
                g0, g1 = sg.geodesic(metric, A, B, 0.0), sg.geodesic(metric, A, B, 1.0)
                worst = max(worst, np.linalg.norm(g0 - A) / scale, np.linalg.norm(g1 - B) / scale)
    ok = worst <= 1e-10 and t.elapsed < 5
    report(1, "geodesic endpoints", ok, f"worst relative error {worst:.2e}, {t.elapsed:.1f}s")
    assert ok


def test_02_metric_axioms(report):
    rng = make_rng(2)
    worst = {"ai": 0.0, "loge": 0.0, "bw": 0.0, "congruence": 0.0}
    with Timer() as t:
        for _ in range(1000):
            n = int(rng.integers(2, 7))
            A, B, C = (random_spd(rng, n) for _ in range(3))
            for metric in ("ai", "loge"):
                d = sg.DISTANCES[metric]
                ab, ba, ac, cb = d(A, B), d(B, A), d(A, C), d(C, B)
                worst[metric] = max(worst[metric], -ab, abs(ab - ba), ab - ac - cb, d(A, A))
            ab, ba = sg.bw_distance(A, B), sg.bw_distance(B, A)
            worst["bw"] = max(worst["bw"], -ab, abs(ab - ba), sg.bw_distance(A, A))
            G = rng.standard_normal((n, n)) + n * np.eye(n)
            d0 = sg.ai_distance(A, B)
            GA, GB = G @ A @ G.T, G @ B @ G.T
            moved = sg.ai_distance((GA + GA.T) / 2, (GB + GB.T) / 2)
            worst["congruence"] = max(worst["congruence"], abs(moved - d0) / max(1.0, d0))
    ok = max(worst.values()) <= 1e-8 and t.elapsed < 30
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(2, "metric axioms", ok, f"{detail}, {t.elapsed:.1f}s")
    assert ok


def test_03_logE_kernels_psd(report):
    rng = make_rng(3)
    specs = [K.logE_poly(c, d) for c in (0.0, 1.0) for d in (1, 2, 3)]
    specs += [K.logE_exp(s, p) for s in np.logspace(-1, 1, 10) for p in (0.5, 1.0, 2.0)]
    worst = np.inf
    with Timer() as t:
        for _ in range(200):
            n, m = int(rng.integers(2, 7)), int(rng.integers(2, 26))
            pts = [random_spd(rng, n) for _ in range(m)]
            for spec in specs:
                lam = np.linalg.eigvalsh(K.gram(spec, pts).entries)
                worst = min(worst, lam[0] / abs(lam[-1]))
    ok = worst >= -1e-9 and t.elapsed < 60
    report(3, "log-Euclidean kernels PSD", ok, f"min relative eigenvalue {worst:.2e}, {t.elapsed:.1f}s")
    assert ok


def test_04_stein_kernel_both_directions(report):
    rng = make_rng(4)
    with Timer() as t:
        worst = np.inf
        violations = 0
        for sigma in (0.5, 1.0, 1.6):
            spec = K.stein(sigma)
            sampler = K.mixed_sampler(3)
            for _ in range(200):
                lam = np.linalg.eigvalsh(K.gram(spec, sampler(rng)).entries)
                worst = min(worst, lam[0] / lam[-1])
                violations += lam[0] / lam[-1] < -1e-9
        budget = 100_000
        witness = K.nonpd_witness_search(K.stein(0.75), K.mixed_sampler(3), budget, rng)
        if witness is None:
            # inconclusive: double the budget once
            budget *= 2
            witness = K.nonpd_witness_search(K.stein(0.75), K.mixed_sampler(3), budget, rng)
    found = witness is not None and witness.min_eig < -1e-8
    ok = violations == 0 and found and t.elapsed < 600
    wdetail = f"witness {witness.min_eig:.2e} after {witness.trials} trials" if witness else "no witness"
    report(4, "Stein kernel PD iff admissible", ok,
           f"{violations} violations (worst {worst:.1e}), {wdetail}, {t.elapsed:.1f}s")
    assert ok


def linear_loghs_direct(X1, X2, g1, g2):
    def cov(X):
        Xc = X - X.mean(axis=1, keepdims=True)
        return Xc @ Xc.T / X.shape[1]

    d = X1.shape[0]
    L1 = logm_spd(np.eye(d) + cov(X1) / g1)
    L2 = logm_spd(np.eye(d) + cov(X2) / g2)
    return float(np.sqrt(np.linalg.norm(L1 - L2) ** 2 + np.log(g1 / g2) ** 2))


def test_05_loghs_linear_oracle(report):
    rng = make_rng(5)
    worst = 0.0
    with Timer() as t:
        for _ in range(100):
            m1, m2 = (int(v) for v in rng.integers(1, 11, 2))
            d = m1 + m2 + 4
            X1, X2 = rng.standard_normal((d, m1)), rng.standard_normal((d, m2))
            g1, g2 = np.exp(rng.uniform(-1, 1, 2))
            got = rkhs.loghs_cov_distance(rkhs.RegularizedCovariancePair(X1, X2, g1, g2, K.linear()))
            ref = linear_loghs_direct(X1, X2, g1, g2)
            worst = max(worst, abs(got - ref) / ref)
    ok = worst <= 1e-8 and t.elapsed < 30
    report(5, "Log-HS closed form vs direct", ok, f"worst relative error {worst:.2e}, {t.elapsed:.1f}s")
    assert ok


def test_06_scalar_operator_identity(report):
    rng = make_rng(6)
    spec = K.euclidean_gaussian(gamma=1.0)
    worst = 0.0
    for _ in range(20):
        g1, g2 = np.exp(rng.uniform(-3, 3, 2))
        # a single point has zero covariance, leaving the scalar operators
        pair = rkhs.RegularizedCovariancePair(rng.standard_normal((3, 1)), rng.standard_normal((3, 1)), g1, g2, spec)
        worst = max(worst, abs(rkhs.loghs_cov_distance(pair) - abs(np.log(g1 / g2))))
    ok = worst <= 1e-12
    report(6, "scalar operator identity", ok, f"worst absolute error {worst:.2e}")
    assert ok


def test_07_concentration_bound(report):
    rng = make_rng(7)

    def five_points(r, size):
        return r.integers(0, 5, size=size)[:, None].astype(float)

    with Timer() as t:
        res = rkhs.concentration_montecarlo(K.euclidean_gaussian(gamma=1.0), five_points, 100, 0.1, 2000, rng)
    ok = res.kbar == 1.0 and res.rate <= 0.105 and t.elapsed < 120
    report(7, "concentration bound", ok,
           f"failure rate {res.rate:.4f} (bound {res.bound:.3f}), {t.elapsed:.1f}s")
    assert ok


def test_08_disintegration(report):
    rng = make_rng(8)
    worst_round, worst_loss, least_gap = 0.0, 0.0, np.inf
    with Timer() as t:
        for _ in range(500):
            p, q = (int(v) for v in rng.integers(1, 7, 2))
            mu = mk.random_joint(rng, p, q, zero_row_prob=0.2)
            marg, T = mk.disintegrate(mu)
            worst_round = max(worst_round, np.abs(mk.graph_pushforward(T, marg).table - mu.table).max())
            worst_loss = max(worst_loss, rkhs.correct_loss(T, mu))
            for x in np.flatnonzero(marg.weights > 0):
                for j in range(q):
                    for k in range(q):
                        if j == k or T.rows[x, j] < 0.1:
                            continue
                        rows = T.rows.copy()
                        rows[x, j] -= 0.1
                        rows[x, k] += 0.1
                        loss = rkhs.correct_loss(mk.MarkovKernel(T.source, T.target, rows), mu)
                        least_gap = min(least_gap, loss)
    ok = worst_round <= 1e-12 and worst_loss == 0.0 and least_gap > 1e-6 and t.elapsed < 10
    report(8, "disintegration characterization", ok,
           f"round trip {worst_round:.1e}, loss at truth {worst_loss}, least perturbed loss {least_gap:.2e}, "
           f"{t.elapsed:.1f}s")
    assert ok


def test_09_alpha_logdet(report):
    rng = make_rng(9)
    worst_sym, worst_cont, worst_fan = 0.0, 0.0, 0.0
    with Timer() as t:
        for A, B in spd_pairs(rng, 1000):
            alpha = float(rng.uniform(-1, 1))
            worst_sym = max(worst_sym, dv.check_dual_symmetry(alpha, A, B))
            worst_fan = max(worst_fan, -dv.fan_gap(A, B, float(rng.uniform())))
        # relative spectra within [1/25, 25]: the first-order gap is then below the tolerance
        for A, B in spd_pairs(rng, 1000, cond=5.0, log_scale=0.0):
            for a in (1.0, -1.0):
                lim = dv.alpha_logdet(a, A, B)
                near = dv.alpha_logdet(a * (1 - 1e-4), A, B)
                worst_cont = max(worst_cont, abs(near - lim) / (1 + abs(lim)))
    ok = worst_sym <= 1e-10 and worst_cont <= 1e-3 and worst_fan <= 1e-12 and t.elapsed < 10
    report(9, "alpha log-det", ok,
           f"symmetry {worst_sym:.1e}, continuity {worst_cont:.1e}, Fan breach {worst_fan:.1e}, {t.elapsed:.1f}s")
    assert ok


def test_10_laplacian_convergence(report):
    with Timer() as t:
        rows = convergence_sweep("circle", "cos", (1.0, 0.0), (500, 2000, 8000), range(20), 1.0)
    med = [r.median_error for r in rows]
    ok = med[0] >= med[1] >= med[2] and med[2] <= 0.15 and t.elapsed < 300
    report(10, "point-cloud Laplacian convergence", ok,
           "medians " + " ".join(f"{v:.3f}" for v in med) + f", {t.elapsed:.1f}s")
    assert ok


def test_11_erm_learning_curve(report):
    model = GridModel.uniform(5, 5)
    truth = lipschitz_truth(model)
    sizes = (50, 200, 800)
    schedule = Schedule.power(sizes, 1.0 / 3.0)
    curves = []
    with Timer() as t:
        for rep in range(5):
            rows = learning_curve(model, truth, sizes, schedule, range(10 * rep, 10 * rep + 10))
            curves.append([r.median_dM for r in rows])
    monotone = sum(c[0] >= c[1] >= c[2] for c in curves)
    ok = monotone >= 4 and t.elapsed < 600
    shown = "; ".join(" ".join(f"{v:.3f}" for v in c) for c in curves)
    report(11, "ERM learning curve", ok, f"{monotone}/5 non-increasing ({shown}), {t.elapsed:.1f}s")
    assert ok


def test_12_selftest_determinism(report, tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"selftest{k}.csv"
        res = subprocess.run([sys.executable, "-m", "geomlearn", "selftest", "--seed", "11", "--out", str(target)],
                             capture_output=True, check=False)
        outs.append((res.returncode, target.read_bytes()))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    report(12, "selftest determinism", ok, f"{len(outs[0][1])} bytes, identical={outs[0][1] == outs[1][1]}")
    assert ok
