"""
Command line front end.

Every command writes CSV (to stdout or ``--out``) preceded by a comment line
recording the tool version, the command and the seed.  Exit status is 0 on
success, 1 for invalid input and 2 for numerical failures such as a matrix
that is not SPD.
"""
import argparse
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import csvio
from . import divergences as dv
from . import kernels as K
from . import markov as mk
from . import rkhs
from . import spd_geometry as sg
from .erm import DEFAULT_BUDGET, DEFAULT_RESTARTS, GridModel, Schedule, learning_curve, lipschitz_truth
from .errors import NumericalError, ValidationError
from .laplacian import SAMPLERS, convergence_sweep
from .parallel import worker_count
from .selftest import make_rng, run_checks

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
GENERATOR = "PCG64"


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as validation errors."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- helpers


def _header(args) -> str:
    return f"# geomlearn {__version__} command={args.command_name} seed={args.seed} rng={GENERATOR}\n"


def _emit(args, body: str) -> None:
    text = _header(args) + body
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _scalar(args, value: float) -> None:
    _emit(args, csvio.fmt(value) + "\n")


def _int_list(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals:
        raise ValidationError("empty list")
    return vals


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ValidationError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise ValidationError("seed must fit in 64 unsigned bits")
    return v


def _grid(text: str):
    try:
        p, q = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValidationError(f"grid must look like 5x5, got {text!r}") from None
    if p < 1 or q < 1:
        raise ValidationError("grid sizes must be positive")
    return p, q


def _dataset(path) -> np.ndarray:
    """A data matrix whose columns are observations."""
    return csvio.read_matrix(path)


def _vector_kernel(args) -> K.KernelSpec:
    if args.kernel == "linear":
        return K.linear()
    return K.euclidean_gaussian(gamma=args.kernel_gamma)


def _kernel_from_args(args) -> K.KernelSpec:
    kind = args.kind
    if kind == "gaussian_metric":
        return K.gaussian_metric(args.metric, args.sigma, args.p)
    if kind == "logE_poly":
        return K.logE_poly(args.c, args.degree)
    if kind == "logE_exp":
        return K.logE_exp(args.sigma, args.p)
    if kind == "stein":
        return K.stein(args.sigma)
    if kind == "euclidean_gaussian":
        return K.euclidean_gaussian(gamma=args.gamma)
    return K.linear()


def _points_for(spec: K.KernelSpec, path) -> list:
    if spec.domain == "spd":
        return csvio.read_matrices(path)
    return list(_dataset(path).T)


# ---------------------------------------------------------------- commands


def cmd_spd_dist(args):
    _scalar(args, sg.distance(args.metric, csvio.read_matrix(args.a), csvio.read_matrix(args.b)))


def cmd_spd_geodesic(args):
    G = sg.geodesic(args.metric, csvio.read_matrix(args.a), csvio.read_matrix(args.b), args.t)
    _emit(args, csvio.format_matrices([G]))


def cmd_spd_metric(args):
    P, U, V = (csvio.read_matrix(f) for f in (args.p, args.u, args.v))
    _scalar(args, sg.metric_tensor(args.metric, P, U, V))


def cmd_div_logdet(args):
    _scalar(args, dv.alpha_logdet(args.alpha, csvio.read_matrix(args.a), csvio.read_matrix(args.b)))


def cmd_kernel_gram(args):
    spec = _kernel_from_args(args)
    G = K.gram(spec, _points_for(spec, args.points))
    _emit(args, csvio.format_matrices([G.entries]))


def cmd_kernel_psd_check(args):
    G = csvio.read_matrix(args.gram)
    lam = K.min_eigenvalue(G)
    _emit(args, csvio.format_table(["min_eigenvalue", "psd"], [(lam, str(K.is_psd(G, args.tol)).lower())]))


def cmd_kernel_stein_witness(args):
    samplers = {"mixed": K.mixed_sampler, "wishart": K.wishart_sampler, "stencil": K.stencil_sampler}
    w = K.nonpd_witness_search(K.stein(args.sigma), samplers[args.sampler](args.n), args.budget, make_rng(args.seed))
    if w is None:
        _emit(args, "none within budget\n")
        return
    note = f"# witness min_eigenvalue={csvio.fmt(w.min_eig)} trials={w.trials}\n"
    _emit(args, note + csvio.format_matrices(w.points))


def cmd_kernel_negdef(args):
    if args.metric == "euclidean":
        X = _dataset(args.points)
        D = np.sqrt(np.maximum(((X.T[:, None, :] - X.T[None, :, :]) ** 2).sum(-1), 0.0))
    else:
        D = sg.pairwise_distances(args.metric, csvio.read_matrices(args.points))
    _scalar(args, K.negdef_check(D ** args.power))


def cmd_mmd(args):
    spec = _vector_kernel(args)
    S1, S2 = rkhs.Sample(_dataset(args.s1).T), rkhs.Sample(_dataset(args.s2).T)
    _scalar(args, rkhs.mmd(spec, S1, S2))


def cmd_covdist(args):
    pair = rkhs.RegularizedCovariancePair(
        _dataset(args.x1), _dataset(args.x2), args.gamma1, args.gamma2, _vector_kernel(args)
    )
    _scalar(args, rkhs.loghs_cov_distance(pair))


def cmd_twolayer(args):
    data = [_dataset(f) for f in args.datasets]
    D = rkhs.two_layer_distance_matrix(data, _vector_kernel(args), args.gamma)
    out = D if args.distances else rkhs.two_layer_kernel(D, args.sigma2)
    _emit(args, csvio.format_matrices([out]))


def cmd_markov_compose(args):
    _emit(args, csvio.format_kernel(mk.compose(csvio.read_kernel(args.first), csvio.read_kernel(args.second))))


def cmd_markov_push(args):
    _emit(args, csvio.format_measure(mk.pushforward(csvio.read_kernel(args.kernel), csvio.read_measure(args.measure))))


def cmd_markov_disintegrate(args):
    mu = csvio.read_joint(args.joint)
    marg, T = mk.disintegrate(mu)
    if args.marginal_out:
        with open(args.marginal_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csvio.format_measure(marg))
    if args.spaces_out:
        with open(args.spaces_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csvio.format_labels(mu.xspace.labels))
            fh.write(csvio.format_labels(mu.yspace.labels))
    _emit(args, csvio.format_kernel(T))


def cmd_markov_verify(args):
    ok = mk.verify_conditional(csvio.read_kernel(args.kernel), csvio.read_joint(args.joint), args.tol)
    _emit(args, "conditional\n" + str(ok).lower() + "\n")


def cmd_laplacian_converge(args):
    seeds = range(args.seed, args.seed + args.seeds)
    rows = convergence_sweep(
        args.manifold, args.eigenfunction, _point(args.point), _int_list(args.sizes), seeds, args.alpha,
        worker_count(args.threads),
    )
    _emit(args, csvio.format_table(["m", "median_error"], [(r.m, r.median_error) for r in rows]))


def _point(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"point must be comma-separated numbers, got {text!r}") from None


def cmd_erm_run(args):
    p, q = _grid(args.grid)
    model = GridModel.uniform(p, q, kernel_gamma=args.kernel_gamma)
    if args.truth:
        given = csvio.read_joint(args.truth)
        if given.table.shape != (p, q):
            raise ValidationError(f"true measure must be a {p}x{q} table")
        truth = mk.JointMeasure(model.xspace, model.yspace, given.table)
    else:
        truth = lipschitz_truth(model)
    sizes = _int_list(args.sizes)
    schedule = Schedule.power(sizes, args.gamma_exp, slack=not args.no_slack)
    seeds = range(args.seed, args.seed + args.seeds)
    rows = learning_curve(model, truth, sizes, schedule, seeds, args.eps, args.budget, args.restarts,
                          worker_count(args.threads))
    _emit(args, csvio.format_table(
        ["n", "gamma", "slack", "median_dM", "failure_rate"],
        [(r.n, r.gamma, r.slack, r.median_dM, r.failure_rate) for r in rows],
    ))


def cmd_selftest(args):
    results = run_checks(args.seed)
    _emit(args, csvio.format_table(["property", "result", "statistic", "threshold"], [r.row() for r in results]))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"selftest: {len(failed)} properties failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="PCG64 seed, printed in the output header (default 0)")
    common.add_argument("--out", help="write the CSV here instead of stdout")
    common.add_argument("--config", help="JSON object of option defaults, e.g. {\"alpha\": 0.5}")
    return common


def _add(sub, name: str, fn: Callable, help: str, description: str, common) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help, description=description, parents=[common])
    p.set_defaults(func=fn)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(
        prog="geomlearn",
        description="Geometry of SPD matrices, kernels on them, RKHS embeddings, Markov kernels, "
        "point-cloud Laplacians and regularized risk minimization.",
    )
    parser.add_argument("--version", action="version", version=f"geomlearn {__version__}")
    top = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    leaves: Dict[str, argparse.ArgumentParser] = {}

    def group(name, help):
        g = top.add_parser(name, help=help, description=help)
        return g.add_subparsers(dest="action", metavar="action", parser_class=_Parser)

    spd = group("spd", "Riemannian structures on SPD matrices")
    for name, fn, text in (
        ("dist", cmd_spd_dist, "distance: ai = ||log(A^-1/2 B A^-1/2)||_F, "
         "bw = sqrt(tr A + tr B - 2 tr (A^1/2 B A^1/2)^1/2), loge = ||log A - log B||_F"),
        ("geodesic", cmd_spd_geodesic, "point gamma(t) on the geodesic from A to B"),
    ):
        p = _add(spd, name, fn, text.split(":")[0], text, common)
        p.add_argument("--metric", choices=sorted(sg.DISTANCES), required=True)
        if name == "geodesic":
            p.add_argument("--t", type=float, required=True, help="position in [0, 1]")
        p.add_argument("a")
        p.add_argument("b")
        leaves[f"spd {name}"] = p
    p = _add(spd, "metric", cmd_spd_metric, "metric tensor g_P(U, V)",
             "metric tensor: ai = tr(P^-1 U P^-1 V), bw = tr(L_P(U) P L_P(V)) with XP + PX = U, "
             "loge = <Dlog_P(U), Dlog_P(V)>", common)
    p.add_argument("--metric", choices=sorted(sg.METRICS), required=True)
    for f in ("p", "u", "v"):
        p.add_argument(f)
    leaves["spd metric"] = p

    div = group("div", "divergences on SPD matrices")
    p = _add(div, "logdet", cmd_div_logdet, "Alpha Log-Det divergence",
             "4/(1-a^2) log det(((1-a)/2) A + ((1+a)/2) B) / (det A^((1-a)/2) det B^((1+a)/2)), "
             "with the Bregman limits tr(B^-1 A) - log det(B^-1 A) - n at a = 1 and A, B swapped at a = -1", common)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("a")
    p.add_argument("b")
    leaves["div logdet"] = p

    ker = group("kernel", "positive and negative definite kernels")
    p = _add(ker, "gram", cmd_kernel_gram, "Gram matrix of a kernel",
             "Gram matrix K_ij = k(x_i, x_j); SPD points come as stacked dim=n blocks, vectors as the "
             "columns of a dim=d,m matrix", common)
    p.add_argument("--kind", choices=K.KINDS, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0, help="exponent of the distance in exp(-d^p / sigma^2)")
    p.add_argument("--c", type=float, default=0.0, help="offset of (c + <log A, log B>)^degree")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0, help="exp(-gamma ||x - y||^2) for euclidean_gaussian")
    p.add_argument("--metric", choices=sorted(sg.DISTANCES), default="loge")
    p.add_argument("points")
    leaves["kernel gram"] = p
    p = _add(ker, "psd-check", cmd_kernel_psd_check, "smallest eigenvalue of a Gram matrix",
             "smallest eigenvalue and PSD verdict (tolerance relative to the spectral norm by default)", common)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("gram")
    leaves["kernel psd-check"] = p
    p = _add(ker, "stein-witness", cmd_kernel_stein_witness, "search for a non-PSD Stein Gram",
             "random search for SPD points whose Stein Gram det(A)^(s/2) det(B)^(s/2) / det((A+B)/2)^s "
             "has an eigenvalue below -1e-8", common)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--sampler", choices=("mixed", "wishart", "stencil"), default="mixed")
    leaves["kernel stein-witness"] = p
    p = _add(ker, "negdef", cmd_kernel_negdef, "negative definiteness of a powered distance",
             "largest sum c_i c_j d(x_i, x_j)^power over unit zero-sum c; <= 0 means negative definite", common)
    p.add_argument("--metric", choices=sorted(sg.DISTANCES) + ["euclidean"], default="loge")
    p.add_argument("--power", type=float, default=2.0)
    p.add_argument("points")
    leaves["kernel negdef"] = p

    def vector_kernel_options(p):
        p.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
        p.add_argument("--kernel-gamma", type=float, default=1.0, help="exp(-g ||x - y||^2)")

    p = _add(top, "mmd", cmd_mmd, "maximum mean discrepancy",
             "||mean embedding of S1 - mean embedding of S2|| in the RKHS; samples are the columns "
             "of dim=d,m matrices", common)
    vector_kernel_options(p)
    p.add_argument("s1")
    p.add_argument("s2")
    leaves["mmd"] = p
    p = _add(top, "covdist", cmd_covdist, "Log-HS distance of regularized covariance operators",
             "||log(C1 + g1 I) - log(C2 + g2 I)|| in the extended Hilbert-Schmidt norm, from Gram matrices", common)
    vector_kernel_options(p)
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--gamma2", type=float, required=True)
    p.add_argument("x1")
    p.add_argument("x2")
    leaves["covdist"] = p
    p = _add(top, "twolayer", cmd_twolayer, "two-layer kernel on datasets",
             "exp(-d^2 / sigma2^2) over the pairwise Log-HS distances of the datasets' covariances", common)
    vector_kernel_options(p)
    p.add_argument("--gamma", type=float, required=True, help="regularization of every covariance")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--distances", action="store_true", help="output the distance matrix instead")
    p.add_argument("datasets", nargs="+")
    leaves["twolayer"] = p

    mar = group("markov", "Markov kernels on finite spaces")
    p = _add(mar, "compose", cmd_markov_compose, "T1 then T2", "(T2 o T1)(x, z) = sum_y T1(x, y) T2(y, z)", common)
    p.add_argument("first")
    p.add_argument("second")
    leaves["markov compose"] = p
    p = _add(mar, "push", cmd_markov_push, "push a measure forward", "(T_* mu)(y) = sum_x mu(x) T(x, y)", common)
    p.add_argument("kernel")
    p.add_argument("measure")
    leaves["markov push"] = p
    p = _add(mar, "disintegrate", cmd_markov_disintegrate, "conditional kernel of a joint measure",
             "T(x, y) = mu(x, y) / mu_X(x), uniform rows where mu_X(x) = 0", common)
    p.add_argument("--marginal-out", help="also write the X-marginal here")
    p.add_argument("--spaces-out", help="also write the X and Y label lists here (JSON, one per line)")
    p.add_argument("joint")
    leaves["markov disintegrate"] = p
    p = _add(mar, "verify", cmd_markov_verify, "is T a conditional of mu?",
             "checks mu_X(x) T(x, y) = mu(x, y) for every cell", common)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("kernel")
    p.add_argument("joint")
    leaves["markov verify"] = p

    lap = group("laplacian", "point-cloud Laplace operator")
    p = _add(lap, "converge", cmd_laplacian_converge, "convergence of the normalized estimator",
             "median over seeds of |L f(p) / (t (4 pi t)^(n/2)) - (Delta f)(p) / vol| relative to the target, "
             "t = m^(-1/(n+2+alpha)); seeds run from --seed upwards", common)
    p.add_argument("--manifold", choices=sorted(SAMPLERS), default="circle")
    p.add_argument("--eigenfunction", default="cos")
    p.add_argument("--point", default="1,0")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--sizes", default="500,2000,8000")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $GEO_THREADS or 1)")
    leaves["laplacian converge"] = p

    erm = group("erm", "regularized risk minimization on a grid")
    p = _add(erm, "run", cmd_erm_run, "learning curve",
             "median d_M between the minimizer of ||(Gamma_f)_* mu_S,X - mu_S||^2 + gamma_n W(f) and the true "
             "conditional, gamma_n = n^(-gamma_exp), slack c_n = gamma_n^2", common)
    p.add_argument("--grid", default="5x5")
    p.add_argument("--sizes", default="50,200,800")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--gamma-exp", type=float, default=1.0 / 3.0)
    p.add_argument("--kernel-gamma", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--eps", type=float, default=0.5, help="threshold for the failure frequency column")
    p.add_argument("--no-slack", action="store_true", help="use c_n = 0")
    p.add_argument("--truth", help="true joint measure CSV (default: smooth bump conditional)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $GEO_THREADS or 1)")
    leaves["erm run"] = p

    p = _add(top, "selftest", cmd_selftest, "fast property checks",
             "runs a fast subset of the library's property checks and prints PASS/FAIL per property", common)
    leaves["selftest"] = p
    parser.leaves = leaves
    return parser


def _apply_config(parser, argv: Sequence[str]) -> argparse.Namespace:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    path = pre.parse_known_args(argv)[0].config
    config = {}
    if path:
        config = {str(k).replace("-", "_"): v for k, v in csvio.read_config(path).items()}
        # config values act as defaults, so options they cover stop being required
        for leaf in parser.leaves.values():
            for action in leaf._actions:
                if action.dest in config and action.option_strings:
                    action.default = config[action.dest]
                    action.required = False
        everywhere = {a.dest for leaf in parser.leaves.values() for a in leaf._actions if a.option_strings}
        for key in config:
            if key not in everywhere:
                raise ValidationError(f"unknown option {key!r} in {path}")
    args = parser.parse_args(argv)
    if config and hasattr(args, "func"):
        known = {a.dest for a in parser.leaves[_command_name(args)]._actions if a.option_strings}
        for key in config:
            if key not in known or key in ("config", "help"):
                raise ValidationError(f"unknown option {key!r} in {path}")
    return args


def _command_name(args) -> str:
    return args.command if getattr(args, "action", None) is None else f"{args.command} {args.action}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_help()
        return EXIT_OK
    try:
        args = _apply_config(parser, argv)
        if not hasattr(args, "func"):
            raise ValidationError(f"missing action; see geomlearn {args.command} --help")
        args.command_name = _command_name(args)
        status = args.func(args)
        return EXIT_OK if status is None else status
    except NumericalError as exc:
        print(f"geomlearn: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"geomlearn: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
