"""Command line dispatch, exit codes and reproducibility."""
import subprocess
import sys

import numpy as np
import pytest

from geomlearn import cli, csvio
from geomlearn import spd_geometry as sg
from geomlearn.selftest import run_checks


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def spd_files(tmp_path):
    a = write(tmp_path / "a.csv", "dim=2\n2,0\n0,1\n")
    b = write(tmp_path / "b.csv", "dim=2\n1,0\n0,1\n")
    return a, b


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_spd_dist_prints_one_real(capsys, spd_files):
    code, out, _ = run(capsys, "spd", "dist", "--metric", "loge", *spd_files)
    assert code == 0
    assert out.startswith("# geomlearn 0.1.0 command=spd dist seed=0 rng=PCG64\n")
    assert body(out) == [repr(float(np.log(2.0)))]


def test_geodesic_and_logdet_match_library(capsys, spd_files, tmp_path):
    A, B = csvio.read_matrix(spd_files[0]), csvio.read_matrix(spd_files[1])
    code, out, _ = run(capsys, "spd", "geodesic", "--metric", "ai", "--t", "0.25", *spd_files)
    assert code == 0
    got = csvio.parse_matrices("\n".join(body(out)))[0]
    np.testing.assert_array_equal(got, sg.geodesic("ai", A, B, 0.25))
    code, out, _ = run(capsys, "div", "logdet", "--alpha", "1", *spd_files)
    # Bregman limit: tr(B^-1 A) - log det(B^-1 A) - n
    assert float(body(out)[0]) == pytest.approx(3.0 - np.log(2.0) - 2.0, rel=1e-12)


def test_malformed_csv_exits_1(capsys, tmp_path, spd_files):
    bad = write(tmp_path / "bad.csv", "dim=2\n1,x\n0,1\n")
    code, out, err = run(capsys, "spd", "dist", "--metric", "loge", bad, spd_files[1])
    assert code == 1 and out == "" and "non-numeric" in err


def test_missing_file_and_bad_flag_exit_1(capsys, tmp_path, spd_files):
    code, _, err = run(capsys, "spd", "dist", "--metric", "loge", str(tmp_path / "nope.csv"), spd_files[1])
    assert code == 1 and "cannot read" in err
    code, _, _ = run(capsys, "spd", "dist", "--metric", "loge", "--bogus", *spd_files)
    assert code == 1
    code, _, _ = run(capsys, "spd", "dist", "--metric", "riemann", *spd_files)
    assert code == 1


def test_non_spd_exits_2(capsys, tmp_path, spd_files):
    ind = write(tmp_path / "ind.csv", "dim=2\n1,2\n2,1\n")
    code, _, err = run(capsys, "spd", "dist", "--metric", "ai", ind, spd_files[1])
    assert code == 2 and "numerical error" in err


def test_empty_args_print_usage(capsys):
    code, out, _ = run(capsys)
    assert code == 0 and out.startswith("usage: geomlearn")


def test_help_lists_every_subcommand():
    parser = cli.build_parser()
    expected = {
        "spd dist", "spd geodesic", "spd metric", "div logdet", "kernel gram", "kernel psd-check",
        "kernel stein-witness", "kernel negdef", "mmd", "covdist", "twolayer", "markov compose",
        "markov push", "markov disintegrate", "markov verify", "laplacian converge", "erm run", "selftest",
    }
    assert set(parser.leaves) == expected
    for leaf in parser.leaves.values():
        assert leaf.description


def test_config_defaults_and_unknown_keys(capsys, tmp_path, spd_files):
    cfg = write(tmp_path / "cfg.json", '{"alpha": 0.0}')
    code, out, _ = run(capsys, "div", "logdet", "--config", cfg, *spd_files)
    assert code == 0
    expected = 4 * (np.log(1.5) - 0.5 * np.log(2.0))
    assert float(body(out)[0]) == pytest.approx(expected, rel=1e-12)
    bad = write(tmp_path / "bad.json", '{"alpah": 0.0}')
    code, _, err = run(capsys, "div", "logdet", "--config", bad, *spd_files)
    assert code == 1 and "alpah" in err


def test_out_file_and_seed_header(capsys, tmp_path, spd_files):
    target = tmp_path / "res.csv"
    code, out, _ = run(capsys, "spd", "dist", "--seed", "7", "--metric", "bw", "--out", str(target), *spd_files)
    assert code == 0 and out == ""
    text = target.read_bytes()
    assert text.startswith(b"# geomlearn 0.1.0 command=spd dist seed=7 rng=PCG64\n")
    assert b"\r" not in text


def test_kernel_gram_and_psd_check(capsys, tmp_path):
    pts = write(tmp_path / "pts.csv", "dim=2\n2,0\n0,1\n1,0.5\n0.5,1\n3,1\n1,2\n")
    code, out, _ = run(capsys, "kernel", "gram", "--kind", "logE_exp", "--sigma", "1", "--p", "2", pts)
    assert code == 0
    G = csvio.parse_matrices("\n".join(body(out)))[0]
    assert G.shape == (3, 3) and np.allclose(np.diag(G), 1.0)
    gfile = write(tmp_path / "g.csv", "\n".join(body(out)) + "\n")
    code, out, _ = run(capsys, "kernel", "psd-check", gfile)
    assert body(out)[1].endswith(",true")
    code, out, _ = run(capsys, "kernel", "negdef", "--metric", "loge", "--power", "2", pts)
    assert float(body(out)[0]) <= 1e-12


def test_stein_witness_found_and_exhausted(capsys):
    code, out, _ = run(capsys, "kernel", "stein-witness", "--n", "3", "--sigma", "0.75")
    assert code == 0
    lines = out.splitlines()
    min_eig = float(lines[1].split("min_eigenvalue=")[1].split()[0])
    assert min_eig < -1e-8
    assert len(csvio.parse_matrices("\n".join(lines[2:]))) >= 2
    code, out, _ = run(capsys, "kernel", "stein-witness", "--n", "3", "--sigma", "1", "--budget", "20")
    assert code == 0 and body(out) == ["none within budget"]


def test_markov_round_trip(capsys, tmp_path):
    joint = write(tmp_path / "j.csv", "x\\y,a,b\nu,0.2,0.1\nv,0.3,0.4\nw,0,0\n")
    marg = tmp_path / "m.csv"
    code, out, _ = run(capsys, "markov", "disintegrate", "--marginal-out", str(marg), joint)
    assert code == 0
    T = csvio.parse_kernel("\n".join(body(out)))
    np.testing.assert_allclose(T.rows, [[2 / 3, 1 / 3], [3 / 7, 4 / 7], [0.5, 0.5]], rtol=1e-15)
    kfile = write(tmp_path / "T.csv", "\n".join(body(out)) + "\n")
    code, out, _ = run(capsys, "markov", "verify", kfile, joint)
    assert body(out) == ["conditional", "true"]
    code, out, _ = run(capsys, "markov", "push", kfile, str(marg))
    pushed = csvio.parse_measure("\n".join(body(out)))
    np.testing.assert_allclose(pushed.weights, [0.5, 0.5], atol=1e-15)


def test_vector_commands(capsys, tmp_path):
    x1 = write(tmp_path / "x1.csv", "dim=2,3\n0,1,2\n1,0,1\n")
    x2 = write(tmp_path / "x2.csv", "dim=2,2\n0.5,1\n1,0\n")
    code, out, _ = run(capsys, "mmd", x1, x1)
    assert code == 0 and float(body(out)[0]) == 0.0
    code, out, _ = run(capsys, "covdist", "--gamma1", "0.5", "--gamma2", "0.5", x1, x1)
    assert float(body(out)[0]) == 0.0
    code, out, _ = run(capsys, "twolayer", "--gamma", "0.1", "--sigma2", "2", x1, x2)
    K2 = csvio.parse_matrices("\n".join(body(out)))[0]
    assert K2.shape == (2, 2) and np.allclose(np.diag(K2), 1.0) and 0 < K2[0, 1] < 1


def test_laplacian_converge_small(capsys):
    code, out, _ = run(capsys, "laplacian", "converge", "--sizes", "200,800", "--seeds", "3")
    assert code == 0
    rows = body(out)
    assert rows[0] == "m,median_error" and [r.split(",")[0] for r in rows[1:]] == ["200", "800"]


def test_erm_run_small(capsys):
    code, out, _ = run(capsys, "erm", "run", "--grid", "3x3", "--sizes", "20,40", "--seeds", "2", "--budget", "400")
    assert code == 0
    rows = body(out)
    assert rows[0] == "n,gamma,slack,median_dM,failure_rate" and len(rows) == 3
    code, _, _ = run(capsys, "erm", "run", "--grid", "3by3")
    assert code == 1


def test_selftest_passes_and_is_byte_identical(capsys):
    code1, out1, _ = run(capsys, "selftest", "--seed", "3")
    code2, out2, _ = run(capsys, "selftest", "--seed", "3")
    assert code1 == code2 == 0
    assert out1.encode() == out2.encode()
    assert all(",PASS," in line for line in body(out1)[1:])


def test_selftest_catches_loge_sign_flip(monkeypatch, capsys):
    original = sg.DISTANCES["loge"]
    monkeypatch.setitem(sg.DISTANCES, "loge", lambda A, B: -original(A, B))
    by_name = {r.name: r for r in run_checks(0)}
    assert not by_name["loge_metric_axioms"].passed
    assert by_name["ai_metric_axioms"].passed
    code, out, _ = run(capsys, "selftest")
    assert code == 1 and "loge_metric_axioms,FAIL" in out


def test_module_entry_point(tmp_path, spd_files):
    res = subprocess.run([sys.executable, "-m", "geomlearn", "spd", "dist", "--metric", "loge", *spd_files],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.splitlines()[-1] == repr(float(np.log(2.0)))
