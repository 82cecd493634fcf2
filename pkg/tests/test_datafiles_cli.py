import contextlib
import io

import numpy as np
import pytest
from numpy.testing import assert_allclose

import zocop
from zocop.cli import run_cli
from zocop.datafiles import (
    read_csv_regression,
    read_libsvm,
    read_problem_file,
    read_trace,
    write_trace,
)
from zocop.exceptions import ParseError
from zocop.ialm import IterationRecord

from conftest import separable_svm_data, write_libsvm


def run(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = run_cli(argv)
    pairs = dict(
        line.split("=", 1) for line in out.getvalue().strip().splitlines() if line
    )
    return code, pairs


class TestReadLibsvm:
    def test_basic(self, tmp_path):
        path = tmp_path / "d.libsvm"
        path.write_text("+1 1:2.0 3:1.5\n-1 2:1.0\n")
        data = read_libsvm(path)
        assert_allclose(data.X, [[2.0, 0.0, 1.5], [0.0, 1.0, 0.0]])
        assert_allclose(data.y, [1.0, -1.0])

    def test_zero_one_labels_mapped(self, tmp_path, caplog):
        path = tmp_path / "d.libsvm"
        path.write_text("1 1:1\n0 1:2\n")
        import logging

        with caplog.at_level(logging.INFO, logger="zocop.datafiles"):
            data = read_libsvm(path)
        assert_allclose(data.y, [1.0, -1.0])
        assert any("mapping labels" in rec.message for rec in caplog.records)

    def test_malformed_label(self, tmp_path):
        path = tmp_path / "d.libsvm"
        path.write_text("abc 1:1\n")
        with pytest.raises(ParseError) as err:
            read_libsvm(path)
        assert err.value.line == 1

    def test_malformed_feature(self, tmp_path):
        path = tmp_path / "d.libsvm"
        path.write_text("+1 1:1\n-1 2:x\n")
        with pytest.raises(ParseError) as err:
            read_libsvm(path)
        assert err.value.line == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "d.libsvm"
        path.write_text("\n")
        with pytest.raises(ParseError):
            read_libsvm(path)

    def test_multilabel(self, tmp_path):
        path = tmp_path / "d.libsvm"
        path.write_text("1,3 1:1\n2 1:2\n1,2 2:1\n")
        data = read_libsvm(path)
        assert data.Y is not None
        assert_allclose(
            data.Y, [[1, -1, 1], [-1, 1, -1], [1, 1, -1]]
        )


class TestReadCsvRegression:
    def test_basic(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,3\n4,5,6\n")
        data = read_csv_regression(path)
        assert_allclose(data.X, [[1.0, 2.0], [4.0, 5.0]])
        assert_allclose(data.y, [3.0, 6.0])

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b,y\n1,2,3\n")
        data = read_csv_regression(path)
        assert_allclose(data.X, [[1.0, 2.0]])

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(ParseError) as err:
            read_csv_regression(path)
        assert err.value.line == 2


class TestTraceRoundTrip:
    def _random_records(self, rng, count):
        rows = []
        for k in range(1, count + 1):
            rows.append(IterationRecord(
                k=k,
                lyapunov_beta=float(rng.standard_normal() * 10.0**rng.integers(-8, 8)),
                merit=float(rng.standard_normal()),
                step_w=float(abs(rng.standard_normal())),
                step_u=float(abs(rng.standard_normal())),
                step_z=float(abs(rng.standard_normal())),
                feas=float(abs(rng.standard_normal())),
                p_residual_max=float(abs(rng.standard_normal())),
                epsilon_k=float(abs(rng.standard_normal())),
                inner_iterations=int(rng.integers(0, 100)),
                zero_one_loss=int(rng.integers(0, 10)),
                f_value=float(rng.standard_normal()),
            ))
        return rows

    def test_empty_trace_header_only(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trace([], path)
        assert path.read_text().count("\n") == 1
        assert read_trace(path) == []

    def test_single_row(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = self._random_records(np.random.default_rng(0), 1)
        write_trace(rows, path)
        assert path.read_text().count("\n") == 2

    def test_bitwise_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = self._random_records(np.random.default_rng(1), 25)
        write_trace(rows, path)
        back = read_trace(path)
        assert back == rows  # dataclass equality is fieldwise and exact


class TestProblemFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text(
            "# toy instance\nlambda = 10\nH = 1 0 ; 0 2\nc = 0.5 -1\nd = 0.25\n"
            "A = 1 0 ; 0 1 ; 1 1\nb = -1 0 2\n"
        )
        prob = read_problem_file(path)
        assert prob.lam == 10.0
        assert_allclose(prob.objective.quadratic_form.H, [[1.0, 0.0], [0.0, 2.0]])
        assert_allclose(prob.A, [[1, 0], [0, 1], [1, 1]])
        assert prob.objective.value(np.zeros(2)) == 0.25

    def test_missing_key(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("lambda = 1\nA = 1\n")
        with pytest.raises(ParseError):
            read_problem_file(path)


@pytest.fixture(scope="module")
def svm_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.libsvm"
    write_libsvm(path, separable_svm_data(seed=7))
    return path


class TestCli:
    def test_svm_end_to_end(self, svm_file, tmp_path):
        trace = tmp_path / "trace.csv"
        code, out = run([
            "svm", "--data", str(svm_file), "--lambda", "10",
            "--trace", str(trace),
        ])
        assert code == 0
        assert out["status"] == "p_stationary"
        assert out["zero_one_loss"] == "0"
        assert out["accuracy"] == "1"
        assert trace.exists()

    def test_svm_deterministic_trace(self, svm_file, tmp_path):
        t1, t2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        args = ["svm", "--data", str(svm_file), "--lambda", "10"]
        assert run(args + ["--trace", str(t1)])[0] == 0
        assert run(args + ["--trace", str(t2)])[0] == 0
        assert t1.read_bytes() == t2.read_bytes()

    def test_diagnose_on_real_trace(self, svm_file, tmp_path):
        trace = tmp_path / "trace.csv"
        assert run(["svm", "--data", str(svm_file), "--lambda", "10",
                    "--trace", str(trace)])[0] == 0
        code, out = run(["diagnose", "--trace", str(trace), "--mu", "1"])
        assert code == 0
        assert out["holds"] == "1"

    def test_diagnose_detects_violation(self, tmp_path):
        trace = tmp_path / "bad.csv"
        rows = [
            IterationRecord(k, 0.0, float(k), 1.0, 0.0, 0.0, 0.0, 1.0, 0.1, 1, 0, 0.0)
            for k in (1, 2)
        ]
        write_trace(rows, trace)
        code, out = run(["diagnose", "--trace", str(trace), "--mu", "1"])
        assert code == 2
        assert out["holds"] == "0"
        assert out["first_violation_k"] == "2"

    def test_solve_problem_file(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("lambda = 10\nH = 1\nc = 0\nA = 1\nb = -1\n")
        code, out = run(["solve", "--problem", str(path)])
        assert code == 0
        assert out["status"] == "p_stationary"
        assert float(out["objective"]) == pytest.approx(0.0, abs=1e-9)

    def test_oracle_check(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("lambda = 10\nH = 1\nc = 0\nA = 1\nb = -1\n")
        code, out = run([
            "oracle-check", "--problem", str(path), "--alpha",
            repr(1.0 / 80.8),
        ])
        assert code == 0
        assert out["matched"] == "1"

    def test_mrc_subcommand(self, tmp_path):
        rng = np.random.default_rng(5)
        n = 10
        t = np.linspace(0.0, 2.0, n)
        X = np.hstack([t[:, None], 1.5 * np.eye(n)])
        y = np.sort(t + 0.01 * rng.standard_normal(n))
        path = tmp_path / "d.csv"
        with open(path, "w") as fh:
            for i in range(n):
                fh.write(",".join(f"{v:.17g}" for v in X[i]) + f",{y[i]:.17g}\n")
        code, out = run([
            "mrc", "--data", str(path), "--lambda1", "1", "--lambda2", "1",
            "--xi", "1e-3", "--mode", "practical", "--rho", "10",
        ])
        assert code == 0
        assert out["zero_one_loss"] == "0"

    def test_tsvm_subcommand(self, svm_file):
        code, out = run([
            "tsvm", "--data", str(svm_file), "--lambda1", "1", "--lambda2", "5",
            "--lambda3", "1", "--lambda4", "5", "--mode", "practical",
            "--rho", "10",
        ])
        assert code == 0
        assert float(out["accuracy"]) == 1.0

    def test_mlc_subcommand(self, tmp_path):
        data = separable_svm_data(seed=9, n=10, lift=1.5)
        path = tmp_path / "m.libsvm"
        with open(path, "w") as fh:
            for i in range(data.X.shape[0]):
                labels = "1" if data.y[i] > 0 else "2"
                if i % 3 == 0:
                    labels += ",3"
                feats = " ".join(
                    f"{j+1}:{data.X[i, j]:.17g}"
                    for j in range(data.X.shape[1]) if data.X[i, j] != 0
                )
                fh.write(f"{labels} {feats}\n")
        code, out = run([
            "mlc", "--data", str(path), "--lambda", "5", "--jobs", "2",
            "--mode", "practical", "--rho", "8",
        ])
        assert code == 0
        assert out["labels"] == "3"

    def test_unknown_flag_exit_3(self, svm_file):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(svm_file), "--lambda", "10",
                            "--bogus"])
        assert code == 3
        assert "usage" in err.getvalue()

    def test_missing_file_exit_4(self, tmp_path):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(tmp_path / "none"),
                            "--lambda", "10"])
        assert code == 4

    def test_parse_error_exit_4(self, tmp_path):
        path = tmp_path / "bad.libsvm"
        path.write_text("notalabel 1:1\n")
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(path), "--lambda", "10"])
        assert code == 4

    def test_certified_rejects_low_rho_exit_3(self, svm_file):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(svm_file), "--lambda", "10",
                            "--rho", "0.5"])
        assert code == 3

    def test_certified_rejects_low_eta_exit_3(self, svm_file):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(svm_file), "--lambda", "10",
                            "--eta", "1e-9"])
        assert code == 3

    def test_certified_rejects_low_t_exit_3(self, svm_file):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = run_cli(["svm", "--data", str(svm_file), "--lambda", "10",
                            "--t", "1e-6"])
        assert code == 3

    def test_max_iters_exit_2(self, svm_file):
        code, out = run(["svm", "--data", str(svm_file), "--lambda", "10",
                         "--max-outer", "1"])
        assert code == 2
        assert out["status"] == "max_iters"
