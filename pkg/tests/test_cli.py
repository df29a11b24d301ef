import io
import json
import logging
import logging.handlers

import numpy as np
import openpyxl
import pandas as pd
import pytest

from main import EXIT_OK, EXIT_USAGE, dispatch

@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) not in (logging.StreamHandler, logging.handlers.RotatingFileHandler):
            continue
        root.removeHandler(handler)
        handler.close()

def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err

def read_table(text):
    return pd.read_csv(io.StringIO(text), comment="#")


class TestEvaluators:

    def test_bessel(self, capsys):
        code, out, _ = run(capsys, "bessel", "--points", "0,1", "--theta", "1", "--u", "1", "--threads", "1")
        assert code == EXIT_OK
        assert out.startswith("# config: ")
        frame = read_table(out)
        assert list(frame.columns) == ["u_re", "u_im", "value_re", "value_im", "err_est"]
        assert frame["value_re"][0] == pytest.approx(1.718282, abs=1e-6)

    def test_bessel_several_arguments(self, capsys):
        code, out, _ = run(capsys, "bessel", "--points", "0,1,2", "--theta", "1", "--u", "1,2i", "--threads", "1")
        assert code == EXIT_OK
        frame = read_table(out)
        assert len(frame) == 2
        assert frame["value_re"][0] == pytest.approx(2.952492, abs=1e-6)
        assert frame["u_im"][1] == 2.0

    def test_zero_argument(self, capsys):
        code, out, err = run(capsys, "bessel", "--points", "0,1", "--theta", "1", "--u", "0")
        assert code == EXIT_USAGE
        assert "u must be nonzero" in err
        assert out == ""

    def test_non_numeric_atom(self, capsys, workdir):
        (workdir / "points.csv").write_text("atom\n0\nabc\n")
        code, out, err = run(capsys, "bessel", "--base", "points.csv", "--theta", "1", "--u", "1")
        assert code == EXIT_USAGE
        assert err.startswith("error:")
        assert "non-numeric" in err
        assert out == ""

    def test_ho(self, capsys):
        code, out, _ = run(capsys, "ho", "--points", "1,2", "--theta", "1", "--u", "1,2")
        assert code == EXIT_OK
        np.testing.assert_allclose(read_table(out)["value_re"], [1.5, 7 / 3], atol=1e-6)

    def test_transform_line_contour(self, capsys):
        code, out, _ = run(capsys, "transform", "--points", "0,1", "--c", "2", "--kind", "fourier",
                           "--u-re", "0", "--u-im", "2", "--contour", "line")
        assert code == EXIT_OK
        row = read_table(out).iloc[0]
        expected = (np.exp(2j) - 1) / 2j
        assert abs(complex(row["value_re"], row["value_im"]) - expected) <= 1e-6

    def test_transform_negative_argument(self, capsys):
        code, out, _ = run(capsys, "transform", "--points", "0,1", "--c", "2", "--u=-2i")
        assert code == EXIT_OK
        row = read_table(out).iloc[0]
        expected = (np.exp(-2j) - 1) / -2j
        assert abs(complex(row["value_re"], row["value_im"]) - expected) <= 1e-6

    def test_mellin_rejects_line_contour(self, capsys):
        code, _, err = run(capsys, "transform", "--points", "1,2", "--c", "2", "--kind", "mellin",
                           "--u", "1", "--contour", "line")
        assert code == EXIT_USAGE
        assert "hankel" in err


class TestSampling:

    def test_dp_mean(self, capsys, workdir):
        (workdir / "base.csv").write_text("atom,weight\n0,0.5\n1,0.5\n")
        code, out, _ = run(capsys, "dp-mean", "--base", "base.csv", "--c", "2", "--samples", "1000", "--seed", "42")
        assert code == EXIT_OK
        samples = read_table(out)["sample"]
        assert len(samples) == 1000
        assert samples.between(0, 1).all()

    def test_dp_mean_reproducible(self, capsys, workdir):
        argv = ["dp-mean", "--points", "-1,0.5,2", "--c", "0.8", "--samples", "500", "--seed", "7",
                "--threads", "2", "--out", "means.csv"]
        assert run(capsys, *argv)[0] == EXIT_OK
        first = (workdir / "means.csv").read_bytes()
        assert run(capsys, *argv)[0] == EXIT_OK
        assert (workdir / "means.csv").read_bytes() == first

    def test_shards_do_not_change_output(self, capsys):
        argv = ["dp-mean", "--points", "0,1,3", "--c", "1.5", "--samples", "300", "--seed", "3"]
        _, single, _ = run(capsys, *argv, "--shards", "1")
        _, sharded, _ = run(capsys, *argv, "--shards", "3")
        np.testing.assert_array_equal(read_table(single)["sample"], read_table(sharded)["sample"])

    def test_ambiguous_measure(self, capsys, workdir):
        (workdir / "base.csv").write_text("atom\n0\n1\n")
        code, _, err = run(capsys, "dp-mean", "--points", "0,1", "--base", "base.csv", "--c", "1")
        assert code == EXIT_USAGE
        assert "not both" in err

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "dp-mean", "--base", "absent.csv", "--c", "1")
        assert code == EXIT_USAGE
        assert "File not found" in err

    def test_mk_check(self, capsys):
        code, out, _ = run(capsys, "mk-check", "--points", "0.3", "--c", "1.5", "--samples", "100")
        assert code == EXIT_OK
        document = json.loads(out)
        assert document["max_residual"] < 1e-12
        assert document["config"]["subcommand"] == "mk-check"


class TestMoments:

    def test_mk_moments(self, capsys):
        code, out, _ = run(capsys, "mk-moments", "--points", "0,1", "--c", "1", "--n-max", "4")
        assert code == EXIT_OK
        document = json.loads(out)
        np.testing.assert_allclose(document["mk_moments"], [0.5, 0.375, 0.3125, 0.2734375], atol=1e-12)
        assert set(document) >= {"c", "moments", "kappa", "kappa_tilde", "hankel_min_eig"}

    def test_conjecture(self, capsys):
        code, out, _ = run(capsys, "conjecture", "--rho1", "0,1", "--rho2", "0,1", "--c", "2", "--n-max", "8")
        assert code == EXIT_OK
        document = json.loads(out)
        assert document["label"] == "consistent"
        assert len(document["mu_moments"]) == 8

    def test_conjecture_odd_order(self, capsys):
        code, _, _ = run(capsys, "conjecture", "--rho1", "0", "--rho2", "1", "--c", "1", "--n-max", "5")
        assert code == EXIT_USAGE


class TestSweep:

    def test_classical_with_workbook(self, capsys, workdir):
        code, out, _ = run(capsys, "sweep", "--target", "uniform:0,1", "--regime", "classical",
                           "--N", "4,8", "--u", "1", "--excel", "reports/sweep.xlsx")
        assert code == EXIT_OK
        frame = read_table(out)
        assert frame["N"].tolist() == [4, 8]
        assert "mc_re" not in frame.columns
        workbook = openpyxl.load_workbook(workdir / "output" / "reports" / "sweep.xlsx")
        assert workbook.sheetnames == ["Sweep", "Trend", "Config"]

    def test_workbook_goes_to_output_dir(self, capsys, workdir, monkeypatch):
        monkeypatch.setenv("OUTPUT_DIR", str(workdir / "books"))
        code, _, _ = run(capsys, "sweep", "--target", "uniform:0,1", "--regime", "classical",
                         "--N", "4", "--u", "1", "--excel", "sweep.xlsx")
        assert code == EXIT_OK
        assert (workdir / "books" / "sweep.xlsx").exists()
        assert not (workdir / "sweep.xlsx").exists()

    def test_absolute_workbook_path(self, capsys, workdir):
        target = workdir / "elsewhere" / "sweep.xlsx"
        code, _, _ = run(capsys, "sweep", "--target", "uniform:0,1", "--regime", "classical",
                         "--N", "4", "--u", "1", "--excel", str(target))
        assert code == EXIT_OK
        assert target.exists()

    def test_free_regime(self, capsys):
        code, _, err = run(capsys, "sweep", "--target", "uniform:0,1", "--regime", "free")
        assert code == EXIT_USAGE
        assert "free regime" in err

    def test_bad_target(self, capsys):
        code, _, _ = run(capsys, "sweep", "--target", "gauss:0,1")
        assert code == EXIT_USAGE


class TestDispatch:

    def test_selftest(self, capsys):
        code, out, _ = run(capsys, "selftest", "--threads", "2")
        document = json.loads(out)
        assert document["failures"] == []
        assert document["passed"] is True
        assert code == EXIT_OK

    def test_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == EXIT_OK
        assert "mkrein" in out

    def test_unknown_subcommand(self, capsys):
        assert run(capsys, "laplace")[0] == EXIT_USAGE

    def test_missing_required(self, capsys):
        assert run(capsys, "bessel", "--points", "0,1")[0] == EXIT_USAGE

    def test_invalid_tolerance(self, capsys):
        code, _, err = run(capsys, "bessel", "--points", "0,1", "--theta", "1", "--u", "1", "--tol", "-1")
        assert code == EXIT_USAGE
        assert err.startswith("error:")

    def test_writes_log_file(self, capsys, workdir):
        run(capsys, "bessel", "--points", "0,1", "--theta", "1", "--u", "1")
        assert (workdir / "mkrein.log").exists()
