import hashlib
import json
import re
import subprocess
import sys

import pytest

from qtmsradar.cli import EXIT_CHECK_FAILED, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main

SMALL = """\
[run]
model = tmsv
window_len = 64
num_windows = 400
detector = {detector}
seed = 11
method = {method}
[tmsv]
squeeze_r = 0.3
phase = 0.7
[roc]
bins = 10
"""

ANALYTIC = """\
[run]
model = tmn
window_len = {n}
[tmn]
sigma_sq = 1
[analytic]
rho = {rho}
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def small(tmp_path):
    return write(tmp_path, "small.ini", SMALL.format(detector=3, method="moments"))


class TestExitCodes:
    def test_simulate_ok(self, tmp_path, small, capsys):
        assert main(["simulate", "--config", small, "--out", str(tmp_path / "o")]) == EXIT_OK
        lines = (tmp_path / "o" / "series.csv").read_text().splitlines()
        assert lines[0] == "window_index,value,condition"
        assert len(lines) == 801
        assert " on: detector 3" in capsys.readouterr().out

    def test_missing_config(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_bad_config_value(self, tmp_path):
        bad = write(tmp_path, "bad.ini", "[run]\nmodel = tmsv\nwindow_len = -3\n[tmsv]\nsqueeze_r = 0.1\n")
        assert main(["simulate", "--config", bad, "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unreadable_config(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.ini")]) == EXIT_USAGE

    def test_unknown_figure(self, tmp_path, capsys):
        assert main(["reproduce", "fig99", "--out", str(tmp_path)]) == EXIT_USAGE
        assert "unknown figure" in capsys.readouterr().err

    def test_argparse_errors_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--threads", "0"])
        assert exc.value.code == EXIT_USAGE
        with pytest.raises(SystemExit) as exc:
            main(["analytic", "--pfa-grid", "0.5,1.5"])
        assert exc.value.code == EXIT_USAGE

    def test_bad_roc_file(self, tmp_path):
        roc = write(tmp_path, "roc.csv", "threshold,p_fa\n1,0.5\n")
        assert main(["fit", roc, "--nominal-n", "100"]) == EXIT_USAGE

    def test_numeric_failure(self, tmp_path, capsys):
        cfg = write(tmp_path, "hot.ini", ANALYTIC.format(n=100_000, rho=0.995))
        rc = main(["analytic", "--config", cfg, "--pfa-grid", "0.001", "--out", str(tmp_path)])
        assert rc == EXIT_NUMERIC
        assert "numeric failure" in capsys.readouterr().err

    def test_selftest(self, capsys):
        assert main(["selftest"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FAIL" not in out and "backend" in out

    def test_failed_check_exits_1(self, tmp_path, capsys):
        # the headline figure is known not to reach its target
        rc = main(["reproduce", "fig9", "--out", str(tmp_path), "--windows", "2000"])
        assert rc == EXIT_CHECK_FAILED
        assert re.search(r"^FAIL fig9\.", capsys.readouterr().out, re.M)


class TestManifest:
    def test_hashes_match_artifacts(self, tmp_path, small):
        out = tmp_path / "o"
        assert main(["roc", "--config", small, "--out", str(out)]) == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "roc"
        assert set(manifest["artifacts"]) >= {"series.csv", "roc.csv"}
        for name, digest in manifest["artifacts"].items():
            assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
        assert manifest["config"]["seed"] == 11

    def test_seed_override(self, tmp_path, small):
        main(["simulate", "--config", small, "--seed", "99", "--out", str(tmp_path)])
        assert json.loads((tmp_path / "manifest.json").read_text())["config"]["seed"] == 99


class TestDeterminism:
    @pytest.mark.parametrize("method, detector", [("moments", 3), ("samples", 5)])
    def test_threads_byte_identical(self, tmp_path, method, detector):
        cfg = write(tmp_path, "c.ini", SMALL.format(detector=detector, method=method))
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"t{threads}"
            assert main(["roc", "--config", cfg, "--threads", threads, "--out", str(out)]) == EXIT_OK
            outs.append(out)
        for name in ("series.csv", "roc.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_seed_changes_output(self, tmp_path, small):
        main(["simulate", "--config", small, "--seed", "1", "--out", str(tmp_path / "a")])
        main(["simulate", "--config", small, "--seed", "2", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "series.csv").read_bytes() != (tmp_path / "b" / "series.csv").read_bytes()


class TestAnalyticFitGain:
    def test_analytic_then_fit(self, tmp_path, capsys):
        cfg = write(tmp_path, "a.ini", ANALYTIC.format(n=1000, rho=0.1))
        assert main(["analytic", "--config", cfg, "--out", str(tmp_path / "an")]) == EXIT_OK
        capsys.readouterr()
        roc = str(tmp_path / "an" / "roc.csv")
        assert main(["fit", roc, "--nominal-n", "1000", "--out", str(tmp_path / "fit")]) == EXIT_OK
        rho = float(re.search(r"rho_hat (\S+)", capsys.readouterr().out).group(1))
        assert rho == pytest.approx(0.1, abs=1e-5)
        saved = json.loads((tmp_path / "fit" / "fit.json").read_text())
        assert saved["nominal_n"] == 1000

    def test_gain(self, tmp_path, capsys):
        # p_d depends on N rho^2, so halving rho needs four times the samples
        a = write(tmp_path, "a.ini", ANALYTIC.format(n=1000, rho=0.1))
        b = write(tmp_path, "b.ini", ANALYTIC.format(n=1000, rho=0.05))
        assert main(["gain", a, b, "--out", str(tmp_path / "g")]) == EXIT_OK
        k = float(re.search(r"^k (\S+)", capsys.readouterr().out, re.M).group(1))
        assert 3.5 < k < 4.5
        assert (tmp_path / "g" / "gain.csv").read_text().startswith("k,objective\n")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qtmsradar", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("qtmsradar ")
