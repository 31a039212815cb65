import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from meanzero.cli import main
from meanzero.core import make_bounds
from meanzero.report import VerificationReport, parse_weight, read_table, write_table

GOLDEN = Path(__file__).parent / "golden"
VERIFY_GOLDEN_ARGS = ["verify", "--m", "-1", "--M", "2", "--phi", "pow:1", "--phi", "log:0.01",
                      "--samples", "300", "--cells", "16", "--seed", "7"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestBounds:
    def test_symmetric_text(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "-1", "--M", "1", "--phi", "pow:1")
        assert code == 0
        assert "h* = -mM/(M-m) = 0.5" in out
        assert "coefficient 0.5)" in out

    def test_json_values(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "-1", "--M", "2", "--phi", "pow:2", "--json")
        assert code == 0
        d = json.loads(out)
        assert d["bounds"]["peak"] == pytest.approx(2 / 3, rel=1e-15)
        assert d["theorem1_bound"] == pytest.approx(4 / 27, rel=1e-15)
        assert d["corollary1_bound"] == pytest.approx(2 / 3 / math.sqrt(3), rel=1e-15)
        assert d["corollary2_bound"] == pytest.approx(2 / 3 / math.e, rel=1e-15)
        assert d["perfetti_bound"] == pytest.approx(31 / 27, rel=1e-15)
        assert d["thong_bound"] == pytest.approx(1 / 3, rel=1e-15)

    def test_golden(self, capsys):
        _, out, _ = run(capsys, "bounds", "--m", "-1", "--M", "2", "--phi", "pow:2", "--json")
        assert out == (GOLDEN / "bounds_m-1_M2_pow2.json").read_text()

    def test_log_weight_has_no_power_corollary(self, capsys):
        _, out, _ = run(capsys, "bounds", "--phi", "log:0", "--json")
        d = json.loads(out)
        assert d["corollary1_bound"] is None
        assert math.exp(d["theorem1_bound"]) == pytest.approx(d["corollary2_bound"], rel=1e-14)

    @pytest.mark.parametrize("argv", [["--m", "1", "--M", "2"], ["--phi", "pow:-1"], ["--phi", "cube:3"],
                                      ["--phi", "table:/nonexistent/phi.csv"]])
    def test_config_errors(self, capsys, argv):
        code, _, err = run(capsys, "bounds", *argv)
        assert code == 2
        assert err.startswith("error:")

    def test_error_names_constraint(self, capsys):
        _, _, err = run(capsys, "bounds", "--m", "1", "--M", "2")
        assert "m < 0 < M" in err


def _parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "f", "J"]
    return np.array([[float(c) for c in r] for r in rows[1:]])


class TestExtremal:
    def test_symmetric_stdout(self, capsys):
        code, out, _ = run(capsys, "extremal", "--m", "-1", "--M", "1", "--grid", "4")
        assert code == 0
        data = _parse_csv(out)
        np.testing.assert_array_equal(data[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_array_equal(data[:, 1], [1, 1, -1, -1, -1])
        np.testing.assert_array_equal(data[:, 2], [0, 0.25, 0.5, 0.25, 0])

    @pytest.mark.parametrize("which", ["f0", "f1"])
    def test_file_contents(self, tmp_path, capsys, which):
        path = tmp_path / "ext.csv"
        code, _, _ = run(capsys, "extremal", "--m", "-1", "--M", "2", "--which", which, "--out", str(path))
        assert code == 0
        data = _parse_csv(path.read_text())
        b = make_bounds(-1, 2)
        c = b.c0 if which == "f0" else b.c1
        assert c in data[:, 0]  # exact breakpoint included
        assert data.shape[0] == 102
        x, f, J = data.T
        if which == "f0":
            np.testing.assert_array_equal(f, np.where(x < c, 2.0, -1.0))
            np.testing.assert_allclose(J, np.minimum(2 * x, 1 - x), atol=1e-15)
        else:
            np.testing.assert_array_equal(f, np.where(x < c, -1.0, 2.0))
            np.testing.assert_allclose(J, -np.minimum(x, 2 * (1 - x)), atol=1e-15)
        assert np.max(np.abs(J)) == pytest.approx(2 / 3, rel=1e-15)

    def test_unwritable(self, tmp_path, capsys):
        code, _, err = run(capsys, "extremal", "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 3
        assert "cannot write" in err

    def test_bad_grid(self, capsys):
        assert run(capsys, "extremal", "--grid", "0")[0] == 2


class TestVerify:
    def test_defaults_pass(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        r = VerificationReport.from_json(out)
        assert r.campaign["samples"] == 10_000 and r.campaign["violations"] == 0
        assert r.weights == ["pow:2"] and r.timing is None
        assert r.passed

    def test_golden(self, capsys):
        code, out, _ = run(capsys, *VERIFY_GOLDEN_ARGS)
        assert code == 0
        assert out == (GOLDEN / "verify_m-1_M2_pow1_log001_n300_c16_s7.json").read_text()

    def test_round_trip(self, capsys):
        _, out, _ = run(capsys, *VERIFY_GOLDEN_ARGS)
        r = VerificationReport.from_json(out)
        assert VerificationReport.from_json(r.to_json()) == r
        assert r.to_json() == out

    def test_report_file_and_timing(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        code, out, _ = run(capsys, "verify", "--samples", "50", "--report", str(path), "--timing")
        assert code == 0 and out == ""
        r = VerificationReport.from_json(path.read_text())
        assert set(r.timing) == {"campaign_s", "certificate_s"}

    def test_unwritable_report(self, tmp_path, capsys):
        code, _, _ = run(capsys, "verify", "--samples", "10", "--report", str(tmp_path / "no" / "r.json"))
        assert code == 3

    def test_secretly_decreasing_table_rejected(self, tmp_path, capsys):
        path = tmp_path / "phi.csv"
        path.write_text("x,phi\n0,0\n0.5,1\n1,0.9\n")
        code, out, err = run(capsys, "verify", "--phi", f"table:{path}", "--samples", "10")
        assert code == 2 and out == ""
        assert "nondecreasing" in err

    def test_table_weight_passes(self, tmp_path, capsys):
        path = tmp_path / "phi.csv"
        write_table(path, [0.0, 0.25, 1.0], [0.0, 0.1, 2.0])
        code, out, _ = run(capsys, "verify", "--phi", f"table:{path}", "--samples", "200")
        assert code == 0
        assert json.loads(out)["weights"] == [f"table:{path}"]

    def test_bad_samples(self, capsys):
        assert run(capsys, "verify", "--samples", "0")[0] == 2
        assert run(capsys, "verify", "--cells", "1")[0] == 2

    def test_schema_checked(self):
        with pytest.raises(ValueError):
            VerificationReport.from_dict({"schema": 2})


class TestSearchAndLemma:
    def test_search_two_cells(self, capsys):
        code, out, _ = run(capsys, "search", "--m", "-1", "--M", "1", "--cells", "2")
        assert code == 0
        d = json.loads(out)
        assert d["value"] == pytest.approx(1 / 12, abs=1e-15)
        assert d["best"] in ([1.0, -1.0], [-1.0, 1.0])

    def test_search_twelve_cells(self, capsys):
        _, out, _ = run(capsys, "search", "--m", "-1", "--M", "2", "--cells", "12")
        d = json.loads(out)
        assert d["gap"] <= 1e-10 and d["certifying"]

    def test_search_local(self, capsys):
        code, out, _ = run(capsys, "search", "--cells", "6", "--strategy", "local", "--restarts", "5")
        d = json.loads(out)
        assert code == 0 and not d["certifying"]
        assert d["value"] <= d["bound"] + 1e-9

    def test_search_nonconvex_vertex_is_config_error(self, capsys):
        assert run(capsys, "search", "--phi", "pow:0.5")[0] == 2

    def test_search_cap(self, capsys):
        assert run(capsys, "search", "--cells", "25")[0] == 2

    @pytest.mark.parametrize("spec", ["pow:0.5", "pow:2", "log:0", "log:1"])
    def test_lemma(self, capsys, spec):
        code, out, _ = run(capsys, "lemma", "--phi", spec, "--T", "2", "--json")
        d = json.loads(out)
        assert code == 0 and d["violations"] == 0 and d["pass"]
        assert d["note"] == "strictly increasing on grid"

    def test_lemma_constant_table(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        write_table(path, [0.0, 1.0], [3.0, 3.0])
        code, out, _ = run(capsys, "lemma", "--phi", f"table:{path}")
        assert code == 0
        assert "constant plateau" in out


class TestWeightSpec:
    def test_parse(self, tmp_path):
        assert parse_weight("pow:2").spec() == "pow:2"
        assert parse_weight("log:0.01").spec() == "log:0.01"
        path = tmp_path / "t.csv"
        path.write_text("0,0\n1,2\n")
        assert read_table(path) == ([0.0, 1.0], [0.0, 2.0])
        assert parse_weight(f"table:{path}").T == 1.0

    @pytest.mark.parametrize("spec", ["pow", "pow:", "pow:x", "pow:inf", "log:-1", "exp:1"])
    def test_rejects(self, spec):
        with pytest.raises(ValueError):
            parse_weight(spec)

    @pytest.mark.parametrize("text", ["0,0,1\n", "0,a\n", "0.1,0\n1,1\n", "0,0\n0,1\n"])
    def test_bad_tables(self, tmp_path, text):
        path = tmp_path / "t.csv"
        path.write_text(text)
        with pytest.raises(ValueError):
            parse_weight(f"table:{path}")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "meanzero", "bounds", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["theorem1_bound"] == 0.25
