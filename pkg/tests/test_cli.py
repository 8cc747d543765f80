import json

import numpy as np

from orbitlab.cli import main
from orbitlab.operators import MatrixOperator, write_matrix_file


def run_cli(*args):
    return main(list(args))


class TestDemo:
    def test_unknown_demo_is_usage_error(self, capsys):
        assert run_cli("demo", "nosuchdemo") == 2

    def test_ktz_demo(self, tmp_path, capsys):
        code = run_cli("demo", "ktz", "--out-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "ktz.json").read_text())
        assert report["schema_version"] == 1
        assert all(a["passed"] for a in report["assertions"])
        rows = (tmp_path / "ktz.decay.csv").read_text().strip().splitlines()
        assert rows[0] == "n,decay,expected"
        assert len(rows) == 1 + 200
        assert (tmp_path / "ktz.timing.json").exists()

    def test_limit_one_demo_report(self, tmp_path, capsys):
        code = run_cli("demo", "example33", "--out-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "example33.json").read_text())
        assert report["results"]["orbit_diagnostic"]["verdict"] == "growing"
        assert report["results"]["c0_probe_diagnostic"]["verdict"] == "saturating"
        assert not report["results"]["mean_ergodic_verdict"]["is_mean_ergodic"]

    def test_root_demo_report(self, tmp_path, capsys):
        code = run_cli("demo", "example43", "--out-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "example43.json").read_text())
        res = report["results"]
        assert res["square_difference_diagnostic"]["verdict"] == "saturating"
        assert res["one_minus_symbol_diagnostic"]["verdict"] == "growing"
        assert abs(res["one_minus_symbol_limit"][0] - 2.0) < 1e-12

    def test_witness_demo_writes_certificate(self, tmp_path, capsys):
        code = run_cli("demo", "witness", "--out-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "witness.json").read_text())
        audit = report["results"]["audit"]
        assert audit["exhausted"] is True
        assert audit["achieved_count"] >= 1
        assert all(v >= 1.0 - 1e-6 for v in audit["ladder_norms"])
        cert = tmp_path / "witness.certificate.json"
        assert cert.exists()
        assert run_cli("verify-certificate", str(cert)) == 0

    def test_halfsum_demo(self, tmp_path, capsys):
        code = run_cli("demo", "halfsum", "--out-dir", str(tmp_path))
        assert code == 0

    def test_format_selection(self, tmp_path, capsys):
        only_json = tmp_path / "j"
        assert run_cli("demo", "ktz", "--out-dir", str(only_json), "--json") == 0
        assert (only_json / "ktz.json").exists()
        assert not (only_json / "ktz.decay.csv").exists()
        only_csv = tmp_path / "c"
        assert run_cli("demo", "ktz", "--out-dir", str(only_csv), "--csv") == 0
        assert not (only_csv / "ktz.json").exists()
        assert (only_csv / "ktz.decay.csv").exists()


class TestRun:
    def _write(self, tmp_path, text, name="run.ini"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_compactness_csv_shape(self, tmp_path, capsys):
        cfg = self._write(tmp_path, """
[run]
name = smoke
seed = 7
tol = 1e-8

[operator]
kind = harmonic

[probe]
kind = one

[diagnostic]
op = compactness
epsilons = 1.0
horizons = 20 40 80
""")
        out = tmp_path / "out"
        assert run_cli("run", "--config", str(cfg), "--out-dir", str(out)) == 0
        rows = (out / "smoke.diagnostic.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 3  # header + one row per horizon per epsilon

    def test_decreasing_horizons_rejected(self, tmp_path, capsys):
        cfg = self._write(tmp_path, """
[operator]
kind = harmonic

[diagnostic]
op = compactness
epsilons = 1.0
horizons = 100 50 200
""")
        assert run_cli("run", "--config", str(cfg)) == 2

    def test_matrix_halfsum_spectrum(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        op = MatrixOperator(g / np.linalg.norm(g, 2))
        write_matrix_file(tmp_path / "contraction.txt", op)
        cfg = self._write(tmp_path, """
[run]
name = spec4

[operator]
kind = matrix
path = contraction.txt
norm = euclidean

[diagnostic]
op = halfsum
""")
        out = tmp_path / "out"
        assert run_cli("run", "--config", str(cfg), "--out-dir", str(out)) == 0
        report = json.loads((out / "spec4.json").read_text())
        assert len(report["results"]["spectrum"]["eigenvalues"]) == 4

    def test_missing_config_is_io_error(self, tmp_path, capsys):
        assert run_cli("run", "--config", str(tmp_path / "absent.ini")) == 3

    def test_missing_matrix_file_is_io_error(self, tmp_path, capsys):
        cfg = self._write(tmp_path, """
[operator]
kind = matrix
path = nowhere.txt

[diagnostic]
op = halfsum
""")
        assert run_cli("run", "--config", str(cfg)) == 3

    def test_violated_precondition_is_assertion_failure(self, tmp_path, capsys):
        # ktz on a matrix with peripheral spectrum {1, i} fails its
        # precondition: exit code 1, not a usage error
        op = MatrixOperator(np.diag([1.0, 1j]))
        write_matrix_file(tmp_path / "rot.txt", op)
        cfg = self._write(tmp_path, """
[operator]
kind = matrix
path = rot.txt

[diagnostic]
op = ktz
""")
        assert run_cli("run", "--config", str(cfg)) == 1

    def test_witness_run_reports_partial(self, tmp_path, capsys):
        cfg = self._write(tmp_path, """
[run]
name = wit

[operator]
kind = harmonic

[probe]
kind = one

[diagnostic]
op = witness
count = 2
horizon = 1500
""")
        out = tmp_path / "out"
        assert run_cli("run", "--config", str(cfg), "--out-dir", str(out)) == 0
        report = json.loads((out / "wit.json").read_text())
        assert report["results"]["audit"]["achieved_count"] == 1


class TestVerify:
    def test_missing_certificate(self, capsys):
        assert run_cli("verify-certificate", "/nonexistent/cert.json") == 3
