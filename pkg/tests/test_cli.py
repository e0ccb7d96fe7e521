"""The command line driver: configs, formats, exit codes, figures."""

import json
import os

import pytest

from toprec.cli import main


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestCurveInfo:
    def test_airy(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"cover": {"family": "airy"},
                                      "backend": "exact"})
        rc = main(["--config", cfg, "--format", "json", "curve-info"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        rows = {r["check"]: r["value"] for r in out["rows"]}
        assert rows["charts"] == "1"
        assert rows["u_1"] == "0"

    def test_case1_beta(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "cover": {"family": "case1", "params": {"s1": -1}},
            "backend": "bigfloat:60", "bergman_cutoff": 1})
        rc = main(["--config", cfg, "curve-info"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        rows = {r["check"]: r["value"] for r in out["rows"]}
        assert "beta_12" in rows

    def test_non_generic_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "cover": {"coordinate": "rational",
                      "numerator": [0, 0, 0, "1/3"]},
            "backend": "bigfloat:60"})
        rc = main(["--config", cfg, "curve-info"])
        assert rc == 4
        assert "non-generic" in capsys.readouterr().err

    def test_missing_config(self, capsys):
        rc = main(["curve-info"])
        assert rc == 2


class TestRecursion:
    def test_airy_exact_values(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "cover": {"family": "airy"}, "backend": "exact",
            "phi": {"type": "minus_dy", "y": {"numerator": [0, 1]}},
            "budget": [[0, 3], [1, 1]]})
        rc = main(["--config", cfg, "recursion"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        vals = {r["check"]: r["value"] for r in out["rows"]}
        assert any(v == "1/8" for v in vals.values())

    def test_budget_cap(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "cover": {"family": "airy"}, "backend": "exact",
            "phi": {"type": "minus_dy", "y": {"numerator": [0, 1]}},
            "budget": [[4, 1]]})
        rc = main(["--config", cfg, "recursion"])
        assert rc == 2

    def test_idempotent_output(self, tmp_path):
        cfg = write_config(tmp_path, {
            "cover": {"family": "airy"}, "backend": "exact",
            "phi": {"type": "minus_dy", "y": {"numerator": [0, 1]}},
            "budget": [[0, 3]]})
        out1 = str(tmp_path / "a.json")
        out2 = str(tmp_path / "b.json")
        assert main(["--config", cfg, "--out", out1, "recursion"]) == 0
        assert main(["--config", cfg, "--out", out2, "recursion"]) == 0
        assert open(out1).read() == open(out2).read()


class TestClassify:
    def test_table_and_figure(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"case": 1, "n_range": [0, 2]})
        figs = str(tmp_path / "figs")
        rc = main(["--config", cfg, "--figures", figs, "classify-2d"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["rows"]) == 3
        assert os.path.exists(os.path.join(figs, "classification.png"))


class TestCompare:
    def test_small_compare(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "cover": {"family": "case1", "params": {"s1": -1}},
            "backend": "bigfloat:60", "chart_order": 30,
            "phi": {"type": "primary", "class": "I", "pole_index": 0, "a": 1},
            "budget": [[0, 3]], "kmax": 6, "tolerance": 1e-20})
        rc = main(["--config", cfg, "compare"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["rows"][0]["status"] == "pass"


class TestVerify:
    def test_single_criterion_csv(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"criteria": [1, 2]})
        rc = main(["--config", cfg, "--format", "csv", "verify"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "check,value,source,tolerance,status"
        assert "fail" not in out

    def test_fault_injection_names_the_identity(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"criteria": [5], "fault": "sign_flip"})
        rc = main(["--config", cfg, "verify"])
        assert rc == 3
        out = capsys.readouterr().out
        assert "kernel-expansion identity" in out or "[5]" in out

    def test_figures_written(self, tmp_path, capsys):
        figs = str(tmp_path / "figs")
        cfg = write_config(tmp_path, {"criteria": [1]})
        rc = main(["--config", cfg, "--figures", figs, "verify"])
        assert rc == 0
        assert os.path.exists(os.path.join(figs, "deviations.png"))


class TestRMatrixCmd:
    def test_airy_rmatrix(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"cover": {"family": "airy"},
                                      "backend": "bigfloat:60", "z_order": 4})
        rc = main(["--config", cfg, "r-matrix"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert any(r["check"] == "symplectic defect" for r in out["rows"])
