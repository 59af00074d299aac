import json

import pytest

from freehardy.cli import main


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv)
    return code, json.loads(out)


def test_eval_basic(capsys):
    code, rep = run_json(capsys, ["eval", "--expr", "0.5*z1", "--d", "1",
                                  "--deg", "2", "--num-points", "2"])
    assert code == 0
    assert rep["schema"] == "freehardy-report/1"
    assert rep["results"]["num_points"] == 2


def test_reports_are_deterministic(capsys):
    argv = ["eval", "--expr", "0.3*z1+0.2*z2", "--d", "2", "--deg", "2",
            "--num-points", "3", "--seed", "7"]
    _, first = run(capsys, argv)
    _, second = run(capsys, argv)
    assert first == second


def test_schur_check_pass_and_fail(capsys):
    code, rep = run_json(capsys, ["schur-check", "--expr", "0.5*z1",
                                  "--d", "1", "--deg", "2", "--N", "6"])
    assert code == 0 and rep["results"]["is_schur"]
    code, rep = run_json(capsys, ["schur-check", "--expr", "1.5*z1",
                                  "--d", "1", "--deg", "2", "--N", "6"])
    assert code == 2 and not rep["results"]["is_schur"]


def test_cayley_of_zero_is_one(capsys):
    code, rep = run_json(capsys, ["cayley", "--expr", "0", "--d", "1",
                                  "--deg", "3"])
    assert code == 0
    terms = rep["results"]["series"]["terms"]
    nonzero = [t for t in terms
               if any(abs(complex(re, im)) > 0
                      for rrow, irow in zip(t["re"], t["im"])
                      for re, im in zip(rrow, irow))]
    assert len(nonzero) == 1
    assert nonzero[0]["word"] == []
    assert nonzero[0]["re"][0][0] == 1.0
    assert nonzero[0]["im"][0][0] == 0.0


def test_moments_report(capsys):
    code, rep = run_json(capsys, ["moments", "--expr", "0.5*z1", "--d", "1",
                                  "--deg", "2", "--N", "2"])
    assert code == 0
    assert rep["results"]["moment_matrix_min_eig"] > 0


def test_herglotz_verify(capsys):
    code, rep = run_json(capsys, ["herglotz-verify", "--expr", "0.5*z1",
                                  "--d", "1", "--deg", "1", "--N", "20",
                                  "--tol", "1e-6"])
    assert code == 0
    assert rep["results"]["max_residual"] <= 1e-6


def test_ce_test_inner(capsys):
    code, rep = run_json(capsys, ["ce-test", "--expr", "z1", "--d", "2",
                                  "--deg", "1", "--N", "6"])
    assert code == 0
    assert rep["results"]["verdict"] == "CE"


def test_gleason_gap_csv_ladder(capsys):
    code, out = run(capsys, ["gleason-gap", "--expr", "0.9*z1", "--d", "1",
                             "--deg", "1", "--N", "8", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].strip() == "N,gap_norm"
    assert len(lines) == 4
    assert abs(float(lines[1].split(",")[1]) - 0.19) < 1e-6


def test_realize_and_transfer_eval(capsys, tmp_path):
    target = tmp_path / "colligation.json"
    code, rep = run_json(capsys, ["realize", "--expr", "0.8*z1*z2",
                                  "--d", "2", "--deg", "2", "--N", "8"])
    assert code == 0
    assert rep["results"]["roundtrip_error"] <= 1e-6
    target.write_text(json.dumps(rep["results"]["colligation"]))
    code, rep = run_json(capsys, ["transfer-eval", "--input", str(target),
                                  "--num-points", "2"])
    assert code == 0
    assert len(rep["results"]["values"]) == 2


def test_complete_column_success(capsys):
    code, rep = run_json(capsys, ["complete-column", "--expr", "0.6*z1",
                                  "--d", "1", "--deg", "1", "--N", "8"])
    assert code == 0
    assert rep["results"]["isometry_defect"] <= 1e-6
    assert rep["results"]["column_gram_defect"] <= 1e-8


def test_complete_column_obstruction(capsys):
    code, rep = run_json(capsys, ["complete-column", "--expr", "z1",
                                  "--d", "1", "--deg", "1", "--N", "8"])
    assert code == 2
    assert rep["verdict"] == "CeObstructionError"


def test_kernel_gram_exit_codes(capsys):
    code, rep = run_json(capsys, ["kernel-gram", "--expr", "0.5*z1",
                                  "--d", "1", "--deg", "1", "--N", "8"])
    assert code == 0 and rep["results"]["certified"]
    code, rep = run_json(capsys, ["kernel-gram", "--expr", "1.5*z1",
                                  "--d", "1", "--deg", "1", "--N", "12",
                                  "--num-points", "4"])
    assert code == 2 and not rep["results"]["certified"]


def test_parse_error_exit_one(capsys):
    code = main(["eval", "--expr", "z1 + @", "--d", "1", "--deg", "2"])
    captured = capsys.readouterr()
    assert code == 1
    assert "error:" in captured.err


def test_missing_series_exit_one(capsys):
    code = main(["schur-check", "--d", "1", "--deg", "2"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code = main(["gns", "--expr", "0.5*z1", "--d", "1", "--deg", "1",
                 "--N", "3", "--out", str(target)])
    assert code == 0
    assert capsys.readouterr().out == ""
    rep = json.loads(target.read_text())
    assert rep["results"]["rank"] == 4


def test_cuntz_check_inner(capsys):
    code, rep = run_json(capsys, ["cuntz-check", "--expr", "z1", "--d", "1",
                                  "--deg", "1", "--N", "4"])
    assert code == 0
    assert rep["results"]["is_cuntz"]


def test_csv_fallback_key_value(capsys):
    code, out = run(capsys, ["schur-check", "--expr", "0.5*z1", "--d", "1",
                             "--deg", "1", "--N", "6", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].strip() == "key,value"
    assert any(line.startswith("is_schur") for line in lines)
