import csv
import io
import json
import subprocess
import sys

import pytest

from bplab.cli import EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_OK, dispatch, parse_complex

KEYS = {"version", "command", "params", "result", "diagnostics"}


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


def test_measure_check(capsys):
    code, doc = run_json(capsys, "measure", "check", "--d", "4", "--p", "5", "--max-degree", "4")
    assert code == EXIT_OK
    assert set(doc) == KEYS
    assert doc["command"] == "measure check"
    assert all(r["passed"] for r in doc["result"]["table"])
    assert doc["diagnostics"]["passed"] is True
    assert doc["diagnostics"]["printed_mass"] == pytest.approx(0.25)


def test_non_fundamental_discriminant(capsys):
    code, out, err = run(capsys, "classgroup", "info", "--d", "5")
    assert code == EXIT_INVALID
    assert out == "" and "error" in err


def test_unknown_subcommand_and_flag(capsys):
    code, out, err = run(capsys, "nosuch")
    assert code == EXIT_INVALID and "usage" in err
    code, out, err = run(capsys, "gl2", "tau", "--bogus", "1")
    assert code == EXIT_INVALID


def test_failed_check_exit_code(capsys):
    # far too few Kloosterman terms for the empty weight-14 space
    code, doc = run_json(capsys, "gl2", "petersson", "--k", "14", "--L", "1", "--c-max", "1")
    assert code == EXIT_CHECK_FAILED
    assert doc["diagnostics"]["insufficient_cutoff"] is True


def test_petersson(capsys):
    code, doc = run_json(capsys, "gl2", "petersson", "--k", "14", "--L", "3")
    assert code == EXIT_OK
    assert abs(doc["result"]["side"]) < 1e-6


def test_sugano_expand(capsys):
    code, doc = run_json(capsys, "sugano", "expand", "--d", "4", "--p", "5", "--l", "1", "--m", "0")
    assert code == EXIT_OK
    r = doc["result"]
    assert r["mode"] == "exact" and r["trace_degree"] == 1
    assert r["datum"] == {"p": 5, "epsilon": 1, "lambda_p": 2}
    assert r["polynomial"]["terms"]["1,0"] == ["1", "0"]
    assert r["polynomial"]["terms"]["0,0"] == ["0", "-2/5"]


def test_classgroup_info(capsys):
    code, doc = run_json(capsys, "classgroup", "info", "--d", "23")
    assert code == EXIT_OK
    r = doc["result"]
    assert r["h"] == 3 and r["w"] == 2
    assert sorted(map(tuple, r["forms"])) == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]
    triv = r["characters"][0]
    assert triv["autcsum_lhs"] == "12"
    # 2 splits, 5 is inert for -23
    assert triv["lambda_p"]["2"] == 2 and triv["lambda_p"]["5"] == 0
    assert r["characters"][1]["lambda_p"]["2"] == -1
    assert len(triv["lambda_p"]) == 15


def test_lfun_average(capsys):
    code, doc = run_json(capsys, "lfun", "average", "--d", "4", "--s", "2", "--prime-cutoff", "10000")
    assert code == EXIT_OK
    assert doc["result"]["relative_deviation"] < 1e-3
    code, doc = run_json(capsys, "lfun", "average", "--d", "23", "--char-index", "1", "--s", "2,0.5",
                         "--prime-cutoff", "1000")
    assert code == EXIT_OK


def test_parse_complex():
    assert parse_complex("1.5") == 1.5
    assert parse_complex("1,-2") == complex(1, -2)


def test_lowlying_density(capsys):
    argv = ("lowlying", "density", "--d", "4", "--k", "1e4", "--prime-cutoff", "100",
            "--samples", "200", "--seed", "3")
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert {"estimate", "stderr", "target_sp", "target_o", "mk", "nk"} <= set(doc["result"])
    code2, out2, _ = run(capsys, *argv)
    assert out2 == out


def test_support_warning(capsys):
    code, out, err = run(capsys, "lowlying", "density", "--alpha", "0.3", "--prime-cutoff", "50",
                         "--samples", "100")
    assert "4/15" in err


def test_rmt_deterministic_across_threads(capsys, monkeypatch):
    argv = ("rmt", "density", "--ensemble", "so", "--n", "3", "--samples", "3000", "--seed", "5")
    monkeypatch.setenv("BPLAB_THREADS", "1")
    code, one, _ = run(capsys, *argv)
    monkeypatch.setenv("BPLAB_THREADS", "4")
    _, four, _ = run(capsys, *argv)
    assert code == EXIT_OK and one == four
    code, doc = run_json(capsys, "rmt", "cn", "--n", "2", "--samples", "20000", "--seed", "1")
    assert code == EXIT_OK
    assert doc["result"]["c_n"] == pytest.approx(0.5, abs=0.03)


def test_rmt_weighted(capsys):
    code, doc = run_json(capsys, "rmt", "density", "--ensemble", "so", "--n", "2", "--samples", "2000",
                         "--weighted")
    assert code == EXIT_OK
    assert "exact_finite_n" not in doc["result"]


def test_csv_output(capsys):
    code, out, _ = run(capsys, "measure", "check", "--d", "3", "--p", "2", "--max-degree", "2",
                       "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and "deviation" in rows[0]
    code, out, _ = run(capsys, "gl2", "tau", "--n", "5", "--format", "csv")
    assert out.splitlines()[0] == "key,value"
    assert out.splitlines()[1] == 'tau,"[1, -24, 252, -1472, 4830]"'


def test_bessel_bounds_command(capsys):
    code, doc = run_json(capsys, "gl2", "bessel-bounds", "--k", "10")
    assert code == EXIT_OK
    assert {r["bound"] for r in doc["result"]["table"]} == {"small_argument", "uniform", "crude"}


def test_entry_point_bytes_identical():
    cmd = [sys.executable, "-m", "bplab.cli", "gl2", "tau", "--n", "12"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout
    assert json.loads(a.stdout)["result"]["tau"][11] == -370944
