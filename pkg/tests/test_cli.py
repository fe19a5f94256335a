import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hdcodes.cli import dumps, main


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("HDCODES_THREADS", raising=False)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def read(path):
    with open(path) as fh:
        return fh.read()


def test_dumps_formats():
    text = dumps({"a": Fraction(1, 3), "b": 0.1, "c": Fraction(4)})
    assert '"b": 0.10000000000000001' in text
    assert json.loads(text) == {"a": "1/3", "b": 0.1, "c": "4"}


def test_gen_lda_is_byte_stable(in_tmp):
    assert run("gen-lda", "--n", 4, "--k", 2, "--p", 3, "--seed", 7, "--out", "a.json") == 0
    assert run("gen-lda", "--n", 4, "--k", 2, "--p", 3, "--seed", 7, "--out", "b.json") == 0
    assert read("a.json") == read("b.json")
    data = json.loads(read("a.json"))
    assert data["volume_sq"] == "81"
    man = json.loads(read("a.json.manifest.json"))
    assert man["config"]["seed"] == 7 and "wall_time_s" in man and "numpy" in man["versions"]


def test_manifest_replay(in_tmp):
    run("gen-lda", "--n", 4, "--k", 2, "--p", 2, "--seed", 3, "--out", "a.json")
    first = read("a.json")
    (in_tmp / "a.json").unlink()
    assert run("--replay", "a.json.manifest.json") == 0
    assert read("a.json") == first


def test_build_and_analyze_torus(in_tmp):
    assert run("build-code", "torus", "--n", 2, "--ell", 2, "--q", 1, "--out", "t.json") == 0
    assert json.loads(read("t.json"))["N"] == 8
    assert run("analyze", "--code", "t.json", "--distance", "--out", "r.json") == 0
    rep = json.loads(read("r.json"))
    assert (rep["N"], rep["K"], rep["W"], rep["D_Z"], rep["D_X"]) == (8, 2, 4, 2, 2)


def test_simplex_soundness_report(in_tmp):
    run("build-code", "simplex", "--n", 2, "--q", 1, "--out", "s.json")
    assert run("analyze", "--code", "s.json", "--soundness", "--wmax", 6, "--out", "r.json") == 0
    rep = json.loads(read("r.json"))
    assert rep["K"] == 0
    for side in ("Z", "X"):
        assert rep["soundness"][side]["at_least_one"] is True
    assert run("soundness", "--code", "s.json", "--side", "Z", "--wmax", 2, "--out", "z.json") == 0
    assert list(json.loads(read("z.json"))["soundness"]) == ["Z"]


def test_alist_export(in_tmp):
    assert run("build-code", "torus", "--n", 2, "--ell", 2, "--q", 1, "--format", "alist",
               "--out", "t.alist") == 0
    text = read("t.alist")
    # header is "columns rows"; both matrices have 8 qubit columns and 4 checks
    assert text.startswith("# bd2^T\n8 4\n")
    assert "# bd1\n8 4\n" in text


def test_sphere_product_default_q(in_tmp):
    assert run("build-code", "sphere-product", "--n", 1, "--p", 1, "--out", "c.json") == 0
    run("analyze", "--code", "c.json", "--out", "r.json")
    rep = json.loads(read("r.json"))
    assert (rep["N"], rep["K"]) == (32, 2)


def test_rankin_and_wedge_report(in_tmp):
    run("gen-lda", "--n", 4, "--k", 2, "--p", 3, "--seed", 7, "--out", "l.json")
    assert run("rankin", "--lattice", "l.json", "--m", 2, "--out", "r.json") == 0
    rep = json.loads(read("r.json"))
    assert rep["certified"] is True and rep["rankin"] == "5/9"
    assert run("wedge-report", "--lattice", "l.json", "--m", 2, "--out", "w.json") == 0
    w = json.loads(read("w.json"))
    assert w["shortest_norm"] <= w["bound"]
    assert w["lattice_split"] in ("yes", "no")


def test_min_sublattice(in_tmp):
    assert run("min-sublattice", "--n", 3, "--m", 2, "--h-sq", "5", "--out", "m.json") == 0
    rep = json.loads(read("m.json"))
    assert rep["found"] and rep["volume_sq"] == "1"


def test_experiment_csv(in_tmp):
    args = ["experiment", "first-moment", "--n", 4, "--p", 2, "--m", 2, "--c", 0.7,
            "--trials", 6, "--seed", 1, "--no-runtime"]
    assert run(*args, "--out", "a.csv") == 0
    assert run(*args, "--threads", 2, "--out", "b.csv") == 0
    assert read("a.csv") == read("b.csv")
    rows = list(csv.DictReader(open("a.csv")))
    assert len(rows) == 6 and set(rows[0]) == {"trial", "found", "min_vol", "bound"}
    man = json.loads(read("a.csv.manifest.json"))
    assert man["summary"]["k"] == 2 and man["summary"]["trials"] == 6


def test_threads_env_default(in_tmp, monkeypatch):
    monkeypatch.setenv("HDCODES_THREADS", "3")
    run("gen-lda", "--n", 2, "--k", 1, "--p", 2, "--out", "a.json")
    assert json.loads(read("a.json.manifest.json"))["config"]["threads"] == 3


def test_stdout_and_default_manifest(in_tmp, capsys):
    assert run("gen-lda", "--n", 2, "--k", 1, "--p", 2) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 2
    assert (in_tmp / "hdcodes-manifest.json").exists()


@pytest.mark.parametrize("argv", [
    ["gen-lda", "--n", "4"],                                  # missing flags
    ["gen-lda", "--n", "4", "--k", "2", "--p", "3", "--bogus"],
    ["frobnicate"],
    [],
    ["gen-lda", "--n", "4", "--k", "2", "--p", "4"],          # p not prime
    ["analyze", "--code", "missing.json"],
    ["build-code", "simplex", "--n", "2"],                    # q required
    ["gen-lda", "--n", "2", "--k", "1", "--p", "2", "--threads", "0"],
])
def test_input_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_budget_exit_2(capsys):
    code = main(["min-sublattice", "--n", "5", "--m", "3", "--h-sq", "400", "--budget", "5"])
    assert code == 2
    assert "budget" in capsys.readouterr().err


def test_console_entry_point(in_tmp):
    out = subprocess.run([sys.executable, "-m", "hdcodes.cli", "build-code", "torus", "--n", "2",
                          "--ell", "3", "--q", "1"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["N"] == 18
