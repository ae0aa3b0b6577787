import json
import subprocess
import sys

import pytest

from simplex_kernels import __version__, cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_jacobi(capsys):
    assert run(capsys, "eval", "jacobi", "--alpha", "1,1", "--n", "0", "--x", "1/2,1/2", "--y", "1/3,2/3") == (0, "1\n", "")
    code, out, _ = run(capsys, "eval", "jacobi", "--alpha", "1,1", "--n", "1", "--x", "1/2,1/2", "--y", "1/2,1/2")
    assert code == 0 and out == "0\n"
    code, out, _ = run(capsys, "eval", "jacobi", "--alpha", "1,1", "--n", "1", "--quantity", "xi",
                       "--x", "1,0", "--y", "1,0")
    assert out == "2\n"


def test_eval_float_flavor(capsys):
    code, out, _ = run(capsys, "eval", "jacobi", "--alpha", "1,1", "--n", "2", "--flavor", "float",
                       "--x", "0.25,0.75", "--y", "0.5,0.5")
    assert code == 0 and "/" not in out
    float(out)


def test_eval_hahn_and_bounds(capsys):
    code, out, _ = run(capsys, "eval", "hahn", "--alpha", "1,1", "--n", "1", "--quantity", "xi",
                       "--r", "1,0", "--s", "1,0")
    assert (code, out) == (0, "10/9\n")
    code, _, err = run(capsys, "eval", "hahn", "--alpha", "1,1", "--n", "3", "--r", "1,1", "--s", "2,0")
    assert code == 3 and "N=2" in err


def test_eval_symmetric_kinds(capsys):
    code, out, _ = run(capsys, "eval", "ranked", "--theta", "3/2", "--d", "3", "--n", "1",
                       "--x", "1/2,1/3,1/6", "--y", "1/5,1/5,3/5")
    assert (code, out) == (0, "0\n")
    code, out, _ = run(capsys, "eval", "esf", "--theta", "3/2", "--n", "0", "--r", "2,1", "--s", "1,1,1")
    assert (code, out) == (0, "1\n")
    code, out, _ = run(capsys, "eval", "pd", "--theta", "1", "--n", "1", "--x", "0.6,0.4", "--y", "0.5,0.5")
    assert code == 0 and float(out) == 0.0


def test_eval_report_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "eval", "jacobi", "--alpha", "1,2", "--n", "2", "--x", "1/3,2/3",
                     "--y", "1/4,3/4", "--seed", "5", "--out", str(out))
    rep = json.loads(out.read_text())
    assert code == 0
    assert rep["schema"] == cli.SCHEMA and rep["version"] == __version__
    assert rep["seed"] == 5 and rep["flavor"] == "exact" and "truncation" in rep
    assert "/" in rep["value"] or rep["value"].lstrip("-").isdigit()


@pytest.mark.parametrize("argv", [
    ("eval", "jacobi", "--alpha", "1,x", "--n", "1", "--x", "1,0", "--y", "1,0"),
    ("eval", "jacobi", "--alpha", "1,1", "--n", "1", "--x", "1,0,0", "--y", "1,0"),
    ("eval", "jacobi", "--alpha", "1,1", "--n", "1", "--y", "1,0"),
    ("pds", "scan", "--wf", "1", "--dirac", "2"),
    ("pds", "scan", "--wf", "1", "--grid", "0"),
])
def test_invalid_configuration_exits_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "invalid configuration" in err


def test_thread_cap_env(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv(cli.THREADS_ENV, "0")
    assert run(capsys, "pds", "pmf2rho", "--dirac", "1")[0] == 2
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    out = tmp_path / "t.json"
    assert run(capsys, "pds", "pmf2rho", "--dirac", "1", "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["threads"] == 4


def test_domain_error_exits_3(capsys):
    code, _, err = run(capsys, "eval", "jacobi", "--alpha", "1,0", "--n", "1", "--x", "1,0", "--y", "1,0")
    assert code == 3 and "domain error" in err


def test_verify_orthogonality_passes(capsys):
    code, out, _ = run(capsys, "verify", "orthogonality", "--alpha", "1,1", "--N", "4", "--points", "2")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass" and rep["failed"] == 0
    assert len(rep["checks"]) == 2 * 25
    assert all(c["mode"] == "exact" for c in rep["checks"])


def test_verify_gasper(capsys):
    code, out, _ = run(capsys, "verify", "gasper", "--alpha", "1,1", "--N", "5")
    rep = json.loads(out)
    assert code == 0 and len(rep["checks"]) == 6 and all(c["passed"] for c in rep["checks"])


def test_verify_zchain_small(capsys):
    code, out, _ = run(capsys, "verify", "zchain", "--alpha", "2,2,1", "--N", "2", "--points", "1",
                       "--draws", "50000", "--seed", "3")
    rep = json.loads(out)
    assert code == 0
    assert all(abs(c["z"]) <= 3 for c in rep["checks"])


def test_verify_hahn_mixture_and_roundtrip(capsys):
    code, out, _ = run(capsys, "verify", "hahn-mixture", "--alpha", "2,2,1", "--N", "2", "--draws", "0")
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run(capsys, "verify", "pds-roundtrip", "--alpha", "1,1,2", "--N", "5")
    assert code == 0 and json.loads(out)["status"] == "pass"


def test_verify_failure_exits_1(monkeypatch, capsys):
    monkeypatch.setitem(cli.SUITES, "gasper", lambda args, cfg, rng: [{"check": "forced", "passed": False}])
    code, out, _ = run(capsys, "verify", "gasper")
    assert code == 1 and json.loads(out)["status"] == "fail"


def test_sample_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(capsys, "sample", "copula", "--alpha", "1,1", "--m", "2", "--count", "100000",
                   "--seed", "7", "--out", str(p))[0] == 0
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == "x1,x2,y1,y2,seed" and len(lines) == 100_001


@pytest.mark.parametrize("argv,header", [
    (("sample", "dirichlet", "--alpha", "1,2,3"), "x1,x2,x3,seed"),
    (("sample", "dm", "--alpha", "1,2", "--N", "4"), "r1,r2,seed"),
    (("sample", "zchain", "--alpha", "2,2,1", "--x", "0.5,0.25,0.25", "--y", "0.2,0.3,0.5"), "z,seed"),
    (("sample", "copula", "--theta", "1", "--pmf", "1/2,1/2"), None),
    (("sample", "pd", "--theta", "1"), None),
])
def test_sample_targets(capsys, argv, header):
    code, out, _ = run(capsys, *argv, "--count", "20")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 21
    if header:
        assert lines[0] == header


def test_pds_transforms(capsys):
    code, out, _ = run(capsys, "pds", "pmf2rho", "--dirac", "2", "--alpha", "1,1", "--truncation", "3")
    rep = json.loads(out)
    assert code == 0 and rep["output"]["values"] == ["1", "1/2", "1/10", "0"]
    code, out, _ = run(capsys, "pds", "scan", "--wf", "1", "--alpha", "1,1", "--N", "4", "--truncation", "10")
    rep = json.loads(out)
    assert rep["kind"] == "hpds" and rep["report"]["verdict"] == "certified-positive"
    code, out, _ = run(capsys, "pds", "j2h", "--seq", "1,1/2,1/4", "--N", "2")
    assert json.loads(out)["output"]["values"] == ["1", "1/4", "1/40"]
    code, out, _ = run(capsys, "pds", "rho2pmf", "--seq", "1,1/2,1/10")
    rep = json.loads(out)
    assert rep["output"]["values"] == ["0", "0", "1"] and rep["is_pmf"]
    code, out, _ = run(capsys, "pds", "scan", "--seq", "1,-1", "--grid", "10")
    assert json.loads(out)["report"]["verdict"] == "violated"
    code, out, _ = run(capsys, "pds", "bernstein", "--seq", "1,0,0", "--N", "3")
    assert json.loads(out)["output"]["values"] == ["1", "0", "0", "0"]


def test_exact_reports_are_reproducible(tmp_path, capsys):
    outs = []
    for name in ("a.json", "b.json"):
        p = tmp_path / name
        run(capsys, "verify", "orthogonality", "--alpha", "1,2", "--N", "2", "--seed", "11", "--out", str(p))
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "simplex_kernels", "eval", "jacobi", "--alpha", "1,1",
                          "--n", "0", "--x", "1,0", "--y", "0,1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "1\n"
    res = subprocess.run([sys.executable, "-m", "simplex_kernels", "eval", "hahn", "--alpha", "1,1",
                          "--n", "2", "--r", "1,0", "--s", "0,1"], capture_output=True, text=True)
    assert res.returncode == 3
