import json
import math
import os

import numpy as np
import pytest

from transop import cli
from transop import funcexpr as fe


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_kernel_poisson_at_origin(capsys):
    code, out, _ = _run(capsys, "kernel", "--spec", "poisson-halfplane", "--t", "1", "--x", "0", "--y", "0")
    assert code == 0
    cols, rows = _table(out)
    assert cols == ["x", "y", "t", "value"]
    assert float(rows[0][3]) == 1 / math.pi


def test_kernel_two_dimensional_points(capsys):
    code, out, _ = _run(capsys, "kernel", "--spec", "hermite-heat", "--d", "2", "--t", "0.5",
                        "--x", "0.1,0.2", "--y", "0,0")
    assert code == 0
    assert _table(out)[1][0][0] == "0.10000000000000001 0.20000000000000001"


def test_translate_hermite_example(capsys):
    code, out, _ = _run(capsys, "translate", "--spec", "hermite-heat", "--d", "1", "--f", "hermite:3",
                        "--t", "0.2", "--grid", "-6:6:241")
    assert code == 0
    cols, rows = _table(out)
    data = np.array(rows, dtype=float)
    assert cols == ["x", "value"] and len(data) == 241
    h = fe.Hermite(3)(data[:, 0])
    mask = np.abs(h) > 1e-3
    assert np.allclose(data[mask, 1] / h[mask], math.exp(-1.4), rtol=1e-10)


def test_round_trip_float_format(capsys):
    _, out, _ = _run(capsys, "translate", "--spec", "gauss-weierstrass", "--f", "gaussian:1", "--t", "0.3",
                     "--grid", "-1:1:3")
    for row in _table(out)[1]:
        assert format(float(row[1]), ".17g") == row[1]


def test_metadata_block_replays(capsys, tmp_path):
    out1 = tmp_path / "a.csv"
    assert cli.main(["modulus", "--spec", "hermite-heat", "--f", "hermite:1", "--t", "0.2", "--r", "2",
                     "--out", str(out1)]) == 0
    text = out1.read_text()
    meta = [l for l in text.splitlines() if l.startswith("# config ")]
    assert "# config r = 2" in meta and "# config spec = hermite-heat" in meta
    omega = float(next(l for l in text.splitlines() if l.startswith("# omega:")).split(":")[1])
    assert omega == pytest.approx((1 - math.exp(-0.6)) ** 2, rel=1e-8)
    # the config lines, fed back as a config file, reproduce the run
    cfg = tmp_path / "run.cfg"
    cfg.write_text("\n".join(l[len("# config "):] for l in meta if not l.startswith("# config out")) + "\n")
    out2 = tmp_path / "b.csv"
    assert cli.main(["modulus", "--config", str(cfg), "--out", str(out2)]) == 0
    body = lambda t: [l for l in t.splitlines() if not l.startswith("#")]
    assert body(out2.read_text()) == body(text)


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nspec = gauss-weierstrass\nt = 0.5   # trailing\nx = 0\n")
    code, out, _ = _run(capsys, "kernel", "--config", str(cfg), "--t", "1")
    assert code == 0
    assert "# config t = 1" in out
    assert float(_table(out)[1][0][3]) == pytest.approx(1 / math.sqrt(4 * math.pi))


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("spec = gauss-weierstrass\nsuite = mass\n")
    code, out, err = _run(capsys, "kernel", "--config", str(cfg), "--t", "1", "--x", "0")
    assert code == 2 and "unknown key 'suite'" in err and err.count("\n") == 1 and out == ""


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["kernel", "--spec", "nope", "--t", "1", "--x", "0"],
    ["kernel", "--spec", "poisson-halfplane", "--x", "0"],
    ["translate", "--spec", "hermite-heat", "--f", "hermite:x", "--t", "0.1"],
    ["translate", "--spec", "hermite-heat", "--f", "gaussian:1", "--t", "-1"],
    ["translate", "--spec", "hermite-heat", "--f", "gaussian:1", "--t", "0.1", "--grid", "1:0:3"],
    ["transform", "--spec", "laguerre-heat", "--f", "gaussian:1"],
    ["kfun", "--spec", "poisson-halfplane", "--f", "gaussian:1", "--t", "0.1"],
    ["compact", "--spec", "gauss-weierstrass", "--criterion", "pa"],
    ["verify", "--suite", "nope"],
    ["verify", "--suite", "plancherel", "--spec", "hermite-heat"],
    ["kernel", "--config", "/nonexistent/file.cfg"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2
    assert err.startswith("transop: error:") and err.count("\n") == 1


def test_threads_variable_validated(capsys, monkeypatch):
    monkeypatch.setenv("TRANSOP_THREADS", "0")
    assert _run(capsys, "kernel", "--spec", "poisson-halfplane", "--t", "1", "--x", "0")[0] == 2
    monkeypatch.setenv("TRANSOP_THREADS", "4")
    assert _run(capsys, "kernel", "--spec", "poisson-halfplane", "--t", "1", "--x", "0")[0] == 0


def test_verify_mass_example(capsys):
    code, out, err = _run(capsys, "verify", "--suite", "mass", "--spec", "gauss-weierstrass", "--b", "1",
                          "--tol", "1e-8")
    assert code == 0 and "mass: PASS" in err
    cols, rows = _table(out)
    assert cols[-1] == "result" and len(rows) == 3 and all(r[-1] == "pass" for r in rows)


def test_verify_failure_exit_1(capsys):
    code, out, err = _run(capsys, "verify", "--suite", "mass", "--spec", "poisson-halfplane", "--tol", "1e-30")
    assert code == 1 and "mass: FAIL" in err


def test_json_mirror(capsys):
    code, out, _ = _run(capsys, "transform", "--spec", "gauss-weierstrass", "--f", "gaussian:1",
                        "--grid", "-2:2:5", "--t", "0.5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["columns"][:3] == ["z", "re", "im"]
    z = np.array([r[0] for r in doc["rows"]])
    assert np.allclose([r[1] for r in doc["rows"]], math.sqrt(2 * math.pi) * np.exp(-z * z / 2), atol=1e-13)
    assert doc["meta"]["multiplier_residual"] < 1e-12


def test_compact_families(capsys):
    code, out, _ = _run(capsys, "compact", "--spec", "hermite-heat", "--family", "hermite:10",
                        "--criterion", "pb1", "--h", "0.1")
    assert code == 0
    assert float(_table(out)[1][0][1]) == pytest.approx(1 - math.exp(-2.1), rel=1e-8)
    code, out, _ = _run(capsys, "compact", "--spec", "gauss-weierstrass", "--f",
                        "bump:-1,1;shift(gaussian:1;2)", "--criterion", "pego-reverse")
    assert code == 0 and all(float(r[-1]) >= 0 for r in _table(out)[1])


def test_identical_runs_identical_bytes(tmp_path):
    argv = ["kfun", "--spec", "hermite-heat", "--f", "bump:-1,1", "--t", "0.1", "--r", "1", "--out", "o.csv"]
    outs = []
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        cwd = os.getcwd()
        os.chdir(tmp_path / d)
        try:
            assert cli.main(argv) == 0
        finally:
            os.chdir(cwd)
        outs.append((tmp_path / d / "o.csv").read_bytes())
    assert outs[0] == outs[1]
