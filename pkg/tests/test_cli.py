import io
import json
import subprocess
import sys

import numpy as np
import pytest

from tscale import TimeScale, discrete_gruss
from tscale.cli import dumps, parse_scale_spec, report_document, report_from_document, run_command
from tscale.calculus import QuadratureConfig
from tscale.errors import InvalidBase, SpecError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def docs(text):
    return [json.loads(line) for line in text.splitlines()]


@pytest.mark.parametrize("spec, segments", [
    ("integers:0..5", tuple((float(i), float(i)) for i in range(6))),
    ("quantum:2:0..3", ((1, 1), (2, 2), (4, 4), (8, 8))),
    ('{"intervals":[[0,1]],"points":[2]}', ((0, 1), (2, 2))),
    ("reals:-1..1", ((-1, 1),)),
    ("uniform:0..1:0.25", ((0, 0), (0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (1, 1))),
])
def test_scale_specs(spec, segments):
    assert parse_scale_spec(spec).segments == segments


@pytest.mark.parametrize("spec", ["bogus", "reals:1", "integers:a..b", '{"foo": 1}', "{oops", "uniform:0..1:0"])
def test_bad_scale_specs(spec):
    with pytest.raises(SpecError):
        parse_scale_spec(spec)


def test_quantum_base():
    with pytest.raises(InvalidBase):
        parse_scale_spec("quantum:1:0..3")


def test_integrate():
    code, out, _ = run("integrate", "--scale", "integers:0..4", "--f", "t", "--alpha", "0.5", "--a", "0", "--b", "4")
    assert code == 0 and docs(out)[0]["value"] == 8.0


def test_alpha_list_gives_one_report_each():
    code, out, _ = run("gruss", "--scale", "reals:0..1", "--f", "t", "--g", "t", "--alpha", "0,0.5,1")
    ds = docs(out)
    assert code == 0 and [d["alpha"] for d in ds] == [0.0, 0.5, 1.0]
    for d in ds:
        assert set(d) == {"inequality", "alpha", "lhs", "rhs", "slack", "satisfied", "error_budget",
                          "bounds", "scale", "window", "config_digest"}
        assert abs(d["lhs"] - 1 / 12) <= 1e-9 and d["rhs"] == 0.25 and d["satisfied"]


def test_csv():
    code, out, _ = run("gruss", "--scale", "integers:0..3", "--f", "t", "--g", "t^2", "--alpha", "0,1", "--csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3 and lines[0].startswith("inequality,alpha,lhs")


def test_derive_and_ftc():
    code, out, _ = run("derive", "--scale", "integers:0..5", "--f", "t^2", "--t", "3", "--alpha", "0.5")
    assert code == 0 and docs(out)[0]["value"] == 6.0
    code, out, _ = run("ftc-defect", "--scale", "integers:0..10", "--f", "t^2", "--t", "4", "--alpha", "0.5")
    assert code == 0 and docs(out)[0]["value"] == 0.5


def test_other_checkers():
    assert run("jensen", "--scale", "integers:0..2", "--f", "t", "--alpha", "0.5", "--h", "square")[0] == 0
    assert run("meansq", "--scale", "integers:0..2", "--f", "t - 1", "--alpha", "0.5")[0] == 0
    code, out, _ = run("quantum-gruss", "--q", "2", "--m", "0", "--n", "2", "--f", "t", "--g", "t")
    assert code == 0 and docs(out)[0]["rhs"] == 2.25
    code, out, _ = run("discrete-gruss", "--x", "0,1", "--y", "0,1")
    assert code == 0 and docs(out)[0]["slack"] == 0.0


def test_fuzz_exit_codes():
    code, out, _ = run("fuzz", "--property", "gruss", "--trials", "200", "--seed", "42")
    assert code == 0 and docs(out)[0]["trials_run"] == 200
    code, out, _ = run("fuzz", "--property", "gruss", "--trials", "300", "--seed", "42", "--rhs-factor", "0.5")
    assert code == 1 and docs(out)[0]["violations"]


def test_violation_exit_code():
    code, _, _ = run("gruss", "--scale", "reals:0..1", "--f", "t", "--g", "t", "--bounds-f", "0,1", "--bounds-g", "0,1")
    assert code == 0
    code, _, err = run("gruss", "--scale", "reals:0..1", "--f", "t", "--g", "t", "--bounds-f", "0,0.5")
    assert code == 2 and "bounds" in err.lower()


@pytest.mark.parametrize("argv, needle", [
    (["integrate", "--scale", "reals:0..1", "--f", "log(t - 2)"], "t=0.0"),
    (["integrate", "--scale", "reals:0..1", "--f", "t +* 2"], "byte 3"),
    (["integrate", "--scale", "nope", "--f", "t"], "unknown scale"),
    (["gruss", "--scale", "reals:0..1", "--f", "t"], "--g"),
    (["nosuchcommand"], ""),
    (["integrate", "--alpha", "x"], ""),
    (["integrate", "--scale", "reals:0..1", "--f", "t", "--alpha", "2"], "alpha"),
])
def test_errors_exit_two(argv, needle, capsys):
    code, _, err = run(*argv)
    capsys.readouterr()
    assert code == 2 and needle in err


def test_table_function_matches_discrete_gruss():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 15))
        x, y = rng.uniform(-2, 2, n).tolist(), rng.uniform(-2, 2, n).tolist()
        fx = json.dumps({"table": [[i, v] for i, v in enumerate(x)] + [[n, x[-1]]]})
        gy = json.dumps({"table": [[i, v] for i, v in enumerate(y)] + [[n, y[-1]]]})
        code, out, _ = run("gruss", "--scale", f"integers:0..{n}", "--f", fx, "--g", gy, "--alpha", "1")
        doc = docs(out)[0]
        ref = discrete_gruss(x, y)
        assert code == 0
        assert abs(doc["lhs"] - ref.lhs) <= 1e-12 and abs(doc["rhs"] - ref.rhs) <= 1e-12


def test_table_with_dense_pieces():
    f = json.dumps({"table": [[2, 5]], "pieces": [[0, 1, "t"]]})
    code, out, _ = run("integrate", "--scale", '{"intervals":[[0,1]],"points":[2]}', "--f", f)
    assert code == 0 and abs(docs(out)[0]["value"] - 1.5) <= 1e-12


def test_document_roundtrip():
    from tscale import check_gruss

    r = check_gruss("sin(t)", "t^3", TimeScale.interval(0, 1.3), 0, 1.3, 0.37)
    doc = report_document(r, TimeScale.interval(0, 1.3), QuadratureConfig())
    back = report_from_document(json.loads(dumps(doc)))
    assert back == r


def test_dumps_precision():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps(2.0) == "2.0" and dumps(1e300) == "1.0000000000000001e+300"
    assert json.loads(dumps({"x": [1 / 3]}))["x"][0] == 1 / 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tscale", "integrate", "--scale", "integers:0..4", "--f", "t"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == 6.0
