import csv
import io
import json
import math

import pytest

from weakval.cli import main, parse_operator, parse_state


def run(args, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows_of(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("# manifest:")]
    return list(csv.DictReader(lines))


def test_parse_builders():
    assert parse_operator("lowering:s=4").shape == (5, 5)
    assert parse_operator("lowering:4").shape == (5, 5)
    assert abs(parse_operator("raising:s=1")[1, 0] - 1) < 1e-15
    assert abs(parse_operator("amp-damp:p=0.5,k=2")[0, 1] - math.sqrt(0.5)) < 1e-15
    assert abs(parse_operator("pauli:y")[0, 1] + 1j) < 1e-15
    assert parse_operator("identity:d=3").shape == (3, 3)
    assert parse_operator("[[[0,0],[1,0]],[[0,0],[0,0]]]")[0, 1] == 1
    assert abs(parse_state("bloch:3.141592653589793,0")[1] - 1) < 1e-15
    assert parse_state("number:2", 4)[2] == 1
    assert parse_state("basis:k=1,d=3")[1] == 1
    assert parse_state("phase-state:3,1,0").shape == (4,)
    assert parse_state("equal:s=2,nu=0.3").shape == (3,)


def test_expectation_lowering():
    code, out, _ = run(["expectation", "--operator", "lowering:s=1", "--state", "equal:1"])
    assert code == 0
    row = rows_of(out)[0]
    assert abs(float(row["re"]) - 0.5) < 1e-12 and abs(float(row["im"])) < 1e-12
    assert row["fallback"] == "false"


def test_expectation_identity_and_pt():
    code, out, _ = run(["expectation", "--operator", "identity:d=3", "--state", "basis:1"])
    row = rows_of(out)[0]
    assert code == 0 and abs(float(row["re"]) - 1) < 1e-12
    code, out, _ = run(["expectation", "--operator", "pt:r=1,s=2,t=2,theta=0.3", "--state", "basis:0"])
    row = rows_of(out)[0]
    assert abs(complex(float(row["re"]), float(row["im"])) - complex(math.cos(0.3), math.sin(0.3))) < 1e-12


def test_expectation_stochastic_json():
    code, out, _ = run(
        [
            "expectation", "--operator", "lowering:s=1", "--state", "equal:1",
            "--method", "stochastic", "--trials", "200000", "--format", "json", "--seed", "4",
        ]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["manifest"]["seed"] == 4
    row = doc["rows"][0]
    assert row["n_trials"] == 200000 and row["n_postselected"] <= 200000
    assert abs(row["re"] - 0.5) < 5 * row["stderr_re"]


def test_fig1_rows():
    code, out, _ = run(["fig1", "--smax", "100"])
    rows = rows_of(out)
    assert code == 0 and len(rows) == 100
    assert rows[0]["lhs"] == "0.25" and rows[0]["rhs"] == "0.25"
    assert abs(float(rows[1]["lhs"]) - 0.35239698613931225) < 1e-15
    assert all(float(r["slack"]) >= -1e-12 for r in rows)


def test_fig2_rows():
    code, out, _ = run(["fig2", "--steps", "21"])
    rows = rows_of(out)
    assert code == 0 and len(rows) == 21
    for r in rows:
        assert float(r["upper"]) >= float(r["product"]) - 1e-10 >= float(r["lower"]) - 2e-10
    assert abs(float(rows[10]["product"]) - 0.051776695296636865) < 1e-12


def test_ramanujan_rows():
    code, out, _ = run(["ramanujan", "--smax", "4", "--nu", "0.3"])
    rows = rows_of(out)
    assert code == 0
    assert abs(float(rows[3]["direct_sum"]) - 6.146264369941973) < 1e-12
    assert abs(float(rows[0]["phi"]) - 0.17851130197757925) < 1e-12


def test_dirac_table():
    code, out, _ = run(["dirac", "--dim", "2", "--state", "basis:0", "--basis-c", "fourier"])
    rows = rows_of(out)
    assert code == 0
    assert abs(float(rows[0]["re_0"]) - 0.5) < 1e-12 and abs(float(rows[0]["re_1"]) - 0.5) < 1e-12
    assert abs(float(rows[1]["re_0"])) < 1e-12


def test_pt_command():
    code, out, _ = run(["pt", "--r", "1", "--s", "2", "--t", "3", "--theta", "0.7854", "--eta", "1.5708"])
    row = rows_of(out)[0]
    assert code == 0
    assert float(row["residual_weak"]) < 1e-12 and float(row["residual_closed"]) < 1e-12
    assert row["broken"] == "false"


def test_channel_command():
    code, out, _ = run(["channel", "--kraus", "amp-damp:p=0.5", "--state", "bloch:1.5707963267948966,0.7853981633974483"])
    row = rows_of(out)[0]
    assert code == 0
    assert abs(float(row["identity_residual"])) < 1e-10
    assert abs(float(row["product"]) - 0.051776695296636865) < 1e-12


def test_exit_codes():
    assert run(["nonsense"])[0] == 2
    assert run(["expectation", "--operator", "bogus:1", "--state", "basis:0"])[0] == 2
    assert run(["expectation", "--operator", "lowering:s=1", "--state", "basis:k=5"])[0] == 2
    assert run(["expectation", "--operator", "[[1,2],[3]]", "--state", "basis:0"])[0] == 2
    # orthogonal post-selection on the stochastic path
    assert run(["expectation", "--operator", "pauli:x", "--state", "basis:0", "--method", "stochastic"])[0] == 3
    # exceptional point
    code, _, err = run(["pt", "--r", "1", "--s", "1", "--t", "1", "--theta", "1.5707963267948966"])
    assert code == 3
    # unnormalized JSON state
    assert run(["expectation", "--operator", "pauli:z", "--state", "[1, 1]"])[0] == 3


def test_invariant_violation_exit_code(monkeypatch):
    from weakval import cli
    from weakval.errors import InvariantViolation

    def broken(args):
        raise InvariantViolation("test invariant", "forced")

    monkeypatch.setattr(cli, "cmd_fig1", broken)
    code, _, err = run(["fig1", "--smax", "2"])
    assert code == 4
    assert "test invariant" in err


def test_out_writes_manifest(tmp_path):
    path = tmp_path / "fig1.csv"
    code, out, _ = run(["fig1", "--smax", "3", "--out", str(path)])
    assert code == 0 and out == ""
    manifest = json.loads((tmp_path / "fig1.csv.manifest.json").read_text())
    assert manifest["command"] == "fig1"
    assert manifest["parameters"]["smax"] == 3
    assert set(manifest) == {"command", "parameters", "seed", "tool_version", "timestamp"}
    assert path.read_text().startswith("s,lhs,rhs,slack\n")


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("WEAKVAL_SEED", "99")
    code, out, _ = run(["fig1", "--smax", "1", "--format", "json"])
    assert json.loads(out)["manifest"]["seed"] == 99
    monkeypatch.setenv("WEAKVAL_SEED", "x")
    assert run(["fig1", "--smax", "1"])[0] == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_stochastic_output_is_deterministic(tmp_path, fmt):
    args = [
        "expectation", "--operator", "amp-damp:p=0.5,k=2", "--state", "bloch:1.5707963267948966,0.7853981633974483",
        "--method", "stochastic", "--trials", "100000", "--seed", "7", "--format", fmt,
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(a)])[0] == 0
    assert run(args + ["--out", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c"
    run(args[:-4] + ["--seed", "8", "--format", fmt, "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()
