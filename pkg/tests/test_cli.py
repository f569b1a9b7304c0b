import json
import math
import subprocess
import sys

import numpy as np
import pytest

from condgeom.cli import dumps, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_csv(path, rows):
    path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in rows) + "\n")
    return str(path)


def test_dumps_uses_17_digits():
    assert dumps({"a": 0.1, "b": [1, math.inf], "c": True}) == (
        '{"a": 0.10000000000000001, "b": [1, Infinity], "c": true}'
    )
    assert json.loads(dumps([1 / 3]))[0] == 1 / 3


def test_check_isometry_passes(capsys):
    code, out, _ = run(capsys, "check", "--suite", "isometry", "--trials", "200", "--seed", "42", "--tol", "1e-9")
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] and doc["trials"] == 200 and doc["seed"] == 42 and doc["failures"] == []


def test_check_norm_suite(capsys):
    code, out, _ = run(capsys, "check", "--suite", "norm", "--trials", "1000")
    assert code == 0
    assert json.loads(out)["max_error"] <= 1e-12


def test_check_is_byte_identical(capsys):
    args = ("check", "--suite", "geodesic", "--trials", "30", "--seed", "7")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_check_uniformizer_size_cap(capsys):
    code, out, _ = run(capsys, "check", "--suite", "prop3", "--trials", "5", "--size-cap", "10")
    assert code == 1
    doc = json.loads(out)
    assert not doc["pass"]
    assert any("SizeCapExceeded" in f["description"] for f in doc["failures"])


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--suite", "nope"],
        ["check", "--suite", "norm", "--trials", "0"],
        ["frobnicate"],
        ["morph", "apply"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_metric_command(tmp_path, capsys):
    model = write_csv(tmp_path / "m.csv", [[1, 2], [3, 4]])
    code, out, _ = run(
        capsys, "metric", "--metric", "abc:A=const:1;B=const:2;C=const:3",
        "--model", model, "--basis", "0,1", "0,1", "--gram",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["basis"] == pytest.approx(22.666666666666668, rel=1e-15)
    assert np.array(doc["gram"]).shape == (4, 4)


def test_metric_inner_product(tmp_path, capsys):
    model = write_csv(tmp_path / "m.csv", [[0.5, 0.5]])
    u = write_csv(tmp_path / "u.csv", [[1, -1]])
    code, out, _ = run(capsys, "metric", "--model", model, "--u", u)
    assert code == 0
    assert json.loads(out)["inner_product"] == pytest.approx(2.0)


def test_metric_rejects_bad_model(tmp_path, capsys):
    model = write_csv(tmp_path / "m.csv", [[0.0, 1.0]])
    code, out, err = run(capsys, "metric", "--model", model, "--gram")
    assert code == 1 and out == "" and "condgeom:" in err


def test_geodesic_command(tmp_path, capsys):
    p = write_csv(tmp_path / "p.csv", [[0.5, 0.5]])
    q = write_csv(tmp_path / "q.csv", [[0.1, 0.9]])
    code, out, _ = run(capsys, "geodesic", "--p", p, "--q", q, "--kind", "normalized", "--c", "1")
    assert code == 0
    assert json.loads(out)["distance"] == pytest.approx(0.927295218001612, rel=1e-14)


def test_div_command(tmp_path, capsys):
    r = write_csv(tmp_path / "r.csv", [[1]])
    p = write_csv(tmp_path / "p.csv", [[0.5, 0.5]])
    q = write_csv(tmp_path / "q.csv", [[0.25, 0.75]])
    code, out, _ = run(capsys, "div", "--r", r, "--p", p, "--q", q, "--geodesic", "--taylor", "--t", "0.1", "0.01")
    assert code == 0
    doc = json.loads(out)
    assert doc["divergence"] == pytest.approx(0.143841036225890, rel=1e-14)
    assert len(doc["taylor"]) == 2 and "ratio" in doc


def test_div_nonnegative_infinite(tmp_path, capsys):
    r = write_csv(tmp_path / "r.csv", [[1]])
    p = write_csv(tmp_path / "p.csv", [[0.5, 0.5]])
    q = write_csv(tmp_path / "q.csv", [[0.0, 1.0]])
    code, out, _ = run(capsys, "div", "--r", r, "--p", p, "--q", q, "--nonnegative")
    assert code == 0 and json.loads(out)["divergence"] == math.inf


def test_morph_build_apply_pushforward(tmp_path, capsys):
    code, out, _ = run(capsys, "morph", "build", "--kind", "replication", "--k", "1", "--m", "2", "--z", "2", "--w", "2")
    assert code == 0
    morph = tmp_path / "f.json"
    morph.write_text(out)
    model = write_csv(tmp_path / "m.csv", [[0.4, 1.2]])
    code, out, _ = run(capsys, "morph", "apply", "--morphism", str(morph), "--model", model)
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["image"], [[0.1, 0.1, 0.3, 0.3]] * 2, rtol=1e-15)
    tangent = write_csv(tmp_path / "u.csv", [[1, -1]])
    code, out, _ = run(capsys, "morph", "pushforward", "--morphism", str(morph), "--tangent", tangent)
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["pushforward"], [[0.25, 0.25, -0.25, -0.25]] * 2)


def test_morph_build_permutation_and_uniformizer(tmp_path, capsys):
    code, out, _ = run(capsys, "morph", "build", "--kind", "permutation", "--sigma", "1,0", "--pi", "0,1", "--pi", "1,0")
    assert code == 0
    assert json.loads(out)["R"]["entries"] == [["0", "1.0"], ["1.0", "0"]]
    nums = tmp_path / "n.csv"
    nums.write_text("1,2\n")
    code, out, _ = run(capsys, "morph", "build", "--kind", "uniformizer", "--numerators", str(nums), "--z", "3")
    assert code == 0
    assert "1/3" in out
    code, _, err = run(capsys, "morph", "build", "--kind", "permutation", "--sigma", "0,0", "--pi", "0,1", "--pi", "0,1")
    assert code == 1 and "permutation" in err


def test_fit_logistic_command(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("0,0\n0,0\n0,0\n0,1\n")
    feats = tmp_path / "f.json"
    feats.write_text('{"F": 1, "values": [[[1, 0]]]}')
    code, out, _ = run(capsys, "fit", "--kind", "logistic", "--data", str(data), "--features", str(feats), "--tol", "1e-6")
    assert code == 0
    doc = json.loads(out)
    # the tolerance bounds the moment gap; theta moves by gap / curvature = gap / 0.1875
    emp, mod = doc["moments"]["empirical"], doc["moments"]["model"]
    assert abs(emp[0] - mod[0]) <= 1e-6
    assert doc["theta"][0] == pytest.approx(math.log(3), abs=1e-5)
    assert {"loglik", "moments", "diagnostics"} <= set(doc)


def test_fit_boost_command(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("0,0\n1,0\n2,0\n3,1\n")
    feats = tmp_path / "f.json"
    h = np.ones((1, 4))
    feats.write_text(json.dumps({"F": 1, "values": np.stack([h, -h], -1).tolist()}))
    code, out, _ = run(capsys, "fit", "--kind", "boost", "--data", str(data), "--features", str(feats), "--rounds", "1")
    assert code == 0
    assert json.loads(out)["theta"][0] == pytest.approx(0.5 * math.log(3), abs=1e-12)


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "check", "--suite", "taylor", "--trials", "5", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["suite"] == "taylor"


def test_missing_file_exits_1(capsys):
    code, _, err = run(capsys, "geodesic", "--p", "/nonexistent.csv", "--q", "/nonexistent.csv")
    assert code == 1 and err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "condgeom", "check", "--suite", "corollary1", "--trials", "3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"]
