import json
import math
import time

import numpy as np
import pytest

from sandrenyi.cli import main, parse_grid
from sandrenyi.io import channel_to_json, density_from_json, density_to_json
from sandrenyi.states import DensityMatrix, identity_channel, random_density


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "r": write(tmp_path / "r.json", density_to_json(np.diag([0.75, 0.25]))),
        "s": write(tmp_path / "s.json", density_to_json(np.eye(2) / 2)),
        "pp": write(tmp_path / "pp.json", density_to_json(DensityMatrix(np.diag([1.0, 0, 0, 0]), (2, 2)))),
        "ab": write(tmp_path / "ab.json", density_to_json(random_density(4, seed=3).with_dims((2, 2)))),
        "id": write(tmp_path / "id.json", channel_to_json(identity_channel(2))),
        "bad": write(tmp_path / "bad.json", {"rows": 2, "cols": 2, "re": [1, 0, 0], "im": []}),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_divergence_bits(files, capsys):
    code, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["s"],
                    "--alpha", "2", "--bits")
    obj = json.loads(out.out)
    assert code == 0
    assert obj["value"] == pytest.approx(0.321928, abs=1e-6)
    assert obj["alpha"] == 2.0 and obj["support_violated"] is False


def test_divergence_equal_states(files, capsys):
    code, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["r"], "--alpha", "0.5")
    assert code == 0 and json.loads(out.out)["value"] == 0.0


def test_divergence_infinite_alpha_and_one(files, capsys):
    _, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["s"], "--alpha", "inf")
    assert json.loads(out.out)["value"] == pytest.approx(math.log(1.5))
    _, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["s"], "--alpha", "one")
    obj = json.loads(out.out)
    assert obj["alpha"] == "one" and obj["value"] == pytest.approx(0.130812, abs=1e-6)


def test_entropy(files, capsys):
    code, out = run(capsys, "compute", "entropy", "--rho", files["r"], "--alpha", "2")
    assert code == 0 and json.loads(out.out)["value"] == pytest.approx(0.470004, abs=1e-6)


def test_conditional_entropy_pure_product(files, capsys):
    code, out = run(capsys, "compute", "conditional-entropy", "--rho", files["pp"], "--alpha", "2",
                    "--restarts", "2")
    obj = json.loads(out.out)
    assert code == 0 and abs(obj["value"]) <= 2e-5
    assert {"converged", "argopt", "diagnostics"} <= set(obj)


def test_mutual_info_methods_agree(files, capsys):
    _, out = run(capsys, "compute", "mutual-info", "--rho", files["ab"], "--alpha", "2", "--restarts", "3")
    primal = json.loads(out.out)["value"]
    _, out = run(capsys, "compute", "mutual-info", "--rho", files["ab"], "--alpha", "2", "--restarts", "3",
                 "--method", "dual")
    assert abs(json.loads(out.out)["value"] - primal) <= 2e-5


def test_holevo(files, capsys):
    code, out = run(capsys, "compute", "holevo", "--channel", files["id"], "--alpha", "2", "--restarts", "2")
    obj = json.loads(out.out)
    assert code == 0 and obj["lower_bound"] is True
    assert obj["value"] == pytest.approx(math.log(2), abs=1e-3)


def test_compute_output_round_trips(files, capsys):
    _, out = run(capsys, "compute", "conditional-entropy", "--rho", files["ab"], "--alpha", "1.5",
                 "--restarts", "2")
    obj = json.loads(out.out)
    again = json.loads(json.dumps(obj))
    assert again["value"] == obj["value"]
    sigma = density_from_json(obj["argopt"])
    assert np.trace(sigma.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_output_is_byte_stable(files, capsys):
    argv = ["compute", "mutual-info", "--rho", files["ab"], "--alpha", "3", "--restarts", "2", "--seed", "5"]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a.out == b.out


def test_out_file(files, capsys):
    target = files["dir"] / "o.json"
    code, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["s"], "--alpha", "2",
                    "--out", str(target))
    assert code == 0 and out.out == ""
    assert json.loads(target.read_text())["value"] == pytest.approx(math.log(1.25))


# errors

def test_bad_file_is_exit_2(files, capsys):
    code, out = run(capsys, "compute", "divergence", "--rho", files["bad"], "--sigma", files["s"], "--alpha", "2")
    obj = json.loads(out.out)
    assert code == 2 and obj["error"] == "bad_input" and "detail" in obj


def test_dimension_mismatch_is_exit_2(files, capsys):
    code, out = run(capsys, "compute", "divergence", "--rho", files["r"], "--sigma", files["ab"], "--alpha", "2")
    assert code == 2 and json.loads(out.out)["error"] == "precondition"


def test_missing_dims(files, capsys):
    code, out = run(capsys, "compute", "conditional-entropy", "--rho", files["r"], "--alpha", "2")
    assert code == 2 and json.loads(out.out)["error"] == "missing_dims"


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["compute", "divergence", "--rho", "x", "--sigma", "y", "--alpha", "1.0000001"],
    ["verify", "positivity", "--alphas", "0.5,abc"],
    ["verify", "positivity", "--bogus"],
    ["scan-alpha", "--rho", "x", "--sigma", "y", "--grid", "2:1"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_alphas_outside_check_range(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, res = run(capsys, "verify", "all", "--alphas", "0.5", "--out", str(out))
    assert code == 2 and not out.exists()
    assert json.loads(res.out)["error"] == "bad_plan"


# scan-alpha

def test_parse_grid():
    np.testing.assert_allclose(parse_grid("1:100:3"), [1, 10, 100])
    np.testing.assert_allclose(parse_grid("2:2:1"), [2])


def test_scan_alpha_single_row(files, capsys):
    code, out = run(capsys, "scan-alpha", "--rho", files["r"], "--sigma", files["s"], "--grid", "2:2:1")
    lines = out.out.strip().splitlines()
    assert code == 0 and lines[0] == "alpha,value,support_violated,note"
    alpha, value, flag, note = lines[1].split(",")
    assert float(alpha) == 2.0 and float(value) == pytest.approx(math.log(1.25), abs=1e-12)
    assert lines[-1].startswith("#")


def test_scan_alpha_equal_states_zero(files, capsys):
    _, out = run(capsys, "scan-alpha", "--rho", files["r"], "--sigma", files["r"], "--grid", "0.5:10:6")
    rows = [l.split(",") for l in out.out.strip().splitlines()[1:] if not l.startswith("#")]
    assert len(rows) == 6 and all(abs(float(r[1])) <= 1e-12 for r in rows)


def test_scan_alpha_flags_one(files, capsys):
    _, out = run(capsys, "scan-alpha", "--rho", files["r"], "--sigma", files["s"], "--grid", "0.5:2:3")
    rows = [l.split(",") for l in out.out.strip().splitlines()[1:] if not l.startswith("#")]
    assert rows[1][3] == "umegaki" and float(rows[1][1]) == pytest.approx(0.130812, abs=1e-6)
    assert out.out.strip().splitlines()[-1] == "# monotone for alpha>1: yes"


def test_scan_alpha_json(files, capsys):
    _, out = run(capsys, "scan-alpha", "--rho", files["r"], "--sigma", files["s"], "--grid", "1.5:20:5",
                 "--format", "json")
    obj = json.loads(out.out)
    values = [r["value"] for r in obj["rows"]]
    assert obj["monotone_above_one"] and values == sorted(values)


# verify

def test_verify_single_check(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, res = run(capsys, "verify", "convexity", "--trials", "5", "--dims", "2,3", "--seed", "13",
                    "--out", str(out))
    rep = json.loads(out.read_text())
    assert code == 0 and rep["check"] == "convexity" and rep["trials"] == 5 and rep["seed"] == 13
    assert "convexity" in res.err


def test_verify_all_smoke_is_fast(capsys):
    start = time.perf_counter()
    code, res = run(capsys, "verify", "all", "--trials", "1", "--seed", "42")
    elapsed = time.perf_counter() - start
    rep = json.loads(res.out)
    assert code == 0 and len(rep["checks"]) == 11 and rep["failures"] == 0
    assert elapsed < 10


def test_verify_failure_exit_and_replay(capsys, tmp_path):
    fail_dir = tmp_path / "fails"
    code, res = run(capsys, "verify", "interpolation", "--trials", "2", "--tol-override", "interpolation=-10",
                    "--failure-dir", str(fail_dir))
    rep = json.loads(res.out)
    assert code == 1 and rep["failures"] == 2
    code, res = run(capsys, "verify", "interpolation", "--replay", rep["failure_instances"][0])
    assert code == 1 and json.loads(res.out)["failed"] is True
    code, res = run(capsys, "verify", "dpi", "--replay", rep["failure_instances"][0])
    assert code == 2


def test_verify_reproducible_flag(capsys):
    argv = ["verify", "positivity", "--trials", "3", "--reproducible"]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a.out == b.out and json.loads(a.out)["elapsed_s"] == 0.0
