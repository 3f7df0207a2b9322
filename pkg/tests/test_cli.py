"""Batch front end: output schemas, exit codes, determinism."""

import json
import math

import pytest

from ba_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# JSON reports

def test_classify_kronecker(capsys):
    code, out, _ = run(capsys, "classify", "--m", "1", "--n", "1",
                       "--A", "1/2", "--b", "1/4")
    assert code == 0
    assert out == ('{"kind": "KroneckerInfinite", "witness": {"u": [2]}, '
                   '"value": "inf", "N": null, "Q": null, "exact": true}\n')


def test_classify_rational(capsys):
    code, out, _ = run(capsys, "classify", "--m", "1", "--n", "1",
                       "--A", "1/2", "--b", "1/2")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "Rational"
    assert set(doc["witness"]) == {"p", "q"}
    assert doc["value"] is None


def test_classify_exact_alternative_is_complete(capsys):
    # with exact rational entries the integer-dual certificate always
    # settles the question; the numeric fallback never fires
    for a, b in (("5/17", "3/11"), ("0", "1/2"), ("7/9", "2/9")):
        code, out, _ = run(capsys, "classify", "--m", "1", "--n", "1",
                           "--A", a, "--b", b)
        assert code == 0
        assert json.loads(out)["kind"] in ("Rational", "KroneckerInfinite")


def test_epsilon_half_offset(capsys):
    code, out, _ = run(capsys, "epsilon", "--m", "1", "--n", "1",
                       "--A", "0", "--b", "1/2", "--Q", "100")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == 0.5
    assert doc["witness"]["q"] == [0]
    assert doc["Q"] == 100 and doc["N"] is None
    assert doc["exact"] is True


def test_ctrunc_schema(capsys):
    code, out, _ = run(capsys, "ctrunc", "--m", "1", "--n", "1",
                       "--A", "0", "--b", "1/2", "--N", "1", "--Q", "100")
    assert code == 0
    doc = json.loads(out)
    assert list(doc) == ["kind", "witness", "value", "N", "Q", "exact"]
    assert doc["value"] == "1/2"
    assert doc["N"] == 1 and doc["Q"] == 100


def test_homeps(capsys):
    code, out, _ = run(capsys, "homeps", "--m", "1", "--n", "1",
                       "--A", "1/3", "--Q", "10")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "HomogeneousGap"
    assert doc["value"] == 0.0


def test_treebound_cantor(capsys):
    code, out, _ = run(capsys, "treebound", "--k", "1", "--delta", "2/3",
                       "--diam-ratio", "1/3", "--levels", "20")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert len(doc["ratios"]) == 20


def test_tesscount(capsys):
    code, out, _ = run(capsys, "tesscount", "--m", "1", "--n", "1",
                       "--expansion", "10")
    assert code == 0
    assert json.loads(out) == {"interior": 891, "boundary": 220,
                               "volume_ratio": "1000"}


def test_orbit_csv(capsys):
    code, out, _ = run(capsys, "orbit", "--m", "1", "--n", "1",
                       "--A", "0", "--b", "1/2", "--t-grid", "0", "1", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,lambda1,affine_min,witness_p,witness_q"
    assert len(lines) == 4
    assert lines[1].split(",")[2] == "0.5"


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, err = run(capsys, "epsilon", "--m", "1", "--n", "1",
                         "--A", "0", "--b", "1/2", "--Q", "10",
                         "--out", str(target))
    assert code == 0
    assert out == ""
    assert "wrote" in err
    assert json.loads(target.read_text())["value"] == 0.5


def test_stdout_deterministic(capsys):
    args = ("ctrunc", "--m", "1", "--n", "1", "--A", "5/17", "--b", "3/11",
            "--N", "2", "--Q", "400")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second


# ---------------------------------------------------------------------------
# scan pipeline

def test_scan_writes_bracketing_pair(tmp_path, capsys):
    prefix = tmp_path / "slice"
    code, out, err = run(capsys, "scan", "--c", "0.05", "--resolution", "16",
                         "--Q", "10", "--out", str(prefix))
    assert code == 0
    assert out == ""
    for suffix in (".pgm", ".csv", "-2q.pgm", "-2q.csv"):
        assert (tmp_path / ("slice" + suffix)).exists()
    blob = (tmp_path / "slice.pgm").read_bytes()
    assert blob.startswith(b"P5\n16 16\n255\n")
    csv = (tmp_path / "slice.csv").read_text()
    assert csv.splitlines()[0] == "a,b"


def test_scan_threads_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "scan", "--c", "0.02", "--resolution", "32", "--Q", "20",
        "--threads", "1", "--out", str(a))
    run(capsys, "scan", "--c", "0.02", "--resolution", "32", "--Q", "20",
        "--threads", "6", "--out", str(b))
    for suffix in (".pgm", ".csv", "-2q.pgm", "-2q.csv"):
        assert (tmp_path / ("a" + suffix)).read_bytes() == \
               (tmp_path / ("b" + suffix)).read_bytes()


def test_scan_boxdim_pipeline(tmp_path, capsys):
    prefix = tmp_path / "slice"
    run(capsys, "scan", "--c", "0.001", "--resolution", "64", "--Q", "30",
        "--out", str(prefix))
    code, out, _ = run(capsys, "boxdim", "--pgm", str(prefix) + ".pgm",
                       "--scales", "1/4", "1/8", "1/16", "1/32")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"slope", "counts"}
    assert len(doc["counts"]) == 4
    assert doc["counts"][0][0] == 0.25
    assert 0.0 <= doc["slope"] <= 2.0 + 1e-9


def test_boxdim_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "boxdim", "--pgm", str(tmp_path / "nope.pgm"),
                       "--scales", "1/4", "1/8", "1/16")
    assert code == 1
    assert "error" in err


# ---------------------------------------------------------------------------
# exit codes

def test_exit_config_on_bad_scalar(capsys):
    code, _, err = run(capsys, "ctrunc", "--m", "1", "--n", "1",
                       "--A", "garbage", "--b", "1/2", "--N", "1", "--Q", "10")
    assert code == 1
    assert "--A" in err


def test_exit_config_on_unknown_command(capsys):
    assert run(capsys, "nosuch")[0] == 1
    assert run(capsys)[0] == 1


def test_exit_config_on_missing_required(capsys):
    code, _, _ = run(capsys, "ctrunc", "--m", "1", "--n", "1",
                     "--A", "1/2", "--b", "1/2", "--N", "1")
    assert code == 1


def test_exit_parameter_on_bad_range(capsys):
    code, _, err = run(capsys, "ctrunc", "--m", "1", "--n", "1",
                       "--A", "1/2", "--b", "1/2", "--N", "10", "--Q", "5")
    assert code == 2
    assert "error" in err


def test_exit_parameter_on_float_classify(capsys):
    code, _, err = run(capsys, "classify", "--m", "1", "--n", "1",
                       "--A", "0.5", "--b", "0.25", "--float")
    assert code == 2
    assert "exact" in err


def test_exit_parameter_on_entry_count_mismatch(capsys):
    code, _, _ = run(capsys, "classify", "--m", "2", "--n", "1",
                     "--A", "1/2", "--b", "1/4", "0")
    assert code == 2


def test_exit_parameter_on_tesscount_conflict(capsys):
    code, _, _ = run(capsys, "tesscount", "--m", "1", "--n", "1",
                     "--t", "1", "--expansion", "10")
    assert code == 2


def test_exit_budget(capsys):
    code, _, err = run(capsys, "ctrunc", "--m", "1", "--n", "1",
                       "--A", "0", "--b", "1/2", "--N", "1", "--Q", "100",
                       "--budget", "5")
    assert code == 3
    assert "budget" in err


def test_env_budget(monkeypatch, capsys):
    monkeypatch.setenv("BA_LAB_BUDGET", "7")
    code, _, _ = run(capsys, "epsilon", "--m", "1", "--n", "1",
                     "--A", "0", "--b", "1/2", "--Q", "100")
    assert code == 3
    # explicit flag wins over the environment
    monkeypatch.setenv("BA_LAB_BUDGET", "7")
    code, _, _ = run(capsys, "epsilon", "--m", "1", "--n", "1",
                     "--A", "0", "--b", "1/2", "--Q", "100",
                     "--budget", "1000")
    assert code == 0


def test_bad_env_budget_is_config_error(monkeypatch, capsys):
    monkeypatch.setenv("BA_LAB_BUDGET", "many")
    code, _, err = run(capsys, "epsilon", "--m", "1", "--n", "1",
                       "--A", "0", "--b", "1/2", "--Q", "10")
    assert code == 1
    assert "BA_LAB_BUDGET" in err


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "scan", "--help")[0] == 0
