import glob
import json
import os

import pytest

from krcrystal import cli


def run_cli(capsys, *argv):
    status = cli.main(list(argv) + ["-q"])
    out = capsys.readouterr()
    return status, out.out, out.err


def strip_time(text):
    doc = json.loads(text)
    doc.pop("timestamp")
    return doc


def test_build_level_one(tmp_path, capsys):
    status, out, _ = run_cli(capsys, "build", "--type", "g2-1", "--level", "1",
                             "--cache", str(tmp_path), "--out", "json")
    assert status == 0
    doc = json.loads(out)
    assert doc["stages"][0]["dim"] == 7
    assert "does not" in doc["header"]
    assert len(glob.glob(os.path.join(tmp_path, "g2-1-l1-*.json"))) == 1


def test_verify_level_two(tmp_path, capsys):
    status, out, _ = run_cli(capsys, "verify", "--type", "g2-1", "--level", "2",
                             "--cache", str(tmp_path), "--out", "json")
    assert status == 0
    doc = json.loads(out)
    assert doc["pass"]
    reports = doc["stages"][0]["reports"]
    assert len(reports) == 6 + 2 + 1 and all(r["pass"] for r in reports)


def test_crystal_dot(capsys):
    status, out, _ = run_cli(capsys, "crystal", "--type", "g2-1", "--level", "1", "--out", "dot")
    assert status == 0
    assert out.count(": (") == 7


def test_text_output_and_file(tmp_path, capsys):
    target = tmp_path / "report.txt"
    status, out, _ = run_cli(capsys, "branch", "--type", "d4-3", "--level", "1", "-o", str(target))
    assert status == 0 and out == ""
    text = target.read_text()
    assert text.startswith("# bounded verification")
    assert text.rstrip().endswith("RESULT: PASS")


@pytest.mark.parametrize("argv", [
    ["verify", "--type", "g2-1", "--level", "0"],
    ["verify", "--type", "g2-1", "--level", "4"],
    ["verify", "--type", "g2-1", "--level", "2", "--max-level", "1"],
    ["verify", "--type", "g2-1", "--out", "dot"],
    ["verify", "--type", "e6-2"],
    ["frobnicate", "--type", "g2-1"],
    ["all", "--type", "g2-1", "--jobs", "0"],
])
def test_usage_errors(capsys, argv):
    status, _, _ = run_cli(capsys, *argv)
    assert status == 2


def test_cache_corruption(tmp_path, capsys):
    args = ["build", "--type", "g2-1", "--level", "2", "--cache", str(tmp_path)]
    assert run_cli(capsys, *args)[0] == 0
    (path,) = glob.glob(os.path.join(tmp_path, "g2-1-l2-*.json"))
    doc = json.load(open(path))
    doc["payload"]["gram"][0][2] = "(2)/(1)"
    json.dump(doc, open(path, "w"))
    status, _, err = run_cli(capsys, *args)
    assert status == 2 and "checksum" in err


def test_determinism_and_cache_soundness(tmp_path, capsys):
    args = ["verify", "--type", "g2-1", "--level", "2", "--out", "json"]
    _, fresh, _ = run_cli(capsys, *args)
    _, first, _ = run_cli(capsys, *args, "--cache", str(tmp_path))
    _, cached, _ = run_cli(capsys, *args, "--cache", str(tmp_path))
    assert strip_time(fresh) == strip_time(first) == strip_time(cached)
    a, b = json.loads(first), json.loads(cached)
    a["timestamp"] = b["timestamp"] = ""
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_cache_key_depends_on_tables(monkeypatch):
    k = cli.cache_key("g2-1", 2)
    monkeypatch.setattr(cli, "table_hash", lambda t: "0" * 16)
    assert cli.cache_key("g2-1", 2) != k


def test_verification_failure_exit(monkeypatch, capsys):
    import krcrystal.polarverify as pv

    monkeypatch.setattr(pv, "check_polarization_positive", lambda *a, **k: False)
    status, out, _ = run_cli(capsys, "verify", "--type", "g2-1", "--level", "1")
    assert status == 1 and "RESULT: FAIL" in out


def test_rmatrix_yang_baxter(capsys):
    status, out, _ = run_cli(capsys, "rmatrix", "--type", "g2-1", "--level", "3", "--out", "json")
    assert status == 0
    stage = json.loads(out)["stages"][0]
    assert stage["yang_baxter"] is True
    assert all(p["solution_dim"] == 1 for p in stage["pairs"])


def test_all_parallel(tmp_path, capsys):
    status, out, _ = run_cli(capsys, "all", "--type", "g2-1", "--level", "2", "--jobs", "2",
                             "--cache", str(tmp_path), "--out", "json")
    assert status == 0
    names = [s["stage"] for s in json.loads(out)["stages"]]
    assert names == ["build", "verify", "crystal", "build", "verify", "crystal", "rmatrix"]


def test_model_choice():
    assert cli.model_for("g2-1", 3) == "fused"
    assert cli.model_for("d4-3", 3) == "recursive"
