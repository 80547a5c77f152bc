import json
import subprocess
import sys

import pytest

from hierflow.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_path(capsys, fixtures_dir):
    code, out, _ = run(capsys, "solve", fixtures_dir / "path.max")
    assert code == 0 and out == "value 3\n"


def test_solve_ten_line(capsys, fixtures_dir):
    code, out, _ = run(capsys, "solve", fixtures_dir / "ten_line.max")
    assert code == 0 and out == "value 23\n"


def test_solve_twice_byte_identical(capsys, fixtures_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    ra, rb = tmp_path / "ra.json", tmp_path / "rb.json"
    run(capsys, "solve", fixtures_dir / "ten_line.max", "--seed", 7, "--json", a, "--report", ra)
    run(capsys, "solve", fixtures_dir / "ten_line.max", "--seed", 7, "--json", b, "--report", rb)
    assert a.read_bytes() == b.read_bytes()
    assert ra.read_bytes() == rb.read_bytes()
    assert json.loads(ra.read_text())["value"] == 23


def test_seed_from_environment(capsys, fixtures_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("HIERFLOW_SEED", "9")
    rep = tmp_path / "r.json"
    run(capsys, "solve", fixtures_dir / "path.max", "--report", rep)
    assert json.loads(rep.read_text())["seed"] == 9


def test_verify_roundtrip_and_tamper(capsys, fixtures_dir, tmp_path):
    flow = tmp_path / "f.json"
    run(capsys, "solve", fixtures_dir / "ten_line.max", "--json", flow)
    code, out, _ = run(capsys, "verify", fixtures_dir / "ten_line.max", "--flow", flow)
    assert code == 0 and out.startswith("ok value 23")
    data = json.loads(flow.read_text())
    data["edges"][0]["flow"] += 50
    flow.write_text(json.dumps(data))
    code, _, err = run(capsys, "verify", fixtures_dir / "ten_line.max", "--flow", flow)
    assert code == 1
    assert "capacity" in err or "conservation" in err


def test_verify_wrong_value(capsys, fixtures_dir, tmp_path):
    flow = tmp_path / "f.json"
    run(capsys, "solve", fixtures_dir / "path.max", "--json", flow)
    data = json.loads(flow.read_text())
    data["value"] = 4
    flow.write_text(json.dumps(data))
    code, _, err = run(capsys, "verify", fixtures_dir / "path.max", "--flow", flow)
    assert code == 1 and err


def test_verify_unreadable_flow(capsys, fixtures_dir, tmp_path):
    flow = tmp_path / "f.json"
    flow.write_text("{not json")
    assert run(capsys, "verify", fixtures_dir / "path.max", "--flow", flow)[0] == 2


def test_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.max"
    bad.write_text("p max 2 1\nn 1 s\nn 2 t\na 1 2 -4\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2 and "parse error" in err


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "solve", tmp_path / "nope.max")[0] == 2


def test_approx_output(capsys, fixtures_dir, tmp_path):
    flow = tmp_path / "f.json"
    code, out, _ = run(capsys, "approx", fixtures_dir / "ten_line.max", "--json", flow)
    assert code == 0
    lines = dict(x.split() for x in out.splitlines())
    value, cut = int(lines["value"]), int(lines["cut_capacity"])
    assert 0 < value <= 23 <= cut
    assert run(capsys, "verify", fixtures_dir / "ten_line.max", "--flow", flow)[0] == 0


def test_hierarchy_dump(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "h.json"
    code, _, _ = run(capsys, "hierarchy", fixtures_dir / "ten_line.max", "--dump", out)
    assert code == 0
    data = json.loads(out.read_text())
    for key in ("n", "m", "L", "q", "z", "levels", "components", "tau", "stars", "round_capacities"):
        assert key in data
    assert data["n"] == 5 and len(data["levels"]) == 7
    assert sorted(data["tau"]) == list(range(5))


def test_usage_error_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code != 0


def test_module_entry_point_stdin(fixtures_dir):
    data = (fixtures_dir / "path.max").read_bytes()
    proc = subprocess.run([sys.executable, "-m", "hierflow", "solve", "-"], input=data,
                          capture_output=True, timeout=300)
    assert proc.returncode == 0 and proc.stdout == b"value 3\n"
