# tests/test_harness.py
import csv
import io
import json

import pytest

from prismvc.cli import main
from prismvc.field import FieldParams, PointSet
from prismvc.harness import (
    ExperimentConfig,
    load_pointset,
    resolve_pointset,
    run_command,
)

# ---------------------------------------------------------------------------
# set specs and files
# ---------------------------------------------------------------------------


def test_resolve_full_and_random():
    params = FieldParams(5, 2, 1)
    assert resolve_pointset("full", params).is_full
    a = resolve_pointset("random:6:3", params)
    b = resolve_pointset("random:6:3", params)
    c = resolve_pointset("random:6:4", params)
    assert a == b and a.size == 6
    assert a != c
    for spec in ("random:0:1", "random:26:1", "random:6", "bogus", "random:x:1"):
        with pytest.raises(ValueError):
            resolve_pointset(spec, params)


def test_load_pointset_formats(tmp_path):
    params = FieldParams(5, 2, 1)
    f = tmp_path / "pts.txt"
    f.write_text("# corner points\n0,0\n1 2  # inline comment\n\n-1,7\n")
    ps = load_pointset(str(f), params)
    assert set(ps.points(params)) == {(0, 0), (1, 2), (4, 2)}
    assert resolve_pointset(f"file:{f}", params) == ps


def test_load_pointset_errors(tmp_path):
    params = FieldParams(5, 2, 1)
    dup = tmp_path / "dup.txt"
    dup.write_text("0,0\n5,5\n")  # (5,5) reduces to (0,0)
    with pytest.raises(ValueError, match="dup.txt:2"):
        load_pointset(str(dup), params)
    arity = tmp_path / "arity.txt"
    arity.write_text("1,2,3\n")
    with pytest.raises(ValueError, match="arity.txt:1"):
        load_pointset(str(arity), params)
    bad = tmp_path / "bad.txt"
    bad.write_text("a,b\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_pointset(str(bad), params)
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(ValueError, match="no points"):
        load_pointset(str(empty), params)
    with pytest.raises(OSError):
        load_pointset(str(tmp_path / "missing.txt"), params)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


def test_run_command_rejects_unknown():
    with pytest.raises(ValueError):
        run_command(ExperimentConfig(3, 2, 1, "bogus"))


def test_record_payload_and_json():
    rec = run_command(ExperimentConfig(3, 2, 1, "sphere-size"))
    assert rec.exit_code() == 0
    payload = rec.payload()
    assert "wall_ms" not in payload and "backend" not in payload
    body = json.loads(rec.to_json())
    assert "wall_ms" in body and "backend" in body
    assert body["command"] == "sphere-size"
    assert rec.payload_bytes() == run_command(
        ExperimentConfig(3, 2, 1, "sphere-size")).payload_bytes()


def test_record_csv_round_trip():
    rec = run_command(ExperimentConfig(3, 2, 1, "sphere-size"))
    rows = list(csv.reader(io.StringIO(rec.to_csv())))
    assert rows[0] == ["section", "key", "value"]
    sections = {r[0] for r in rows[1:]}
    assert sections == {"config", "result", "check", "meta"}
    for section, key, value in rows[1:]:
        json.loads(value)  # every value cell is valid JSON


def test_vc_expectation_drives_exit_code():
    ok = run_command(ExperimentConfig(3, 2, 1, "vc-dim", options={"expect": 2}))
    assert ok.exit_code() == 0
    bad = run_command(ExperimentConfig(3, 2, 1, "vc-dim", options={"expect": 5}))
    assert bad.exit_code() == 1
    info = run_command(ExperimentConfig(3, 2, 1, "vc-dim"))
    assert info.exit_code() == 0


def test_worker_invariant_payloads():
    for command, options in [("gamma", {"k_values": "1,2"}),
                             ("vc-dim", {}),
                             ("sphere-size", {})]:
        a = run_command(ExperimentConfig(5, 2, 1, command, workers=1,
                                         options=dict(options)))
        b = run_command(ExperimentConfig(5, 2, 1, command, workers=3,
                                         options=dict(options)))
        assert a.payload_bytes() == b.payload_bytes()


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_sphere_size_json(capsys):
    code, out, err = run_cli(capsys, "sphere-size", "--q", "5", "--d", "2")
    assert code == 0 and err == ""
    body = json.loads(out)
    assert body["results"]["sizes"]["1"] == 4
    assert all(c["status"] == "pass" for c in body["checks"])


def test_cli_csv_format(capsys):
    code, out, _ = run_cli(capsys, "gamma", "--q", "3", "--d", "2",
                           "--k", "1,2", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["section", "key", "value"]


def test_cli_output_file(tmp_path, capsys):
    target = tmp_path / "record.json"
    code, out, _ = run_cli(capsys, "sphere-size", "--q", "3", "--d", "2",
                           "--output", str(target))
    assert code == 0 and out == ""
    body = json.loads(target.read_text())
    assert body["command"] == "sphere-size"


def test_cli_error_exit_codes(capsys):
    code, _, err = run_cli(capsys, "sphere-size", "--q", "4", "--d", "2")
    assert code == 2 and "error" in err
    code, _, err = run_cli(capsys, "sphere-size", "--q", "5", "--d", "2",
                           "--set", "bogus")
    assert code == 2 and "error" in err
    with pytest.raises(SystemExit):
        main(["no-such-command", "--q", "3", "--d", "2"])


def test_cli_failing_check_exit_code(capsys):
    code, out, _ = run_cli(capsys, "vc-dim", "--q", "3", "--d", "2",
                           "--expect", "5")
    assert code == 1
    body = json.loads(out)
    assert any(c["status"] == "fail" for c in body["checks"])


def test_cli_all_commands_smoke(capsys):
    argvs = [
        ["sphere-size", "--q", "3", "--d", "2"],
        ["gamma", "--q", "3", "--d", "2", "--k", "1,2,3"],
        ["prisms", "--q", "3", "--d", "2"],
        ["bad-sets", "--q", "3", "--d", "2", "--max-prisms", "20"],
        ["vc-dim", "--q", "3", "--d", "2", "--expect", "2"],
        ["witness", "--q", "5", "--d", "2"],
        ["pac-sweep", "--q", "3", "--d", "2", "--m-grid", "0,2,4",
         "--trials", "30"],
        ["verify", "--q", "3", "--d", "2"],
    ]
    for argv in argvs:
        code, out, err = run_cli(capsys, *argv)
        assert code == 0, (argv, err)
        body = json.loads(out)
        assert body["command"] == argv[0]
        assert not any(c["status"] == "fail" for c in body["checks"]), argv
