import json
import subprocess
import sys

import pytest

from mmbloat.cli import EXIT_INVALID, EXIT_OK, main


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "human-drw" in out and "reno-ramp" in out


def test_validate_builtin_and_file(tmp_path, capsys):
    assert main(["validate", "building-codel"]) == EXIT_OK
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"name": "x", "duration": 1, "ues": [{"id": "a"}],
                             "flows": [{"ue": "a"}]}))
    assert main(["validate", str(p)]) == EXIT_OK


def test_validate_reports_field(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"name": "x", "duration": 1, "flows": [{"ue": "ghost"}]}))
    assert main(["validate", str(p)]) == EXIT_INVALID
    assert "flows.0.ue" in capsys.readouterr().err


def test_unknown_target_is_invalid(capsys):
    assert main(["run", "no-such-scenario"]) == EXIT_INVALID
    assert main(["run", "human-drw", "--set", "queue_capacity=0"]) == EXIT_INVALID


def test_run_writes_csv(tmp_path, capsys):
    code = main(["run", "building-drw", "--out", str(tmp_path), "--set", "duration=0.2",
                 "--seed", "3"])
    assert code == EXIT_OK
    assert (tmp_path / "summary.csv").exists()
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["schema_version"] == 1 and meta["config"]["seed"] == 3
    assert "goodput" in capsys.readouterr().out


def test_batch_run_parallel(tmp_path, capsys):
    code = main(["run", "human-codel", "human-drw", "--out", str(tmp_path),
                 "--set", "duration=0.1", "--jobs", "2"])
    assert code == EXIT_OK
    assert (tmp_path / "human-codel" / "flows.csv").exists()
    assert (tmp_path / "human-drw" / "flows.csv").exists()


def test_runtime_failure_exit_code(tmp_path, capsys):
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["run", "human-drw", "--set", "duration=0.05", "--out", str(blocker / "x")]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mmbloat", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "ue-churn-drw" in r.stdout


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
