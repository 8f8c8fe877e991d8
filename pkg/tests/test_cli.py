from __future__ import annotations

import json

import pytest

from gl2lfun import cli


def test_delta_command(capsys):
    assert cli.parse_and_dispatch(["delta", "--n", "7", "--Q", "4"]) == 0
    assert "residual" in capsys.readouterr().out


def test_unknown_flag_is_usage_error():
    assert cli.parse_and_dispatch(["delta", "--bogus", "1"]) == 2
    assert cli.parse_and_dispatch([]) == 2
    assert cli.parse_and_dispatch(["nonsense"]) == 2


def test_failed_check_exit_code():
    # a tolerance no floating-point residual can meet
    assert cli.parse_and_dispatch(["delta", "--n", "3", "--Q", "4", "--tol", "-1"]) == 1


def test_json_report_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.parse_and_dispatch(["pipeline", "--out", str(a)]) == 0
    assert cli.parse_and_dispatch(["pipeline", "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert {"params", "residual", "tolerance", "pass"} <= set(rep)


def test_scan_row_count(tmp_path):
    out = tmp_path / "scan.csv"
    assert cli.parse_and_dispatch(["scan", "--t-min", "10", "--t-max", "40", "--step", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + (40 - 10) // 2 + 1


def test_config_file(tmp_path):
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    cfg = cli.parse_config(["pipeline", "--config", str(empty)])
    assert cfg.params == {k: d for k, (_, d, _) in cli._PARAMS["pipeline"].items()}
    f = tmp_path / "run.cfg"
    f.write_text("# pipeline run\nK = 8\nN = 128  # block\nt = 300\n")
    cfg = cli.parse_config(["pipeline", "--config", str(f), "--K", "16"])
    assert cfg.params["K"] == 16 and cfg.params["N"] == 128


def test_config_file_errors(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("K = 8\nthis is wrong\n")
    with pytest.raises(cli.UsageError, match=":2:"):
        cli.parse_config(["pipeline", "--config", str(f)])
    f.write_text("Z = 3\n")
    with pytest.raises(cli.UsageError, match="unknown key"):
        cli.parse_config(["pipeline", "--config", str(f)])
    assert cli.parse_and_dispatch(["pipeline", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_module_guard_is_usage_error():
    assert cli.parse_and_dispatch(["pipeline", "--N", "2048", "--K", "8", "--t", "3000"]) == 2


def test_coeffs_and_afe(tmp_path):
    out = tmp_path / "c.json"
    assert cli.parse_and_dispatch(["coeffs", "--n-max", "10000", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["deligne_ratio_max"] <= 1.0
    assert cli.parse_and_dispatch(["afe", "--t", "20", "--X", "1.5"]) == 0
