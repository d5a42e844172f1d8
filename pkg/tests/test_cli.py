"""Command line behavior: exit codes, determinism, output shapes."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from quakedesk.cli import main
from quakedesk.ingest import seed_data_dir

from .helpers import warning_record


@pytest.fixture()
def runner():
    return CliRunner()


def _ingest(runner, tmp_path, with_warnings=False):
    seed = seed_data_dir()
    args = [
        "ingest",
        "--regions", str(seed),
        "--catalog", str(seed / "historical_quakes.csv"),
        "--data", str(tmp_path / "data"),
    ]
    if with_warnings:
        feed = tmp_path / "feed.jsonl"
        feed.write_text(json.dumps(warning_record()) + "\n", encoding="utf-8")
        args += ["--warnings", str(feed)]
    return runner.invoke(main, args)


def test_ingest_happy_path(runner, tmp_path):
    res = _ingest(runner, tmp_path)
    assert res.exit_code == 0, res.output
    assert "provinces: 3" in res.output
    assert "catalog: 5 accepted, 0 rejected" in res.output
    assert "5 facts inserted" in res.output


def test_ingest_with_warning_feed(runner, tmp_path):
    res = _ingest(runner, tmp_path, with_warnings=True)
    assert res.exit_code == 0, res.output
    assert "warnings: 1 accepted, 0 rejected" in res.output


def test_ingest_missing_file_is_single_line_error(runner, tmp_path):
    res = runner.invoke(
        main,
        ["ingest", "--regions", str(seed_data_dir()), "--catalog",
         str(tmp_path / "absent.csv"), "--data", str(tmp_path / "data")],
    )
    assert res.exit_code == 2  # click validates the path flag itself


def test_assess_prints_medic_numbers(runner, tmp_path):
    _ingest(runner, tmp_path, with_warnings=True)
    res = runner.invoke(main, ["assess", "w-test-1", "--data", str(tmp_path / "data")])
    assert res.exit_code == 0, res.output
    assert "medics required: 200" in res.output
    assert "medic shortage: 150" in res.output
    assert "rice kg: 280000.0 kg" in res.output


def test_assess_unknown_warning_exits_1(runner, tmp_path):
    _ingest(runner, tmp_path)
    res = runner.invoke(main, ["assess", "ghost", "--data", str(tmp_path / "data")])
    assert res.exit_code == 1
    err_lines = [ln for ln in res.output.splitlines() if ln.startswith("ERROR ")]
    assert len(err_lines) == 1
    assert err_lines[0].startswith("ERROR UnknownWarning:")


def test_assess_jsonl_mode(runner, tmp_path):
    _ingest(runner, tmp_path, with_warnings=True)
    res = runner.invoke(
        main, ["assess", "w-test-1", "--data", str(tmp_path / "data"), "--jsonl"]
    )
    doc = json.loads(res.output)
    assert doc["medics_required"] == 200


def test_olap_table_and_determinism(runner, tmp_path):
    _ingest(runner, tmp_path)
    args = ["olap", "--group-by", "province,band", "--data", str(tmp_path / "data")]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output  # same data dir, same bytes
    assert "totals:" in first.output


def test_olap_filter_and_jsonl(runner, tmp_path):
    _ingest(runner, tmp_path)
    res = runner.invoke(
        main,
        ["olap", "--group-by", "regency", "--filter", "band=8.0+",
         "--data", str(tmp_path / "data"), "--jsonl"],
    )
    rows = [json.loads(ln) for ln in res.output.splitlines()]
    assert [r["regency"] for r in rows] == ["aceh", "nias"]
    assert rows[0]["deaths"] == 170000


def test_olap_bad_level_exits_1(runner, tmp_path):
    _ingest(runner, tmp_path)
    res = runner.invoke(
        main, ["olap", "--group-by", "continent", "--data", str(tmp_path / "data")]
    )
    assert res.exit_code == 1
    assert "ERROR UnknownLevel:" in res.output


def test_replay_prints_hash(runner, tmp_path):
    _ingest(runner, tmp_path, with_warnings=True)
    res = runner.invoke(main, ["replay", "--data", str(tmp_path / "data")])
    assert res.exit_code == 0, res.output
    # one warehouse batch plus the warning intake and its assessment
    assert "events: 3" in res.output
    again = runner.invoke(main, ["replay", "--data", str(tmp_path / "data")])
    assert res.output == again.output


def test_simulate_deterministic(runner):
    a = runner.invoke(main, ["simulate", "--seed", "42"])
    b = runner.invoke(main, ["simulate", "--seed", "42"])
    c = runner.invoke(main, ["simulate", "--seed", "7"])
    assert a.exit_code == 0, a.output
    assert a.output == b.output
    assert a.output != c.output
    assert "state hash:" in a.output


def test_simulate_scenario_knobs(runner):
    res = runner.invoke(
        main, ["simulate", "--seed", "1", "--regencies", "5", "--magnitude", "8.8"]
    )
    assert res.exit_code == 0, res.output
    assert "5 regencies" in res.output
    assert "magnitude 8.8" in res.output


def test_simulate_rejects_bad_scenario(runner):
    res = runner.invoke(main, ["simulate", "--seed", "1", "--magnitude", "11"])
    assert res.exit_code == 1
    assert "ERROR" in res.output


def test_usage_error_exits_2(runner):
    res = runner.invoke(main, ["simulate"])  # --seed is required
    assert res.exit_code == 2
