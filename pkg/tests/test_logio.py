import json

import pytest

from socsynth.config import GraphConfig, SimulationConfig
from socsynth.fixtures import region_meridia
from socsynth.logio import JsonlSink, read_log, replay_log, snapshot_to_arrays
from socsynth.roles import ValidationError
from socsynth.scheduler import run


@pytest.fixture
def logged_run(tmp_path):
    cfg = SimulationConfig(graph=GraphConfig(n_agents=100), n_ticks=120, seed=13, snapshot_every=40)
    region = region_meridia()
    path = tmp_path / "log.jsonl"
    log = run(cfg, region, sinks=(JsonlSink(path),))
    return cfg, region, path, log


def test_log_structure(logged_run):
    _, _, path, log = logged_run
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert lines[0]["kind"] == "config"
    assert lines[-1]["kind"] == "digest"
    kinds = {l["kind"] for l in lines}
    assert kinds == {"config", "tick", "snapshot", "digest"}
    assert sum(1 for l in lines if l["kind"] == "tick") == 120
    assert all(l["v"] == 1 for l in lines)


def test_read_log_roundtrip(logged_run):
    cfg, region, path, log = logged_run
    data = read_log(path)
    assert data.config == cfg
    assert data.region == region
    assert data.final_digest == log.final_digest
    assert data.completed_ticks == 120
    assert [t["tick"] for t in data.ticks] == list(range(1, 121))
    assert data.attack_deaths() == log.attack_deaths()


def test_snapshot_record_roundtrip(logged_run):
    _, _, path, log = logged_run
    data = read_log(path)
    record = data.snapshot_record_at(40)
    snap = snapshot_to_arrays(record)
    original = log.snapshot_at(40)
    assert snap.tick == 40
    assert (snap.tau == original.tau).all()
    assert (snap.ids == original.ids).all()


def test_replay_log_reproduces_digest(logged_run, tmp_path):
    _, _, path, log = logged_run
    replayed = replay_log(path)
    assert replayed.final_digest == log.final_digest


def test_read_log_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    with pytest.raises(ValidationError, match="line 1"):
        read_log(bad)

    missing_config = tmp_path / "order.jsonl"
    missing_config.write_text('{"v":1,"kind":"tick","tick":1}\n')
    with pytest.raises(ValidationError, match="config"):
        read_log(missing_config)

    wrong_version = tmp_path / "version.jsonl"
    wrong_version.write_text('{"v":99,"kind":"config"}\n')
    with pytest.raises(ValidationError, match="version"):
        read_log(wrong_version)


def test_read_log_missing_file():
    with pytest.raises(ValidationError, match="not found"):
        read_log("nope/never.jsonl")
