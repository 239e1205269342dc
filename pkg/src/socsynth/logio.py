"""Versioned line-delimited run log.

One JSON record per line: a config record first, then tick records in
order, full snapshots where due, parameter-change events as they applied,
and a closing digest record. A log is self-contained: replaying it (same
config, region and parameter events) reproduces the same final digest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimulationConfig, parse_flat_config
from .interact import AttackEvent
from .regions import RegionIndicators
from .roles import ValidationError
from .scheduler import ParamEvent, Sink, Snapshot, TickReport

LOG_VERSION = 1


class JsonlSink(Sink):
    """Streams run records into a line-delimited log file."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = None

    def _write(self, record: dict):
        if self._fh is None:
            self._fh = self.path.open("w", encoding="utf-8")
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def on_start(self, config_flat: dict, region: dict, meta: dict):
        self._write(
            {"v": LOG_VERSION, "kind": "config", "config": config_flat, "region": region, "meta": meta}
        )

    def on_tick(self, report: TickReport):
        self._write(report.to_record())

    def on_snapshot(self, snapshot: Snapshot):
        self._write(snapshot.to_record())

    def on_param_change(self, event: ParamEvent):
        self._write(event.to_record())

    def on_finish(self, digest: str, completed_ticks: int):
        self._write(
            {"v": LOG_VERSION, "kind": "digest", "sha256": digest, "completed_ticks": completed_ticks}
        )
        self._fh.close()
        self._fh = None


@dataclass
class LogData:
    """Parsed contents of a run log."""

    config: SimulationConfig
    region: RegionIndicators
    meta: dict
    ticks: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    param_events: list = field(default_factory=list)
    final_digest: str = ""
    completed_ticks: int = 0

    def attack_deaths(self) -> list:
        return [a["deaths"] for t in self.ticks for a in t["attacks"]]

    def snapshot_record_at(self, tick: int) -> dict:
        for record in self.snapshots:
            if record["tick"] == tick:
                return record
        raise KeyError(f"no snapshot at tick {tick}")


def snapshot_to_arrays(record: dict) -> Snapshot:
    agents = record["agents"]
    ids = np.array([a[0] for a in agents], dtype=np.int64)
    born = np.array([a[1] for a in agents], dtype=np.int64)
    tau = np.array([a[2] for a in agents], dtype=np.float64)
    roles = np.array([a[3] for a in agents], dtype=np.int8)
    return Snapshot(tick=record["tick"], ids=ids, born=born, tau=tau, roles=roles, aggregates=record["aggregates"])


def read_log(path) -> LogData:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"log file not found: {path}")

    data: LogData | None = None
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise ValidationError(f"{path}: line {line_no}: invalid JSON record")
            if record.get("v") != LOG_VERSION:
                raise ValidationError(f"{path}: line {line_no}: unsupported log version {record.get('v')!r}")
            kind = record.get("kind")
            if kind == "config":
                data = LogData(
                    config=parse_flat_config(record["config"]),
                    region=RegionIndicators.from_dict(record["region"]),
                    meta=record.get("meta", {}),
                )
            elif data is None:
                raise ValidationError(f"{path}: line {line_no}: first record must be a config record")
            elif kind == "tick":
                data.ticks.append(record)
            elif kind == "snapshot":
                data.snapshots.append(record)
            elif kind == "param_change":
                data.param_events.append(
                    ParamEvent(
                        applies_from_tick=record["applies_from_tick"],
                        key=record["key"],
                        value=record["value"],
                    )
                )
            elif kind == "digest":
                data.final_digest = record["sha256"]
                data.completed_ticks = record["completed_ticks"]
            else:
                raise ValidationError(f"{path}: line {line_no}: unknown record kind {kind!r}")
    if data is None:
        raise ValidationError(f"{path}: empty log")
    return data


def replay_log(path, lane: str | None = None):
    """Re-run a logged simulation; returns the fresh SimulationLog."""
    from .scheduler import replay

    data = read_log(path)
    return replay(
        data.config,
        data.region,
        param_events=data.param_events,
        completed_ticks=data.completed_ticks,
        lane=lane,
    )


def attack_events_from_log(data: LogData) -> list:
    return [
        AttackEvent(
            tick=a["tick"],
            leader_id=a["leader_id"],
            financier_id=a["financier_id"],
            cell_ids=tuple(a["cell_ids"]),
            combined_power=a["combined_power"],
            deaths=a["deaths"],
        )
        for t in data.ticks
        for a in t["attacks"]
    ]
