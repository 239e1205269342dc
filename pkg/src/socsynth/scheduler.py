"""The tick loop: pair scheduling, atomic state updates, logging, replay.

One tick resolves one interaction per agent against start-of-tick state,
then applies all deltas at once, then performs removals and replacements
in outcome order. Ticks are the only mutation point; pausing between ticks
(steering) consumes no randomness, so a paused-and-resumed run is
bit-identical to an uninterrupted one.

Aggregate statistics are recorded every tick; full per-agent snapshots are
written at tick 0, every ``snapshot_every`` ticks and at the final tick.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig, config_to_flat, set_param
from .interact import EncounterMemory
from .kernel import KIND_ORDER, active_lane, resolve_tick
from .regions import RegionIndicators
from .rng import Stream, substream_seed
from .roles import (
    COL_CRIMES,
    COL_POLICE_PRED,
    COL_POWER,
    COL_TERROR_PRED,
    roles_vector,
)
from .society import Society, build_society, replace_agent
from .stats import polarization_index


@dataclass
class TickReport:
    tick: int
    counts: dict
    arrests: int
    recruitments: int
    removals: int
    attacks: list
    aggregates: dict
    outcomes: list | None = None

    def to_record(self) -> dict:
        return {
            "v": 1,
            "kind": "tick",
            "tick": self.tick,
            "counts": self.counts,
            "arrests": self.arrests,
            "recruitments": self.recruitments,
            "removals": self.removals,
            "attacks": [a.to_dict() for a in self.attacks],
            "aggregates": self.aggregates,
        }


@dataclass
class Snapshot:
    tick: int
    ids: np.ndarray
    born: np.ndarray
    tau: np.ndarray
    roles: np.ndarray
    aggregates: dict

    def to_record(self) -> dict:
        return {
            "v": 1,
            "kind": "snapshot",
            "tick": self.tick,
            "agents": [
                [int(self.ids[i]), int(self.born[i]), [float(x) for x in self.tau[i]], int(self.roles[i])]
                for i in range(len(self.ids))
            ],
            "aggregates": self.aggregates,
        }


@dataclass(frozen=True)
class ParamEvent:
    applies_from_tick: int
    key: str
    value: float

    def to_record(self) -> dict:
        return {
            "v": 1,
            "kind": "param_change",
            "applies_from_tick": self.applies_from_tick,
            "key": self.key,
            "value": self.value,
        }


@dataclass
class SimulationLog:
    config_flat: dict
    region: dict
    lane: str
    reports: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    param_events: list = field(default_factory=list)
    completed_ticks: int = 0
    final_digest: str = ""

    def attack_deaths(self) -> list:
        return [a.deaths for report in self.reports for a in report.attacks]

    def snapshot_at(self, tick: int) -> Snapshot:
        for snap in self.snapshots:
            if snap.tick == tick:
                return snap
        raise KeyError(f"no snapshot at tick {tick}")


def compute_aggregates(society: Society, cfg: SimulationConfig) -> dict:
    tau = society.tau
    n = society.n
    out: dict = {"n": n}
    for label, col in (("police_pred", COL_POLICE_PRED), ("terror_pred", COL_TERROR_PRED), ("power", COL_POWER)):
        column = tau[:, col]
        out[f"{label}_mean"] = float(column.mean())
        out[f"{label}_var"] = float(column.var(ddof=1)) if n > 1 else 0.0
    out["signed_mean"] = society.signed_mean()
    out["polarization"] = polarization_index(society) if n >= 2 else 0.0
    out["crimes_total"] = int(tau[:, COL_CRIMES].sum())
    return out


class Sink:
    """Receives run events in order. Methods are optional overrides."""

    def on_start(self, config_flat: dict, region: dict, meta: dict):
        pass

    def on_tick(self, report: TickReport):
        pass

    def on_snapshot(self, snapshot: Snapshot):
        pass

    def on_param_change(self, event: ParamEvent):
        pass

    def on_finish(self, digest: str, completed_ticks: int):
        pass


class SinkError(RuntimeError):
    """A sink failed; the run aborts with a partial log."""


class Simulation:
    """A single live run; the steering server drives one of these."""

    def __init__(
        self,
        cfg: SimulationConfig,
        region: RegionIndicators,
        collect_outcomes: bool = False,
        lane: str | None = None,
    ):
        self.cfg = cfg
        self.region = region
        self.collect_outcomes = collect_outcomes
        self.lane = lane or active_lane()
        self.society = build_society(cfg, region)
        self.memory = EncounterMemory()
        self.interaction_stream = Stream(substream_seed(cfg.seed, "interactions"))
        self.replacement_stream = Stream(substream_seed(cfg.seed, "replacements"))
        self.param_events: list[ParamEvent] = []

    @property
    def tick(self) -> int:
        return self.society.tick

    def apply_param_change(self, key: str, value: float) -> ParamEvent:
        """Change a tunable at a tick boundary; takes effect next tick."""
        self.cfg = set_param(self.cfg, key, value)
        event = ParamEvent(applies_from_tick=self.society.tick + 1, key=key, value=float(value))
        self.param_events.append(event)
        return event

    def step(self) -> TickReport:
        society = self.society
        executing = society.tick + 1

        resolution = resolve_tick(
            society, self.cfg, self.memory, self.interaction_stream,
            collect=self.collect_outcomes, lane=self.lane,
        )

        tau = society.tau
        tau[:, COL_CRIMES] += resolution.d_crimes
        tau[:, COL_POLICE_PRED] += resolution.d_police
        tau[:, COL_TERROR_PRED] += resolution.d_terror
        tau[:, COL_POWER] += resolution.d_power

        for slot in resolution.removal_slots:
            removed_id, _ = replace_agent(
                society, slot, self.region, self.cfg, self.replacement_stream, born_tick=executing
            )
            self.memory.prune(removed_id)

        society.tick = executing

        counts = {kind.value: int(c) for kind, c in zip(KIND_ORDER, resolution.counts)}
        return TickReport(
            tick=executing,
            counts=counts,
            arrests=resolution.arrests,
            recruitments=resolution.recruitments,
            removals=len(resolution.removal_slots),
            attacks=resolution.attacks,
            aggregates=compute_aggregates(society, self.cfg),
            outcomes=resolution.outcomes,
        )

    def snapshot(self) -> Snapshot:
        society = self.society
        return Snapshot(
            tick=society.tick,
            ids=society.ids.copy(),
            born=society.born.copy(),
            tau=society.tau.copy(),
            roles=roles_vector(society.tau, self.cfg.thresholds),
            aggregates=compute_aggregates(society, self.cfg),
        )

    def digest(self) -> str:
        return self.society.state_digest()


def snapshot_ticks(n_ticks: int, every: int) -> list:
    """Ticks that receive a full snapshot: 0, every k*every, and the end."""
    ticks = {0, n_ticks}
    ticks.update(range(every, n_ticks + 1, every))
    return sorted(ticks)


def run(
    cfg: SimulationConfig,
    region: RegionIndicators,
    sinks: tuple = (),
    control=None,
    collect_outcomes: bool = False,
    lane: str | None = None,
) -> SimulationLog:
    """Build a society and execute the configured number of ticks.

    ``control``, when given, is polled at every tick boundary with the live
    Simulation; it may block (pause), change tunables, request snapshots or
    return False to stop early. Sink failures abort the run.
    """
    sim = Simulation(cfg, region, collect_outcomes=collect_outcomes, lane=lane)
    log = SimulationLog(
        config_flat=config_to_flat(cfg),
        region=region.to_dict(),
        lane=sim.lane,
    )
    meta = {"lane": sim.lane, "n_ticks": cfg.n_ticks, "snapshot_every": cfg.snapshot_every}

    def _dispatch(method, *args):
        for sink in sinks:
            try:
                getattr(sink, method)(*args)
            except Exception as exc:
                raise SinkError(f"sink {sink!r} failed in {method}: {exc}") from exc

    _dispatch("on_start", log.config_flat, log.region, meta)

    due = set(snapshot_ticks(cfg.n_ticks, cfg.snapshot_every))
    snap = sim.snapshot()
    log.snapshots.append(snap)
    _dispatch("on_snapshot", snap)

    stopped = False
    while sim.society.tick < cfg.n_ticks and not stopped:
        if control is not None:
            events_before = len(sim.param_events)
            keep_going = control.at_boundary(sim)
            for event in sim.param_events[events_before:]:
                log.param_events.append(event)
                _dispatch("on_param_change", event)
            if not keep_going:
                stopped = True
                break
        report = sim.step()
        log.reports.append(report)
        _dispatch("on_tick", report)
        if report.tick in due:
            snap = sim.snapshot()
            log.snapshots.append(snap)
            _dispatch("on_snapshot", snap)

    if stopped and sim.society.tick not in {s.tick for s in log.snapshots}:
        snap = sim.snapshot()
        log.snapshots.append(snap)
        _dispatch("on_snapshot", snap)

    log.completed_ticks = sim.society.tick
    log.final_digest = sim.digest()
    _dispatch("on_finish", log.final_digest, log.completed_ticks)
    return log


class _ReplayControl:
    """Reapplies recorded parameter changes at their original boundaries."""

    def __init__(self, param_events):
        self.pending = sorted(param_events, key=lambda e: e.applies_from_tick)
        self.cursor = 0

    def at_boundary(self, sim: Simulation) -> bool:
        upcoming = sim.society.tick + 1
        while self.cursor < len(self.pending) and self.pending[self.cursor].applies_from_tick <= upcoming:
            event = self.pending[self.cursor]
            sim.apply_param_change(event.key, event.value)
            self.cursor += 1
        return True


def replay(
    cfg: SimulationConfig,
    region: RegionIndicators,
    param_events=(),
    completed_ticks: int | None = None,
    lane: str | None = None,
) -> SimulationLog:
    """Re-execute a logged run; the digest must match the original."""
    ticks = cfg.n_ticks if completed_ticks is None else completed_ticks
    replay_cfg = cfg.replace(n_ticks=ticks)
    return run(replay_cfg, region, control=_ReplayControl(param_events), lane=lane)


def checkpoint_reports(log: SimulationLog, ticks) -> dict:
    """Per-checkpoint distribution summaries (polarity and toll views)."""
    from . import stats as _stats

    out = {}
    for checkpoint in ticks:
        snap = log.snapshot_at(checkpoint)
        tolls = [
            a.deaths
            for report in log.reports
            if report.tick <= checkpoint
            for a in report.attacks
        ]
        entry = {
            "tick": checkpoint,
            "polarization": _stats.polarization_index(snap),
            "predisposition_histogram": _stats.predisposition_histogram(snap, 21).to_dict(),
            "attacks_so_far": len(tolls),
        }
        if tolls:
            entry["toll_summary"] = dataclasses.asdict(_stats.summarize(tolls))
        out[checkpoint] = entry
    return out
