"""Tick-kernel lane selection and the shared kernel contract.

One simulation tick resolves one interaction per agent (slot order, one
uniformly chosen incident edge each) against start-of-tick state. That
inner loop dominates runtime, so it exists twice:

* ``socsynth._speedups`` - a Cython extension compiled at install time;
* ``socsynth._kernel_py`` - a pure-Python mirror used when the extension
  is unavailable (or when SOCSYNTH_PURE_PYTHON=1 forces it).

Both lanes consume the same splitmix64 stream and produce bit-identical
societies; ``tests/test_kernel_parity.py`` pins that, and
``benchmarks/bench_kernel.py`` compares their throughput.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .interact import AttackEvent, OutcomeKind

KIND_ORDER = (
    OutcomeKind.NO_ACTION,
    OutcomeKind.PREDISPOSITION_SHIFT,
    OutcomeKind.POWER_SHIFT,
    OutcomeKind.RECRUITMENT,
    OutcomeKind.ARREST,
    OutcomeKind.ATTACK_PLANNED,
    OutcomeKind.ATTACK_EXECUTED,
    OutcomeKind.ATTACK_FAILED,
)
KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}

# Packed scalar parameters handed to the compiled kernel. Order is part of
# the kernel ABI; _speedups.pyx indexes these positions literally.
P_POLICE_THR = 0
P_TERROR_THR = 1
P_LEADER_EDU_MIN = 2
P_FIN_WEALTH_MIN = 3
P_ATTACK_POWER_THR = 4
P_FIN_POWER_MIN = 5
P_REMOVAL_FLOOR = 6
P_GAIN_NEUTRAL = 7
P_GAIN_CONTACT = 8
P_GAIN_PEER = 9
P_LOSS_POLICE = 10
P_RECRUIT_JUMP = 11
P_LOGISTIC_S = 12
P_TOLL_P0 = 13
P_TOLL_ALPHA = 14
P_TOLL_SCALE = 15
P_FAIL_FACTOR = 16
N_PARAMS = 17


def pack_params(cfg: SimulationConfig) -> np.ndarray:
    p = np.empty(N_PARAMS, dtype=np.float64)
    thr, inc, dt = cfg.thresholds, cfg.increments, cfg.death_toll
    p[P_POLICE_THR] = thr.police_pred_threshold
    p[P_TERROR_THR] = thr.terror_pred_threshold
    p[P_LEADER_EDU_MIN] = thr.leader_education_min
    p[P_FIN_WEALTH_MIN] = thr.financier_wealth_min
    p[P_ATTACK_POWER_THR] = thr.leader_power_attack_threshold
    p[P_FIN_POWER_MIN] = thr.financier_power_min
    p[P_REMOVAL_FLOOR] = thr.power_removal_floor
    p[P_GAIN_NEUTRAL] = inc.pred_gain_neutral
    p[P_GAIN_CONTACT] = inc.pred_gain_contact
    p[P_GAIN_PEER] = inc.power_gain_peer
    p[P_LOSS_POLICE] = inc.power_loss_police
    p[P_RECRUIT_JUMP] = inc.recruit_pred_jump
    p[P_LOGISTIC_S] = cfg.logistic_scale_s
    p[P_TOLL_P0] = dt.p0
    p[P_TOLL_ALPHA] = dt.tail_alpha
    p[P_TOLL_SCALE] = dt.severity_scale
    p[P_FAIL_FACTOR] = cfg.attack_fail_power_factor
    return p


@dataclass
class TickResolution:
    """Everything one tick's resolutions produced, before application."""

    d_crimes: np.ndarray
    d_police: np.ndarray
    d_terror: np.ndarray
    d_power: np.ndarray
    removal_slots: list
    attacks: list
    counts: np.ndarray  # per OutcomeKind, KIND_ORDER positions
    outcomes: list | None = None

    @property
    def arrests(self) -> int:
        return int(self.counts[KIND_INDEX[OutcomeKind.ARREST]])

    @property
    def recruitments(self) -> int:
        return int(self.counts[KIND_INDEX[OutcomeKind.RECRUITMENT]])


def _compiled_available() -> bool:
    if os.environ.get("SOCSYNTH_PURE_PYTHON"):
        return False
    try:
        from . import _speedups  # noqa: F401
    except ImportError:
        return False
    return True


HAVE_COMPILED = _compiled_available()


def active_lane() -> str:
    return "compiled" if HAVE_COMPILED else "python"


def resolve_tick(society, cfg, memory, stream, collect: bool = False, lane: str | None = None) -> TickResolution:
    """Resolve every interaction of one tick without mutating the society."""
    chosen = lane or active_lane()
    if chosen == "compiled":
        return _resolve_tick_compiled(society, cfg, memory, stream)
    from . import _kernel_py

    return _kernel_py.resolve_tick(society, cfg, memory, stream, collect)


def _resolve_tick_compiled(society, cfg, memory, stream) -> TickResolution:
    from . import _speedups

    params = pack_params(cfg)
    (
        new_state,
        counts,
        d_crimes,
        d_police,
        d_terror,
        d_power,
        removal_slots,
        raw_attacks,
    ) = _speedups.resolve_tick(
        society.tau,
        society.ids,
        society.indptr,
        society.indices,
        society.edge_pairs,
        1 if cfg.pair_selection == "edge_sample" else 0,
        memory.raw,
        params,
        stream.state,
    )
    stream.state = new_state
    attacks = [
        AttackEvent(
            tick=society.tick + 1,
            leader_id=int(society.ids[initiator]),
            financier_id=int(society.ids[financier]),
            cell_ids=tuple(int(society.ids[s]) for s in cell),
            combined_power=combined,
            deaths=deaths,
        )
        for initiator, financier, cell, combined, deaths in raw_attacks
    ]
    return TickResolution(
        d_crimes=d_crimes,
        d_police=d_police,
        d_terror=d_terror,
        d_power=d_power,
        removal_slots=list(removal_slots),
        attacks=attacks,
        counts=counts,
        outcomes=None,
    )
