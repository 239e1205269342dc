"""Pairwise interaction rules: the reference implementation.

One collision between two connected agents is resolved into an outcome:
predisposition nudges, power shifts, recruitment, a two-stage arrest, or an
attack attempt. Resolution is pure - it reads the society (which holds
start-of-tick state during a tick) and returns deltas; the scheduler owns
the single mutation point and applies all deltas atomically at tick end.

Within a single resolution the initiator's own accruals are visible to the
later gates of that same resolution (power gained from a peer counts
towards the attack-power gate), but never across resolutions in the same
tick.

The compiled kernel in ``_speedups.pyx`` mirrors this module's semantics
and draw order exactly; the parity tests pin the two lanes together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .config import SimulationConfig
from .roles import (
    COL_POWER,
    AgentState,
    FeatureTensor,
    Role,
    ValidationError,
    classify_role,
    tensor_from_row_trusted,
)
from .rng import Stream


class OutcomeKind(Enum):
    NO_ACTION = "no_action"
    PREDISPOSITION_SHIFT = "predisposition_shift"
    POWER_SHIFT = "power_shift"
    RECRUITMENT = "recruitment"
    ARREST = "arrest"
    ATTACK_PLANNED = "attack_planned"  # reserved: plans always roll in the same tick
    ATTACK_EXECUTED = "attack_executed"
    ATTACK_FAILED = "attack_failed"


@dataclass(frozen=True)
class AttackEvent:
    tick: int
    leader_id: int
    financier_id: int
    cell_ids: tuple
    combined_power: float
    deaths: int

    def __post_init__(self):
        if len(self.cell_ids) < 3:
            raise ValidationError("an attack cell needs at least 3 members")
        if self.deaths < 0:
            raise ValidationError("deaths must be >= 0")

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "leader_id": self.leader_id,
            "financier_id": self.financier_id,
            "cell_ids": list(self.cell_ids),
            "combined_power": self.combined_power,
            "deaths": self.deaths,
        }


@dataclass(frozen=True)
class InteractionOutcome:
    kind: OutcomeKind
    affected: tuple = ()  # (agent_id, field_name, delta) triples
    attack: AttackEvent | None = None
    removed_ids: tuple = ()


class EncounterMemory:
    """Counts prior police-terrorist encounters per unordered id pair.

    Stage one of an arrest is a free pass: the first recorded encounter
    does nothing but remember. Entries are pruned when either agent leaves
    the society.
    """

    def __init__(self):
        self._counts: dict[tuple, int] = {}

    @staticmethod
    def _key(id_a: int, id_b: int) -> tuple:
        return (id_a, id_b) if id_a < id_b else (id_b, id_a)

    def count(self, id_a: int, id_b: int) -> int:
        return self._counts.get(self._key(id_a, id_b), 0)

    def record(self, id_a: int, id_b: int) -> int:
        key = self._key(id_a, id_b)
        self._counts[key] = self._counts.get(key, 0) + 1
        return self._counts[key]

    def prune(self, agent_id: int):
        stale = [k for k in self._counts if agent_id in k]
        for k in stale:
            del self._counts[k]

    def __len__(self):
        return len(self._counts)

    # The kernels share this plain dict to avoid relayering.
    @property
    def raw(self) -> dict:
        return self._counts


def logistic_cdf(x: float, mu: float, s: float) -> float:
    if not s > 0:
        raise ValidationError("logistic scale must be > 0")
    return 1.0 / (1.0 + math.exp(-(x - mu) / s))


def interaction_success_probability(w, tensor: FeatureTensor, mu: float, s: float) -> float:
    """Logistic CDF of the weighted constant traits.

    Strictly increasing in the weighted trait score, strictly decreasing
    in mu, exactly one half at the location.
    """
    if len(w) != 5:
        raise ValidationError("weight vector must have 5 components")
    score = (
        w[0] * tensor.tau1_education
        + w[1] * tensor.tau2_marital
        + w[2] * tensor.tau3_wealth
        + w[3] * tensor.tau4_religious_training
        + w[4] * tensor.tau5_crime_exposure
    )
    return logistic_cdf(score, mu, s)


def sample_death_toll(combined_power: float, cfg: SimulationConfig, stream: Stream) -> int:
    """Zero-inflated shifted-Pareto death toll for an executed attack.

    Draw order (mirrored by the compiled kernel): one uniform for the
    zero-inflation gate; if deadly, one open-interval uniform for the
    Pareto severity.
    """
    if combined_power < 0:
        raise ValidationError("combined_power must be >= 0")
    dt = cfg.death_toll
    if stream.random() < dt.p0:
        return 0
    u = stream.random_open0()
    severity = dt.severity_scale * combined_power * (u ** (-1.0 / dt.tail_alpha) - 1.0)
    if severity > 1e15:  # numeric guard, mirrored by the compiled kernel
        severity = 1e15
    return int(severity)


@dataclass(frozen=True)
class AttackPlan:
    """A gate-passing attack configuration, before the success roll."""

    initiator_power: float
    financier_slot: int
    cell_slots: tuple
    combined_power: float


def attack_gate(initiator_slot: int, initiator_power: float, society, cfg: SimulationConfig) -> AttackPlan | None:
    """Check whether an attack can be planned from this agent.

    Requires accumulated power at or above the attack threshold, at least
    three terrorist-role neighbours (the cell), and a financier among those
    neighbours with enough power of its own. Combined power sums the
    initiator, the financier and the whole cell.
    """
    thr = cfg.thresholds
    if initiator_power < thr.leader_power_attack_threshold:
        return None
    cell = []
    financier_slot = -1
    for other in society.neighbor_slots(initiator_slot):
        other = int(other)
        role = classify_role(tensor_from_row_trusted(society.tau[other]), thr)
        if role.is_terrorist:
            cell.append(other)
            if (
                financier_slot < 0
                and role is Role.FINANCIER
                and society.tau[other, COL_POWER] >= thr.financier_power_min
            ):
                financier_slot = other
    if len(cell) < 3 or financier_slot < 0:
        return None
    combined = initiator_power + society.tau[financier_slot, COL_POWER] + float(
        sum(society.tau[s, COL_POWER] for s in cell)
    )
    return AttackPlan(
        initiator_power=initiator_power,
        financier_slot=financier_slot,
        cell_slots=tuple(cell),
        combined_power=combined,
    )


def roll_attack(plan: AttackPlan, society, cfg: SimulationConfig, stream: Stream):
    """Success roll for a planned attack; returns (success, deaths).

    Success probability is the logistic CDF of the combined power around
    the population's current mean signed predisposition.
    """
    mu = society.signed_mean()
    p = logistic_cdf(plan.combined_power, mu, cfg.logistic_scale_s)
    success = stream.random() < p
    deaths = sample_death_toll(plan.combined_power, cfg, stream) if success else 0
    return success, deaths


def attempt_attack(leader: AgentState, society, cfg: SimulationConfig, stream: Stream) -> AttackEvent | None:
    """Standalone attack attempt; returns the event when one executes.

    Resolution inside a tick goes through attack_gate/roll_attack directly
    so the failure branch can also be represented; this wrapper serves
    callers that only care about executed attacks.
    """
    slot = society.slot_of(leader.agent_id)
    plan = attack_gate(slot, leader.tensor.tau9_power, society, cfg)
    if plan is None:
        return None
    success, deaths = roll_attack(plan, society, cfg, stream)
    if not success:
        return None
    return AttackEvent(
        tick=society.tick + 1,
        leader_id=leader.agent_id,
        financier_id=int(society.ids[plan.financier_slot]),
        cell_ids=tuple(int(society.ids[s]) for s in plan.cell_slots),
        combined_power=plan.combined_power,
        deaths=deaths,
    )


def resolve_interaction(
    a: AgentState,
    b: AgentState,
    society,
    cfg: SimulationConfig,
    memory: EncounterMemory,
    stream: Stream,
) -> InteractionOutcome:
    """Resolve one collision initiated by agent a along an existing edge."""
    if not society.are_connected(a.agent_id, b.agent_id):
        raise ValidationError(f"agents {a.agent_id} and {b.agent_id} are not connected")
    return _resolve_connected(a, b, society, cfg, memory, stream)


def _resolve_connected(
    a: AgentState,
    b: AgentState,
    society,
    cfg: SimulationConfig,
    memory: EncounterMemory,
    stream: Stream,
) -> InteractionOutcome:
    """Resolution body; the tick kernel calls this for edges it picked itself."""
    thr = cfg.thresholds
    inc = cfg.increments
    role_a = classify_role(a, thr)
    role_b = classify_role(b, thr)

    if role_a is Role.CIVILIAN:
        if role_b.is_terrorist:
            return InteractionOutcome(
                kind=OutcomeKind.PREDISPOSITION_SHIFT,
                affected=((a.agent_id, "tau8_terror_predisposition", inc.pred_gain_neutral),),
            )
        if role_b is Role.POLICE:
            return InteractionOutcome(
                kind=OutcomeKind.PREDISPOSITION_SHIFT,
                affected=((a.agent_id, "tau7_police_predisposition", inc.pred_gain_neutral),),
            )
        return InteractionOutcome(kind=OutcomeKind.NO_ACTION)

    if role_a is Role.POLICE:
        if role_b.is_terrorist:
            if memory.count(a.agent_id, b.agent_id) == 0:
                memory.record(a.agent_id, b.agent_id)
                return InteractionOutcome(kind=OutcomeKind.NO_ACTION)
            return InteractionOutcome(kind=OutcomeKind.ARREST, removed_ids=(b.agent_id,))
        if role_b is Role.POLICE:
            return InteractionOutcome(
                kind=OutcomeKind.POWER_SHIFT,
                affected=(
                    (a.agent_id, "tau9_power", inc.power_gain_peer),
                    (b.agent_id, "tau9_power", inc.power_gain_peer),
                ),
            )
        return InteractionOutcome(
            kind=OutcomeKind.PREDISPOSITION_SHIFT,
            affected=((b.agent_id, "tau7_police_predisposition", inc.pred_gain_contact),),
        )

    # a holds a terrorist role: Leader, Financier or Perpetrator.
    power_a = a.tensor.tau9_power

    if role_b is Role.POLICE:
        affected = ((a.agent_id, "tau9_power", -inc.power_loss_police),)
        removed = ()
        if power_a - inc.power_loss_police < thr.power_removal_floor:
            removed = (a.agent_id,)
        return InteractionOutcome(kind=OutcomeKind.POWER_SHIFT, affected=affected, removed_ids=removed)

    if role_b is Role.CIVILIAN:
        gain = inc.pred_gain_contact
        if role_a in (Role.LEADER, Role.FINANCIER):
            new_pred = b.tensor.tau8_terror_predisposition + gain
            if new_pred >= thr.terror_pred_threshold:
                return InteractionOutcome(
                    kind=OutcomeKind.RECRUITMENT,
                    affected=(
                        (b.agent_id, "tau8_terror_predisposition", gain + inc.recruit_pred_jump),
                    ),
                )
        return InteractionOutcome(
            kind=OutcomeKind.PREDISPOSITION_SHIFT,
            affected=((b.agent_id, "tau8_terror_predisposition", gain),),
        )

    # b also holds a terrorist role.
    if role_a is Role.FINANCIER:
        return InteractionOutcome(
            kind=OutcomeKind.POWER_SHIFT,
            affected=(
                (a.agent_id, "tau9_power", inc.power_gain_peer),
                (b.agent_id, "tau9_power", inc.power_gain_peer),
            ),
        )

    # Leader or Perpetrator meeting a peer: power accrues, then the attack gate.
    local_power = power_a + inc.power_gain_peer
    slot_a = society.slot_of(a.agent_id)
    plan = attack_gate(slot_a, local_power, society, cfg)
    if plan is None:
        return InteractionOutcome(
            kind=OutcomeKind.POWER_SHIFT,
            affected=((a.agent_id, "tau9_power", inc.power_gain_peer),),
        )
    success, deaths = roll_attack(plan, society, cfg, stream)
    if success:
        event = AttackEvent(
            tick=society.tick + 1,
            leader_id=a.agent_id,
            financier_id=int(society.ids[plan.financier_slot]),
            cell_ids=tuple(int(society.ids[s]) for s in plan.cell_slots),
            combined_power=plan.combined_power,
            deaths=deaths,
        )
        affected = [(a.agent_id, "tau9_power", inc.power_gain_peer), (a.agent_id, "tau6_crimes_committed", 1.0)]
        for s in plan.cell_slots:
            affected.append((int(society.ids[s]), "tau6_crimes_committed", 1.0))
        return InteractionOutcome(
            kind=OutcomeKind.ATTACK_EXECUTED,
            affected=tuple(affected),
            attack=event,
        )
    # Failed attack: the initiator's power collapses by the configured factor.
    collapse = -local_power * (1.0 - cfg.attack_fail_power_factor)
    return InteractionOutcome(
        kind=OutcomeKind.ATTACK_FAILED,
        affected=(
            (a.agent_id, "tau9_power", inc.power_gain_peer),
            (a.agent_id, "tau9_power", collapse),
        ),
    )
