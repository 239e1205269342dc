"""Agent trait tensor, role taxonomy, and the tensor-to-role rule.

Each agent carries nine traits. The first five are fixed at creation and
describe background (education, marital status, relative wealth, religious
training, crime exposure); the last four evolve through interactions
(crimes committed, predisposition towards police, predisposition towards
terrorism, power). Roles are never stored: they are re-derived from the
tensor and a threshold set every time they are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Column layout of the (n, 9) trait matrix. Order matters: it is shared
# with the compiled kernel and with serialized snapshots.
COL_EDUCATION = 0
COL_MARITAL = 1
COL_WEALTH = 2
COL_RELIGIOUS = 3
COL_CRIME_EXPOSURE = 4
COL_CRIMES = 5
COL_POLICE_PRED = 6
COL_TERROR_PRED = 7
COL_POWER = 8

TENSOR_FIELDS = (
    "tau1_education",
    "tau2_marital",
    "tau3_wealth",
    "tau4_religious_training",
    "tau5_crime_exposure",
    "tau6_crimes_committed",
    "tau7_police_predisposition",
    "tau8_terror_predisposition",
    "tau9_power",
)

# Integer role codes shared with the kernels and snapshot files.
ROLE_CIVILIAN = 0
ROLE_POLICE = 1
ROLE_PERPETRATOR = 2
ROLE_LEADER = 3
ROLE_FINANCIER = 4


class Role(Enum):
    CIVILIAN = ROLE_CIVILIAN
    POLICE = ROLE_POLICE
    PERPETRATOR = ROLE_PERPETRATOR
    LEADER = ROLE_LEADER
    FINANCIER = ROLE_FINANCIER

    @property
    def is_terrorist(self) -> bool:
        return self in TERRORIST_ROLES


TERRORIST_ROLES = frozenset({Role.PERPETRATOR, Role.LEADER, Role.FINANCIER})


class ValidationError(ValueError):
    """A domain object or input file violated one of its constraints."""


@dataclass(frozen=True)
class FeatureTensor:
    """One agent's nine-trait vector. tau1..tau5 are constant for life."""

    tau1_education: float
    tau2_marital: float
    tau3_wealth: float
    tau4_religious_training: float
    tau5_crime_exposure: float
    tau6_crimes_committed: int = 0
    tau7_police_predisposition: float = 0.0
    tau8_terror_predisposition: float = 0.0
    tau9_power: float = 0.0

    def __post_init__(self):
        for name in TENSOR_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if not 0.0 <= self.tau1_education <= 1.0:
            raise ValidationError("tau1_education must lie in [0, 1]")
        if self.tau2_marital not in (0.0, 1.0):
            raise ValidationError("tau2_marital must be 0 or 1")
        if self.tau3_wealth < 0.0:
            raise ValidationError("tau3_wealth must be >= 0")
        if not 0.0 <= self.tau4_religious_training <= 1.0:
            raise ValidationError("tau4_religious_training must lie in [0, 1]")
        if not 0.0 <= self.tau5_crime_exposure <= 1.0:
            raise ValidationError("tau5_crime_exposure must lie in [0, 1]")
        if self.tau6_crimes_committed < 0 or self.tau6_crimes_committed != int(self.tau6_crimes_committed):
            raise ValidationError("tau6_crimes_committed must be a non-negative integer")
        if self.tau7_police_predisposition < 0.0:
            raise ValidationError("tau7_police_predisposition must be >= 0")
        if self.tau8_terror_predisposition < 0.0:
            raise ValidationError("tau8_terror_predisposition must be >= 0")
        if self.tau9_power < 0.0:
            raise ValidationError("tau9_power must be >= 0")

    def as_row(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in TENSOR_FIELDS], dtype=np.float64)

    @classmethod
    def from_row(cls, row) -> "FeatureTensor":
        return cls(
            tau1_education=float(row[COL_EDUCATION]),
            tau2_marital=float(row[COL_MARITAL]),
            tau3_wealth=float(row[COL_WEALTH]),
            tau4_religious_training=float(row[COL_RELIGIOUS]),
            tau5_crime_exposure=float(row[COL_CRIME_EXPOSURE]),
            tau6_crimes_committed=int(row[COL_CRIMES]),
            tau7_police_predisposition=float(row[COL_POLICE_PRED]),
            tau8_terror_predisposition=float(row[COL_TERROR_PRED]),
            tau9_power=float(row[COL_POWER]),
        )


def tensor_from_row_trusted(row) -> FeatureTensor:
    """Build a FeatureTensor from a trait row, skipping validation.

    Hot-path constructor for rows already living inside a Society, which
    were validated when they entered it.
    """
    values = row.tolist() if hasattr(row, "tolist") else list(row)
    tensor = object.__new__(FeatureTensor)
    set_attr = object.__setattr__
    set_attr(tensor, "tau1_education", values[COL_EDUCATION])
    set_attr(tensor, "tau2_marital", values[COL_MARITAL])
    set_attr(tensor, "tau3_wealth", values[COL_WEALTH])
    set_attr(tensor, "tau4_religious_training", values[COL_RELIGIOUS])
    set_attr(tensor, "tau5_crime_exposure", values[COL_CRIME_EXPOSURE])
    set_attr(tensor, "tau6_crimes_committed", int(values[COL_CRIMES]))
    set_attr(tensor, "tau7_police_predisposition", values[COL_POLICE_PRED])
    set_attr(tensor, "tau8_terror_predisposition", values[COL_TERROR_PRED])
    set_attr(tensor, "tau9_power", values[COL_POWER])
    return tensor


@dataclass(frozen=True)
class AgentState:
    agent_id: int
    tensor: FeatureTensor
    born_tick: int = 0

    def __post_init__(self):
        if self.born_tick < 0:
            raise ValidationError("born_tick must be >= 0")


def agent_state_trusted(agent_id: int, tensor: FeatureTensor, born_tick: int) -> AgentState:
    state = object.__new__(AgentState)
    object.__setattr__(state, "agent_id", agent_id)
    object.__setattr__(state, "tensor", tensor)
    object.__setattr__(state, "born_tick", born_tick)
    return state


@dataclass(frozen=True)
class RoleThresholds:
    """Gate values for the tensor-to-role rule. All strictly positive
    except power_removal_floor, which may be zero."""

    police_pred_threshold: float = 48.0
    terror_pred_threshold: float = 45.0
    leader_education_min: float = 0.6
    financier_wealth_min: float = 1.0
    leader_power_attack_threshold: float = 0.8
    financier_power_min: float = 0.5
    power_removal_floor: float = 0.5

    def __post_init__(self):
        strictly_positive = (
            "police_pred_threshold",
            "terror_pred_threshold",
            "leader_education_min",
            "financier_wealth_min",
            "leader_power_attack_threshold",
            "financier_power_min",
        )
        for name in strictly_positive:
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be > 0")
        if self.power_removal_floor < 0.0:
            raise ValidationError("power_removal_floor must be >= 0")


def signed_predisposition(tensor: FeatureTensor) -> float:
    """Police-leaning minus terror-leaning; negative means terror-leaning."""
    return tensor.tau7_police_predisposition - tensor.tau8_terror_predisposition


def classify_role(state: AgentState | FeatureTensor, thresholds: RoleThresholds) -> Role:
    """Derive an agent's role from its tensor.

    Police wins when the police predisposition clears its threshold and
    strictly dominates the terror predisposition. A terror-side role wins
    when the terror predisposition clears its threshold and either
    dominates or the police side is below its own threshold. An exact tie
    with both sides at or above threshold stays Civilian, keeping contested
    agents recruitable by either side. Religion and crime exposure never
    enter the gate.
    """
    tensor = state.tensor if isinstance(state, AgentState) else state
    code = _classify_code(
        tensor.tau1_education,
        tensor.tau2_marital,
        tensor.tau3_wealth,
        tensor.tau7_police_predisposition,
        tensor.tau8_terror_predisposition,
        thresholds,
    )
    return Role(code)


def _classify_code(edu, marital, wealth, police_pred, terror_pred, thr: RoleThresholds) -> int:
    police_q = police_pred >= thr.police_pred_threshold
    terror_q = terror_pred >= thr.terror_pred_threshold
    if police_q and police_pred > terror_pred:
        return ROLE_POLICE
    if terror_q and (terror_pred > police_pred or not police_q):
        if edu >= thr.leader_education_min and marital == 1.0:
            return ROLE_LEADER
        if wealth >= thr.financier_wealth_min and marital == 1.0:
            return ROLE_FINANCIER
        return ROLE_PERPETRATOR
    return ROLE_CIVILIAN


def roles_vector(tau: np.ndarray, thr: RoleThresholds) -> np.ndarray:
    """Vectorised classification of an (n, 9) trait matrix to role codes.

    Must agree with classify_role on every row; a property test pins this.
    """
    police_pred = tau[:, COL_POLICE_PRED]
    terror_pred = tau[:, COL_TERROR_PRED]
    police_q = police_pred >= thr.police_pred_threshold
    terror_q = terror_pred >= thr.terror_pred_threshold

    is_police = police_q & (police_pred > terror_pred)
    is_terror = ~is_police & terror_q & ((terror_pred > police_pred) | ~police_q)

    married = tau[:, COL_MARITAL] == 1.0
    is_leader = is_terror & (tau[:, COL_EDUCATION] >= thr.leader_education_min) & married
    is_fin = is_terror & ~is_leader & (tau[:, COL_WEALTH] >= thr.financier_wealth_min) & married

    out = np.zeros(tau.shape[0], dtype=np.int8)
    out[is_police] = ROLE_POLICE
    out[is_terror] = ROLE_PERPETRATOR
    out[is_leader] = ROLE_LEADER
    out[is_fin] = ROLE_FINANCIER
    return out
