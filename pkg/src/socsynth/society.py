"""The agent population and its affinity graph.

A Society is array-backed: the (n, 9) trait matrix, agent ids, birth ticks
and a CSR adjacency. Slots are stable; when an agent is removed its slot is
refilled by a freshly sampled agent with a brand-new id, so the population
size and the graph topology never change after construction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .graph import build_ideology_graph, edges_to_csr
from .regions import RegionIndicators
from .rng import Stream, numpy_generator
from .roles import (
    AgentState,
    ValidationError,
    agent_state_trusted,
    tensor_from_row_trusted,
)
from .sampling import (
    CONSTANT_TRAIT_NAMES,
    constant_trait_sds,
    constant_trait_targets,
    init_variable_traits,
    sample_constant_traits,
)


@dataclass
class Society:
    tau: np.ndarray  # (n, 9) float64
    ids: np.ndarray  # (n,) int64, unique, never reused
    born: np.ndarray  # (n,) int64
    indptr: np.ndarray  # (n+1,) int64 CSR row pointers
    indices: np.ndarray  # int64 CSR neighbour slots
    tick: int = 0
    next_id: int = 0
    clustered_slots: frozenset = field(default_factory=frozenset)
    _id_to_slot: dict | None = field(default=None, repr=False, compare=False)
    _edge_pairs: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    @property
    def edge_pairs(self) -> np.ndarray:
        """(E, 2) array of unique slot pairs (lo < hi), in deterministic order.

        The topology never changes after construction, so this is cached.
        """
        if self._edge_pairs is None:
            pairs = [
                (slot, int(other))
                for slot in range(self.n)
                for other in self.neighbor_slots(slot)
                if slot < other
            ]
            self._edge_pairs = np.array(pairs, dtype=np.int64).reshape(len(pairs), 2)
        return self._edge_pairs

    @property
    def id_to_slot(self) -> dict:
        if self._id_to_slot is None:
            self._id_to_slot = {int(self.ids[s]): s for s in range(self.n)}
        return self._id_to_slot

    def degree(self, slot: int) -> int:
        return int(self.indptr[slot + 1] - self.indptr[slot])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbor_slots(self, slot: int) -> np.ndarray:
        return self.indices[self.indptr[slot] : self.indptr[slot + 1]]

    def slot_of(self, agent_id: int) -> int:
        try:
            return self.id_to_slot[agent_id]
        except KeyError:
            raise KeyError(f"unknown agent id {agent_id}") from None

    def agent_at(self, slot: int) -> AgentState:
        return agent_state_trusted(
            int(self.ids[slot]),
            tensor_from_row_trusted(self.tau[slot]),
            int(self.born[slot]),
        )

    def agent(self, agent_id: int) -> AgentState:
        return self.agent_at(self.slot_of(agent_id))

    def agents(self):
        for slot in range(self.n):
            yield self.agent_at(slot)

    def edges(self) -> set:
        """Unordered agent-id pairs."""
        out = set()
        for slot in range(self.n):
            for other in self.neighbor_slots(slot):
                a, b = int(self.ids[slot]), int(self.ids[other])
                out.add((a, b) if a < b else (b, a))
        return out

    def are_connected(self, id_a: int, id_b: int) -> bool:
        slot_a = self.slot_of(id_a)
        slot_b = self.slot_of(id_b)
        neigh = self.neighbor_slots(slot_a)  # sorted by construction
        pos = int(np.searchsorted(neigh, slot_b))
        return pos < len(neigh) and int(neigh[pos]) == slot_b

    def signed_mean(self) -> float:
        """Population mean of signed predisposition (police minus terror)."""
        from .roles import COL_POLICE_PRED, COL_TERROR_PRED

        return float((self.tau[:, COL_POLICE_PRED] - self.tau[:, COL_TERROR_PRED]).mean())

    def validate(self):
        if len(np.unique(self.ids)) != self.n:
            raise ValidationError("agent ids must be unique")
        for slot in range(self.n):
            neigh = self.neighbor_slots(slot)
            if np.any(neigh == slot):
                raise ValidationError("self loops are not allowed")
            if len(np.unique(neigh)) != len(neigh):
                raise ValidationError("duplicate edges are not allowed")

    def state_digest(self) -> str:
        """SHA-256 over the full state; equal digests mean equal societies."""
        h = hashlib.sha256()
        h.update(np.int64(self.tick).tobytes())
        h.update(np.int64(self.next_id).tobytes())
        h.update(np.ascontiguousarray(self.ids).tobytes())
        h.update(np.ascontiguousarray(self.born).tobytes())
        h.update(np.ascontiguousarray(self.tau).tobytes())
        h.update(np.ascontiguousarray(self.indptr).tobytes())
        h.update(np.ascontiguousarray(self.indices).tobytes())
        return h.hexdigest()

    def copy(self) -> "Society":
        return Society(
            tau=self.tau.copy(),
            ids=self.ids.copy(),
            born=self.born.copy(),
            indptr=self.indptr,
            indices=self.indices,
            tick=self.tick,
            next_id=self.next_id,
            clustered_slots=self.clustered_slots,
        )


class BalanceError(ValidationError):
    """Sampled trait means would not settle near the region targets."""


def _assemble_tau(constants: np.ndarray, variables: np.ndarray) -> np.ndarray:
    tau = np.ascontiguousarray(np.hstack([constants, variables]), dtype=np.float64)
    return tau


def build_society(cfg: SimulationConfig, region: RegionIndicators, master_seed: int | None = None) -> Society:
    """Sample agents, check balance, wire the graph, assemble the society.

    Balance means the empirical means of the five constant traits land
    within the configured tolerance of the region targets; sampling retries
    a bounded number of times before rejecting with the worst offender.
    """
    seed = cfg.seed if master_seed is None else master_seed
    n = cfg.graph.n_agents
    trait_gen = numpy_generator(seed, "traits")
    var_gen = numpy_generator(seed, "variable-traits")
    graph_gen = numpy_generator(seed, "graph")

    targets = constant_trait_targets(region)
    # The configured tolerance gets a 4-standard-error floor per trait so
    # desk-scale populations are not rejected for ordinary sampling noise.
    tolerances = np.maximum(cfg.balance.tolerance, 4.0 * constant_trait_sds(region) / np.sqrt(n))
    constants = None
    worst_name, worst_dev = "", float("inf")
    for _ in range(cfg.balance.max_retries + 1):
        candidate = sample_constant_traits(region, cfg.sampling_mode, n, trait_gen)
        deviations = np.abs(candidate.mean(axis=0) - targets)
        if np.all(deviations <= tolerances):
            constants = candidate
            break
        worst = int(np.argmax(deviations - tolerances))
        worst_name, worst_dev = CONSTANT_TRAIT_NAMES[worst], float(deviations[worst])
    if constants is None:
        raise BalanceError(
            f"trait balance failed after {cfg.balance.max_retries + 1} attempts; "
            f"worst deviation {worst_dev:.4f} on {worst_name}"
        )

    variables = init_variable_traits(n, var_gen, cfg.init)
    build = build_ideology_graph(cfg.graph, graph_gen)
    indptr, indices = edges_to_csr(build.edges, n)

    society = Society(
        tau=_assemble_tau(constants, variables),
        ids=np.arange(n, dtype=np.int64),
        born=np.zeros(n, dtype=np.int64),
        indptr=indptr,
        indices=indices,
        tick=0,
        next_id=n,
        clustered_slots=frozenset(build.clustered_nodes),
    )
    society.validate()
    return society


def sample_replacement_traits(region: RegionIndicators, cfg: SimulationConfig, stream: Stream) -> np.ndarray:
    """Fresh 9-trait row for a replacement agent.

    Scalar draws from the shared splitmix stream, in a fixed order the
    compiled kernel mirrors exactly: education, marital, wealth,
    religiosity, crime exposure, police predisposition, terror
    predisposition, power.
    """
    e1, e2, e3, _ = region.education
    u = stream.random()
    if u < e1:
        education = 0.0
    elif u < e1 + e2:
        education = 1.0 / 3.0
    elif u < e1 + e2 + e3:
        education = 2.0 / 3.0
    else:
        education = 1.0
    married = 1.0 if stream.bernoulli(region.married_fraction) else 0.0
    wealth = stream.poisson(region.wealth_rate) / region.wealth_rate
    religiosity = stream.clamped_normal(region.religiosity_mean, region.religiosity_sd, 0.0, 1.0)
    crime = stream.clamped_normal(region.crime_density_mean, region.crime_density_sd, 0.0, 1.0)
    police_pred = stream.halfnormal(cfg.init.pred_scale) if cfg.init.pred_scale > 0 else 0.0
    terror_pred = stream.halfnormal(cfg.init.pred_scale) if cfg.init.pred_scale > 0 else 0.0
    power = stream.uniform(cfg.init.power_min, cfg.init.power_max)
    return np.array(
        [education, married, wealth, religiosity, crime, 0.0, police_pred, terror_pred, power]
    )


def replace_agent(
    society: Society,
    slot: int,
    region: RegionIndicators,
    cfg: SimulationConfig,
    stream: Stream,
    born_tick: int,
) -> tuple[int, int]:
    """Refill a slot with a fresh agent; returns (removed_id, new_id)."""
    removed_id = int(society.ids[slot])
    new_id = society.next_id
    society.next_id += 1
    society.ids[slot] = new_id
    society.born[slot] = born_tick
    society.tau[slot, :] = sample_replacement_traits(region, cfg, stream)
    if society._id_to_slot is not None:
        del society._id_to_slot[removed_id]
        society._id_to_slot[new_id] = slot
    return removed_id, new_id


def remove_and_replace(
    society: Society,
    agent_id: int,
    region: RegionIndicators,
    cfg: SimulationConfig,
    stream: Stream,
    memory=None,
    born_tick: int | None = None,
) -> int:
    """Delete an agent and insert a fresh one in its place.

    The replacement inherits the removed agent's edges (so the degree floor
    survives), starts with zero crimes, and carries a brand-new id; any
    encounter-memory entries involving the removed agent are pruned.
    Returns the new agent's id. Unknown ids raise KeyError.
    """
    slot = society.slot_of(agent_id)
    if born_tick is None:
        born_tick = society.tick
    removed_id, new_id = replace_agent(society, slot, region, cfg, stream, born_tick)
    if memory is not None:
        memory.prune(removed_id)
    return new_id
