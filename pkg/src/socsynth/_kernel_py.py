"""Pure-Python tick kernel.

Drives the reference resolver over every agent in slot order, drawing one
incident edge per agent from the shared interaction stream. This lane is
the readable source of truth; the compiled lane reproduces its draws and
deltas bit for bit.
"""

from __future__ import annotations

import numpy as np

from .interact import _resolve_connected

_FIELD_TO_BUFFER = {
    "tau6_crimes_committed": 0,
    "tau7_police_predisposition": 1,
    "tau8_terror_predisposition": 2,
    "tau9_power": 3,
}


def _pair_iter(society, cfg, stream):
    """Yield (initiator_slot, partner_slot) pairs for one tick.

    per_agent: every agent in slot order picks one incident edge uniformly.
    edge_sample: n uniform draws from the edge list; lower slot initiates.
    """
    n = society.n
    if cfg.pair_selection == "edge_sample":
        edges = society.edge_pairs
        n_edges = edges.shape[0]
        if n_edges == 0:
            return
        for _ in range(n):
            row = edges[stream.randbelow(n_edges)]
            yield int(row[0]), int(row[1])
        return
    indptr = society.indptr
    indices = society.indices
    for slot in range(n):
        start = indptr[slot]
        degree = indptr[slot + 1] - start
        if degree == 0:
            continue
        yield slot, int(indices[start + stream.randbelow(int(degree))])


def resolve_tick(society, cfg, memory, stream, collect: bool = False):
    from .kernel import KIND_INDEX, TickResolution

    n = society.n
    buffers = np.zeros((4, n), dtype=np.float64)
    removal_flag = np.zeros(n, dtype=bool)
    removal_slots: list[int] = []
    attacks = []
    counts = np.zeros(8, dtype=np.int64)
    outcomes = [] if collect else None

    id_to_slot = society.id_to_slot

    for slot, other in _pair_iter(society, cfg, stream):
        a = society.agent_at(slot)
        b = society.agent_at(other)
        outcome = _resolve_connected(a, b, society, cfg, memory, stream)

        counts[KIND_INDEX[outcome.kind]] += 1
        for agent_id, field, delta in outcome.affected:
            buffers[_FIELD_TO_BUFFER[field], id_to_slot[agent_id]] += delta
        for removed_id in outcome.removed_ids:
            removed_slot = id_to_slot[removed_id]
            if not removal_flag[removed_slot]:
                removal_flag[removed_slot] = True
                removal_slots.append(removed_slot)
        if outcome.attack is not None:
            attacks.append(outcome.attack)
        if collect:
            outcomes.append(outcome)

    return TickResolution(
        d_crimes=buffers[0],
        d_police=buffers[1],
        d_terror=buffers[2],
        d_power=buffers[3],
        removal_slots=removal_slots,
        attacks=attacks,
        counts=counts,
        outcomes=outcomes,
    )
