"""Ideological-affinity graph construction.

Edges carry affinity, not proximity. The builder first wires a small set
of nodes (strictly under 10% of the population) into fully connected
cliques, then adds uniformly random edges until every node has at least
the configured minimum degree. The graph may be disconnected; that is the
intended "scattered groups of loyalty" topology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GraphConfig
from .roles import ValidationError


@dataclass(frozen=True)
class GraphBuild:
    """Edge set plus bookkeeping about which nodes were clique-wired."""

    edges: frozenset  # unordered (lo, hi) node index pairs
    cliques: tuple  # tuple of tuples of node indices
    n: int

    @property
    def clustered_nodes(self) -> frozenset:
        return frozenset(node for clique in self.cliques for node in clique)


def build_ideology_graph(cfg: GraphConfig, gen: np.random.Generator) -> GraphBuild:
    n = cfg.n_agents
    if cfg.base_random_edges_per_node > n - 1:
        raise ValidationError("degree floor infeasible: base_random_edges_per_node > n - 1")
    if cfg.clustered_node_target > 0 and cfg.cluster_size > n:
        raise ValidationError("cluster_size exceeds n_agents")

    adjacency: list[set] = [set() for _ in range(n)]

    def add_edge(a: int, b: int):
        adjacency[a].add(b)
        adjacency[b].add(a)

    cliques = []
    target = cfg.clustered_node_target
    if target > 0:
        chosen = gen.choice(n, size=target, replace=False)
        for start in range(0, target, cfg.cluster_size):
            group = tuple(int(v) for v in chosen[start : start + cfg.cluster_size])
            cliques.append(group)
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    add_edge(group[i], group[j])

    for node in range(n):
        guard = 0
        while len(adjacency[node]) < cfg.base_random_edges_per_node:
            other = int(gen.integers(0, n))
            if other == node or other in adjacency[node]:
                guard += 1
                if guard > 1000 * n:
                    raise ValidationError("random edge placement failed; config infeasible")
                continue
            add_edge(node, other)

    edges = frozenset(
        (a, b) for a in range(n) for b in adjacency[a] if a < b
    )
    return GraphBuild(edges=edges, cliques=tuple(cliques), n=n)


def edges_to_csr(edges, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric CSR adjacency with sorted neighbour lists.

    Sorted adjacency makes neighbour iteration order deterministic, which
    the kernels rely on for reproducible draws.
    """
    adjacency: list[list] = [[] for _ in range(n)]
    for a, b in edges:
        if a == b:
            raise ValidationError("self loops are not allowed")
        adjacency[a].append(b)
        adjacency[b].append(a)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, neigh in enumerate(adjacency):
        if len(set(neigh)) != len(neigh):
            raise ValidationError("duplicate edges are not allowed")
        indptr[i + 1] = indptr[i] + len(neigh)
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    for i, neigh in enumerate(adjacency):
        indices[indptr[i] : indptr[i + 1]] = sorted(neigh)
    return indptr, indices
