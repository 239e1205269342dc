import numpy as np
import pytest

from socsynth.config import GraphConfig
from socsynth.graph import build_ideology_graph, edges_to_csr
from socsynth.rng import numpy_generator
from socsynth.roles import ValidationError


def degrees(build):
    out = {i: 0 for i in range(build.n)}
    for a, b in build.edges:
        out[a] += 1
        out[b] += 1
    return out


def test_minimal_four_node_graph():
    cfg = GraphConfig(n_agents=4, cluster_fraction=0.0, cluster_size=3, base_random_edges_per_node=2)
    build = build_ideology_graph(cfg, numpy_generator(1, "g"))
    degs = degrees(build)
    assert all(d >= 2 for d in degs.values())
    assert len(build.edges) <= 6  # complete graph bound on 4 nodes


def test_cluster_partition_into_triangles():
    cfg = GraphConfig(n_agents=100, cluster_fraction=0.09, cluster_size=3, base_random_edges_per_node=2)
    build = build_ideology_graph(cfg, numpy_generator(2, "g"))
    assert len(build.clustered_nodes) == 9
    assert len(build.cliques) == 3
    for clique in build.cliques:
        assert len(clique) == 3
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = sorted((clique[i], clique[j]))
                assert (a, b) in build.edges  # within-group edges present


def test_leftover_cluster_budget_is_not_clustered():
    # floor(0.08 * 100) = 8 nodes, cluster_size 3 -> 2 full cliques, 6 nodes.
    cfg = GraphConfig(n_agents=100, cluster_fraction=0.08, cluster_size=3, base_random_edges_per_node=2)
    build = build_ideology_graph(cfg, numpy_generator(3, "g"))
    assert len(build.clustered_nodes) == 6


def test_structural_invariants_over_seeds():
    cfg = GraphConfig(n_agents=1000)
    for seed in range(50):
        build = build_ideology_graph(cfg, numpy_generator(seed, "g"))
        degs = degrees(build)
        assert min(degs.values()) >= 2
        assert len(build.clustered_nodes) < 100  # below 10% of n
        assert not any(a == b for a, b in build.edges)


def test_infeasible_config_rejected():
    with pytest.raises(ValidationError):
        cfg = GraphConfig(n_agents=4, cluster_fraction=0.0, base_random_edges_per_node=2)
        object.__setattr__(cfg, "base_random_edges_per_node", 5)  # bypass ctor check
        build_ideology_graph(cfg, numpy_generator(1, "g"))


def test_csr_is_sorted_and_symmetric():
    cfg = GraphConfig(n_agents=50, cluster_fraction=0.08, cluster_size=4, base_random_edges_per_node=3)
    build = build_ideology_graph(cfg, numpy_generator(4, "g"))
    indptr, indices = edges_to_csr(build.edges, build.n)
    assert indptr[-1] == 2 * len(build.edges)
    for node in range(build.n):
        neigh = indices[indptr[node]: indptr[node + 1]]
        assert np.all(np.diff(neigh) > 0)  # sorted, no duplicates
        for other in neigh:
            row = indices[indptr[other]: indptr[other + 1]]
            assert node in row  # symmetric


def test_csr_rejects_self_loops():
    with pytest.raises(ValidationError):
        edges_to_csr({(1, 1)}, 3)


def test_graph_config_validation():
    with pytest.raises(ValidationError):
        GraphConfig(cluster_fraction=0.10)
    with pytest.raises(ValidationError):
        GraphConfig(n_agents=3)
    with pytest.raises(ValidationError):
        GraphConfig(base_random_edges_per_node=1)
