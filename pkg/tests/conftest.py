import numpy as np
import pytest

from socsynth.config import GraphConfig, SimulationConfig
from socsynth.fixtures import region_meridia
from socsynth.roles import RoleThresholds
from socsynth.society import Society


@pytest.fixture
def region():
    return region_meridia()


@pytest.fixture
def small_cfg():
    """Desk-scale config for fast scheduler-level tests."""
    return SimulationConfig(
        graph=GraphConfig(n_agents=120),
        n_ticks=150,
        seed=11,
        snapshot_every=50,
    )


def make_society(rows, edges, thresholds=None) -> Society:
    """Hand-built society from explicit trait rows and slot-index edges."""
    tau = np.ascontiguousarray(np.array(rows, dtype=np.float64))
    n = tau.shape[0]
    adjacency = [[] for _ in range(n)]
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, neigh in enumerate(adjacency):
        indptr[i + 1] = indptr[i] + len(neigh)
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    for i, neigh in enumerate(adjacency):
        indices[indptr[i]: indptr[i + 1]] = sorted(neigh)
    return Society(
        tau=tau,
        ids=np.arange(n, dtype=np.int64),
        born=np.zeros(n, dtype=np.int64),
        indptr=indptr,
        indices=indices,
        tick=0,
        next_id=n,
    )


def agent_row(edu=0.5, married=0.0, wealth=1.0, religiosity=0.5, crime=0.3,
              crimes=0.0, police=0.0, terror=0.0, power=1.0):
    return [edu, married, wealth, religiosity, crime, crimes, police, terror, power]


# Canonical role presets for a default RoleThresholds (police 48 / terror 45).
def civilian_row(**kw):
    return agent_row(**kw)


def police_row(power=1.0, **kw):
    return agent_row(police=60.0, power=power, **kw)


def perpetrator_row(power=1.0, **kw):
    return agent_row(edu=0.0, married=0.0, wealth=0.5, terror=60.0, power=power, **kw)


def leader_row(power=1.0, **kw):
    return agent_row(edu=1.0, married=1.0, wealth=0.5, terror=60.0, power=power, **kw)


def financier_row(power=1.0, **kw):
    return agent_row(edu=0.0, married=1.0, wealth=3.0, terror=60.0, power=power, **kw)
