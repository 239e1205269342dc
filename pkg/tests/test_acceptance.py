"""Acceptance suite: the release gate, one test per criterion.

Each test prints a [PASS]/[FAIL] line to the real stdout so the gate is
visible in captured pytest runs. The documented seed set for the run-level
criteria is seeds 1..10 on the bundled default config and Meridia region.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import ndtri

from socsynth.cli import _sweep_design
from socsynth.config import GraphConfig, SimulationConfig
from socsynth.fixtures import bundled_incidents_path, region_meridia
from socsynth.graph import build_ideology_graph
from socsynth.interact import EncounterMemory, OutcomeKind, attack_gate, logistic_cdf
from socsynth.kernel import active_lane
from socsynth.regions import load_incidents
from socsynth.rng import numpy_generator
from socsynth.sampling import sample_constant_traits
from socsynth.scheduler import replay, run
from socsynth.stats import (
    Histogram,
    fit_gamma_moments,
    histogram,
    kde,
    kde_grid,
    kl_divergence,
    polarization_index,
    silverman_bandwidth,
    summarize,
    uniform_edges,
)

DOCUMENTED_SEEDS = tuple(range(1, 11))
RUN_TIME_LIMIT_S = 60.0


@pytest.fixture
def report(capsys):
    """Print one visible [PASS]/[FAIL] line per criterion, then assert."""

    def _report(criterion: str, ok: bool, detail: str = ""):
        marker = "PASS" if ok else "FAIL"
        line = f"[{marker}] {criterion}"
        if detail:
            line += f" -- {detail}"
        with capsys.disabled():
            print(f"\n{line}", flush=True)
        assert ok, line

    return _report


@pytest.fixture(scope="module")
def default_runs():
    """The documented 10-seed battery at full scale, shared across criteria."""
    region = region_meridia()
    results = []
    for seed in DOCUMENTED_SEEDS:
        cfg = SimulationConfig(seed=seed)
        start = time.perf_counter()
        log = run(cfg, region)
        elapsed = time.perf_counter() - start
        results.append((seed, log, elapsed))
    return results


def test_recorded_fixture_moments(report):
    start = time.perf_counter()
    dataset = load_incidents(bundled_incidents_path())
    stats = summarize(dataset.deaths)
    elapsed = time.perf_counter() - start
    zero_rows = round(stats.zero_fraction * stats.count)
    ok = (
        stats.count == 13274
        and abs(stats.mean - 4.2) <= 0.05
        and abs(stats.variance - 727.0) <= 5.0
        and zero_rows > 12000
        and elapsed < 1.0
    )
    report(
        "recorded-fixture moments",
        ok,
        f"mean={stats.mean:.5f} var={stats.variance:.3f} zeros={zero_rows} in {elapsed:.2f}s",
    )


def test_calibration_shape(default_runs, report):
    passing = 0
    details = []
    slowest = 0.0
    for seed, log, elapsed in default_runs:
        slowest = max(slowest, elapsed)
        deaths = log.attack_deaths()
        if not deaths:
            details.append(f"s{seed}:none")
            continue
        stats = summarize(deaths)
        ratio = stats.variance / stats.mean if stats.mean > 0 else 0.0
        ok = stats.median == 0 and ratio > 50.0 and 1.0 <= stats.mean <= 8.0
        passing += ok
        details.append(f"s{seed}:{'ok' if ok else f'mean={stats.mean:.1f},vm={ratio:.0f}'}")
    ok = passing >= 7 and slowest < RUN_TIME_LIMIT_S
    report(
        "calibration shape (median 0, var/mean > 50, mean in [1,8]; >=7/10 seeds)",
        ok,
        f"{passing}/10 seeds, slowest run {slowest:.1f}s on {active_lane()} lane [{' '.join(details)}]",
    )


def test_polarization_progression(default_runs, report):
    passing = 0
    details = []
    for seed, log, _ in default_runs:
        p2, p3, p4 = (polarization_index(log.snapshot_at(t)) for t in (2000, 3000, 4000))
        ok = p2 < p3 < p4
        passing += ok
        details.append(f"s{seed}:{p2:.2f}<{p3:.2f}<{p4:.2f}" if ok else f"s{seed}:flat")
    ok = passing >= 7
    report("polarization progression 2000 < 3000 < 4000 (>=7/10 seeds)", ok, f"{passing}/10 seeds")


def test_determinism_and_replay(default_runs, report):
    region = region_meridia()
    seed, log, _ = default_runs[0]
    duplicate = run(SimulationConfig(seed=seed), region)
    identical = duplicate.final_digest == log.final_digest

    steer_cfg = SimulationConfig(graph=GraphConfig(n_agents=150), n_ticks=300, seed=97)

    class ChangeMidway:
        def at_boundary(self, sim):
            if sim.society.tick + 1 == 120:
                sim.apply_param_change("increments.pred_gain_contact", 0.22)
            return True

    steered = run(steer_cfg, region, control=ChangeMidway())
    replayed = replay(
        steer_cfg,
        region,
        param_events=steered.param_events,
        completed_ticks=steered.completed_ticks,
    )
    replay_ok = replayed.final_digest == steered.final_digest
    ok = identical and replay_ok
    report(
        "determinism: identical digests and steered-log replay (exact)",
        ok,
        f"plain={identical} steered_replay={replay_ok}",
    )


def test_population_conservation(default_runs, report):
    n = SimulationConfig().graph.n_agents
    ok = all(
        report_.aggregates["n"] == n
        for _, log, _ in default_runs
        for report_ in log.reports
    )
    ticks = sum(len(log.reports) for _, log, _ in default_runs)
    report("population conservation at every tick", ok, f"{ticks} ticks across 10 runs, n={n}")


def test_structural_invariants(report):
    cfg = GraphConfig(n_agents=1000)
    ok = True
    for seed in range(50):
        build = build_ideology_graph(cfg, numpy_generator(seed, "graph"))
        degrees = {}
        for a, b in build.edges:
            degrees[a] = degrees.get(a, 0) + 1
            degrees[b] = degrees.get(b, 0) + 1
        if min(degrees.get(i, 0) for i in range(1000)) < 2 or len(build.clustered_nodes) >= 100:
            ok = False
            break
    report("tick-0 structure: min degree >= 2, clustered nodes < 10% (50 seeds)", ok)


def test_logistic_properties(report):
    exact_half = logistic_cdf(3.7, 3.7, 2.5) == 0.5
    symmetry = all(
        abs(logistic_cdf(mu + d, mu, s) + logistic_cdf(mu - d, mu, s) - 1.0) <= 1e-12
        for mu in (-2.0, 0.0, 5.0)
        for s in (0.5, 1.0, 10.0)
        for d in (0.1, 1.0, 10.0)
    )
    grid = np.linspace(-50.0, 50.0, 10_000)
    values = [logistic_cdf(x, 0.0, 3.0) for x in grid]
    monotone = all(b > a for a, b in zip(values, values[1:]))
    in_range = all(0.0 < v < 1.0 for v in values)
    ok = exact_half and symmetry and monotone and in_range
    report(
        "logistic: F(mu)=0.5 exact, symmetry to 1e-12, monotone on 10^4 grid",
        ok,
        f"half={exact_half} sym={symmetry} mono={monotone}",
    )


def test_lhs_stratification_exact(report):
    # Clamp-free distribution parameters keep the independent CDF-inversion
    # oracle exact (with clamping active, the saturated tail strata merge on
    # the boundary atoms and per-bin counts are no longer observable).
    from socsynth.regions import RegionIndicators

    region = RegionIndicators(
        name="lhs-check",
        married_fraction=0.5,
        education=(0.25, 0.25, 0.25, 0.25),
        wealth_rate=4.0,
        religiosity_mean=0.5,
        religiosity_sd=0.05,
        crime_density_mean=0.5,
        crime_density_sd=0.04,
    )
    n = 200
    ok = True
    # Continuous constant traits: religiosity (col 3) and crime exposure (col 4).
    traits = sample_constant_traits(region, "lhs", n, numpy_generator(3, "traits"))
    for col, mean, sd in ((3, region.religiosity_mean, region.religiosity_sd),
                          (4, region.crime_density_mean, region.crime_density_sd)):
        edges = mean + sd * ndtri(np.linspace(0, 1, n + 1))
        counts, _ = np.histogram(traits[:, col], bins=edges)
        ok = ok and bool(np.array_equal(counts, np.ones(n, dtype=counts.dtype)))
    # Sweep dimensions stratify too.
    spec = {
        "samples": 16,
        "mode": "lhs",
        "parameters": {
            "logistic_scale_s": [1.0, 9.0],
            "increments.pred_gain_contact": [0.01, 0.17],
        },
    }
    design = _sweep_design(spec, master_seed=42)
    for key, (lo, hi) in spec["parameters"].items():
        strata = sorted(min(int((p[key] - lo) / (hi - lo) * 16), 15) for p in design)
        ok = ok and strata == list(range(16))
    report("LHS stratification: one sample per stratum, traits and sweep dims", ok)


def test_statistics_oracles(report):
    h = histogram([0, 1, 1, 2, 5, 9], uniform_edges(0, 10, 5))
    kl_self = kl_divergence(h, h)

    p = Histogram(edges=(0.0, 0.5, 1.0), counts=(10, 0))
    q = Histogram(edges=(0.0, 0.5, 1.0), counts=(5, 5))
    kl_ln2 = kl_divergence(p, q, epsilon=1e-12)

    gen = np.random.default_rng(12345)
    draws = gen.gamma(shape=2.0, scale=2.0, size=10**5)
    fit = fit_gamma_moments(draws)
    gamma_ok = abs(fit.shape - 2.0) / 2.0 < 0.10 and abs(fit.scale - 2.0) / 2.0 < 0.10

    sample = gen.normal(3.0, 1.5, 4000)
    grid, density = kde_grid(sample, silverman_bandwidth(sample))
    integral = float(np.trapezoid(density, grid))

    ok = (
        kl_self == 0.0
        and abs(kl_ln2 - math.log(2)) <= 1e-9
        and gamma_ok
        and abs(integral - 1.0) <= 1e-3
    )
    report(
        "statistics oracles: KL identity/ln2, gamma round-trip, KDE mass",
        ok,
        f"kl_self={kl_self} kl_ln2_err={abs(kl_ln2 - math.log(2)):.2e} "
        f"gamma=({fit.shape:.3f},{fit.scale:.3f}) kde_mass={integral:.5f}",
    )


def test_attack_gate_exhaustive(report):
    from conftest import financier_row, leader_row, make_society, perpetrator_row, police_row, civilian_row
    from socsynth.rng import Stream
    from socsynth.interact import resolve_interaction

    cfg = SimulationConfig()
    thr = cfg.thresholds
    ok = True

    # Exhaustive sweep over the gate-relevant factor grid on an 8-agent
    # society: initiator power x terror-neighbour count x financier presence
    # x financier power. The initiator (slot 0) is wired to `n_terror`
    # terror-role agents and the rest civilians.
    for initiator_power_ok in (False, True):
        for n_terror in range(0, 6):
            for fin_state in ("none", "weak", "strong"):
                rows = [leader_row(power=5.0)]
                terror_rows = []
                if fin_state != "none" and n_terror >= 1:
                    fin_power = 0.1 if fin_state == "weak" else 2.0
                    terror_rows.append(financier_row(power=fin_power))
                while len(terror_rows) < n_terror:
                    terror_rows.append(perpetrator_row(power=1.0))
                rows += terror_rows
                while len(rows) < 8:
                    rows.append(civilian_row())
                society = make_society(rows, [(0, i) for i in range(1, 8)])

                power = thr.leader_power_attack_threshold + (1.0 if initiator_power_ok else -0.01)
                plan = attack_gate(0, power, society, cfg)
                gate_should_pass = (
                    initiator_power_ok and n_terror >= 3 and fin_state == "strong"
                )
                if (plan is not None) != gate_should_pass:
                    ok = False
                if plan is not None and (len(plan.cell_slots) < 3 or plan.financier_slot < 0):
                    ok = False

    # Two-stage arrest: the first police-terrorist encounter never arrests,
    # for every terror role.
    for terror_row in (perpetrator_row, leader_row, financier_row):
        society = make_society([police_row(), terror_row()], [(0, 1)])
        memory = EncounterMemory()
        outcome = resolve_interaction(
            society.agent_at(0), society.agent_at(1), society, cfg, memory, Stream(1)
        )
        if outcome.kind is not OutcomeKind.NO_ACTION:
            ok = False
        second = resolve_interaction(
            society.agent_at(0), society.agent_at(1), society, cfg, memory, Stream(1)
        )
        if second.kind is not OutcomeKind.ARREST:
            ok = False

    report("attack gate exhaustive + two-stage arrest on first encounter", ok)


def test_no_attack_event_violates_gate(default_runs, report):
    """Every logged attack across the documented battery has a legal cell."""
    ok = True
    checked = 0
    for _, log, _ in default_runs:
        for tick_report in log.reports:
            for event in tick_report.attacks:
                checked += 1
                if len(event.cell_ids) < 3 or event.financier_id not in event.cell_ids:
                    ok = False
    report("attack events carry >=3-member cells with a financier", ok, f"{checked} events checked")
