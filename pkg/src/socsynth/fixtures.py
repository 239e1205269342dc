"""Bundled desk-scale fixtures and their deterministic generators.

The incident fixture stands in for a recorded-incident database: 13274
rows whose death column is constructed to hit the reference moments
exactly (mean 55751/13274 ~= 4.2, unbiased variance ~= 727, more than
12000 zero-death rows, one catastrophic 2600-death event). The generator
is deterministic, so ``socsynth gen-fixtures`` reproduces the bundled
files byte for byte.

Three contrasting region fixtures cover a high-education/wealthy, a
mid-range and a low-education/poor demographic profile.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .config import SimulationConfig, config_to_text
from .regions import (
    Incident,
    IncidentDataset,
    RegionIndicators,
    incidents_to_text,
    region_to_text,
)

INCIDENT_ROWS = 13274
INCIDENT_ZERO_ROWS = 12074
INCIDENT_DEATH_SUM = 55751  # mean = 55751/13274 = 4.20002 (odd, see generator)
INCIDENT_TARGET_VARIANCE = 727.0
INCIDENT_ANCHOR_TOLL = 2600  # one event above 2500 deaths
_FIXTURE_SEED = 20240117

INCIDENTS_FILENAME = "incidents_reference.csv"
DEFAULT_CONFIG_FILENAME = "default.config"
REGION_FILENAMES = {
    "meridia": "region_meridia.region",
    "norvale": "region_norvale.region",
    "kharsan": "region_kharsan.region",
}


def region_meridia() -> RegionIndicators:
    """Mid-range demographic profile; the default simulation region."""
    return RegionIndicators(
        name="Meridia",
        married_fraction=0.5,
        education=(0.2, 0.3, 0.3, 0.2),
        wealth_rate=4.0,
        religiosity_mean=0.6,
        religiosity_sd=0.18,
        crime_density_mean=0.35,
        crime_density_sd=0.12,
    )


def region_norvale() -> RegionIndicators:
    """High-education, wealthy, low-crime profile."""
    return RegionIndicators(
        name="Norvale",
        married_fraction=0.55,
        education=(0.05, 0.15, 0.35, 0.45),
        wealth_rate=8.0,
        religiosity_mean=0.35,
        religiosity_sd=0.15,
        crime_density_mean=0.15,
        crime_density_sd=0.08,
    )


def region_kharsan() -> RegionIndicators:
    """Low-education, poor, high-exposure profile."""
    return RegionIndicators(
        name="Kharsan",
        married_fraction=0.6,
        education=(0.45, 0.3, 0.18, 0.07),
        wealth_rate=2.0,
        religiosity_mean=0.85,
        religiosity_sd=0.1,
        crime_density_mean=0.55,
        crime_density_sd=0.15,
    )


ALL_REGIONS = {
    "meridia": region_meridia,
    "norvale": region_norvale,
    "kharsan": region_kharsan,
}


def _target_square_sum() -> int:
    """Sum of squared deaths that lands the unbiased variance on target.

    Sum-preserving unit transfers change the square sum by even steps, and
    its parity is pinned to the parity of the death sum, so the reachable
    value closest to the real-valued target is the odd integer next to it.
    """
    n = INCIDENT_ROWS
    s = INCIDENT_DEATH_SUM
    target = INCIDENT_TARGET_VARIANCE * (n - 1) + s * s / n
    candidate = int(round(target))
    if candidate % 2 != s % 2:
        candidate += 1 if target > candidate else -1
    return candidate


def _adjust_sum(tolls: np.ndarray, target_sum: int, gen: np.random.Generator):
    """Nudge elements by +-1 (keeping them >= 1) until the sum is exact.

    Element 0 is the catastrophic anchor and is left untouched.
    """
    diff = target_sum - int(tolls.sum())
    step = 1 if diff > 0 else -1
    guard = 0
    while diff != 0:
        idx = int(gen.integers(1, len(tolls)))
        if step < 0 and tolls[idx] <= 1:
            guard += 1
            if guard > 10_000_000:
                raise RuntimeError("sum adjustment failed")
            continue
        tolls[idx] += step
        diff -= step


def _adjust_square_sum(tolls: np.ndarray, target_q: int):
    """Sum-preserving unit transfers until the square sum is exact.

    Moving one death from element i to element j changes the square sum by
    2*(tolls[j] - tolls[i] + 1); picking donors/receivers by rank walks the
    square sum monotonically, and adjacent-value pairs give steps of +-2,
    so the exact (parity-matched) target is always reachable.
    """
    guard = 0
    while True:
        q = int(np.dot(tolls, tolls))
        if q == target_q:
            return
        guard += 1
        if guard > 10_000_000:
            raise RuntimeError("square-sum adjustment failed")
        # The catastrophic anchor (element 0) stays out of the adjustment.
        order = np.argsort(tolls[1:], kind="stable") + 1
        if q < target_q:
            # Grow spread: take from the smallest donor > 1, give to a
            # receiver that does not overshoot.
            donor = next(int(i) for i in order if tolls[i] > 1)
            need = target_q - q
            receiver = None
            for idx in order[::-1]:
                idx = int(idx)
                if idx == donor:
                    continue
                delta = 2 * (tolls[idx] - tolls[donor] + 1)
                if 0 < delta <= need:
                    receiver = idx
                    break
            if receiver is None:
                # No single step fits; use the smallest positive step.
                for idx in order:
                    idx = int(idx)
                    if idx != donor and 2 * (tolls[idx] - tolls[donor] + 1) > 0:
                        receiver = idx
                        break
        else:
            # Shrink spread: move one death from the largest element to the
            # smallest (most negative step), or the least-negative that fits.
            donor = int(order[-1])
            need = q - target_q
            receiver = None
            for idx in order:
                idx = int(idx)
                if idx == donor:
                    continue
                delta = 2 * (tolls[idx] - tolls[donor] + 1)
                if -need <= delta < 0:
                    receiver = idx
                    break
            if receiver is None:
                receiver = int(order[0]) if int(order[0]) != donor else int(order[1])
        tolls[donor] -= 1
        tolls[receiver] += 1


def build_incident_tolls() -> np.ndarray:
    """Deterministic death column hitting the reference moments exactly."""
    gen = np.random.default_rng(_FIXTURE_SEED)
    m = INCIDENT_ROWS - INCIDENT_ZERO_ROWS

    tolls = np.ones(m, dtype=np.int64)
    tolls[0] = INCIDENT_ANCHOR_TOLL
    # Heavy-tailed body for the remaining events.
    body = np.minimum(gen.pareto(1.3, m - 1) * 4.0 + 1.0, 900.0).astype(np.int64)
    tolls[1:] = np.maximum(body, 1)

    _adjust_sum(tolls, INCIDENT_DEATH_SUM, gen)
    _adjust_square_sum(tolls, _target_square_sum())

    deaths = np.zeros(INCIDENT_ROWS, dtype=np.int64)
    deaths[:m] = tolls
    gen.shuffle(deaths)
    return deaths


def build_incident_fixture() -> IncidentDataset:
    deaths = build_incident_tolls()
    gen = np.random.default_rng(_FIXTURE_SEED + 1)
    years = 1968 + (np.arange(INCIDENT_ROWS) * 50) // INCIDENT_ROWS
    # Weapon mix dominated by explosives and firearms.
    weapons = gen.choice(
        np.arange(1, 7), size=INCIDENT_ROWS, p=(0.02, 0.45, 0.08, 0.3, 0.05, 0.10)
    )
    incidents = tuple(
        Incident(year=int(years[i]), deaths=int(deaths[i]), weapon=int(weapons[i]))
        for i in range(INCIDENT_ROWS)
    )
    return IncidentDataset(incidents=incidents)


def write_fixtures(out_dir) -> dict:
    """Write all bundled fixtures into a directory; returns name -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}

    incident_path = out_dir / INCIDENTS_FILENAME
    incident_path.write_text(incidents_to_text(build_incident_fixture()))
    written["incidents"] = incident_path

    for key, factory in ALL_REGIONS.items():
        path = out_dir / REGION_FILENAMES[key]
        path.write_text(region_to_text(factory()))
        written[f"region_{key}"] = path

    config_path = out_dir / DEFAULT_CONFIG_FILENAME
    config_path.write_text(config_to_text(SimulationConfig()))
    written["config"] = config_path
    return written


def bundled_path(filename: str) -> Path:
    """Path to a data file shipped inside the installed package."""
    return Path(resources.files("socsynth").joinpath("data", filename))


def bundled_incidents_path() -> Path:
    return bundled_path(INCIDENTS_FILENAME)


def bundled_region_path(key: str = "meridia") -> Path:
    return bundled_path(REGION_FILENAMES[key])


def bundled_config_path() -> Path:
    return bundled_path(DEFAULT_CONFIG_FILENAME)
