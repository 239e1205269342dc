"""Trait sampling for agent creation.

Constant traits come from the region indicators: education is a categorical
draw over the four attainment levels, marital status is Bernoulli, relative
wealth is a Poisson draw rescaled by its rate (mean 1), and religiosity and
crime exposure are normals clamped to [0, 1]. Traits are sampled without
cross-feature correlation.

Under Latin hypercube mode the continuous traits (religiosity, crime
exposure) are stratified: the n draws occupy the n equal-probability
quantile bins exactly once each.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .config import InitParams
from .regions import EDUCATION_LEVELS, RegionIndicators
from .roles import ValidationError


def lhs_uniforms(n: int, gen: np.random.Generator) -> np.ndarray:
    """n stratified uniforms: one per stratum [k/n, (k+1)/n), shuffled."""
    strata = gen.permutation(n)
    return (strata + gen.random(n)) / n


def _stratified_clamped_normal(mean, sd, n, gen, lhs: bool) -> np.ndarray:
    if sd == 0.0:
        return np.full(n, np.clip(mean, 0.0, 1.0))
    if lhs:
        u = lhs_uniforms(n, gen)
        # Guard the open interval; ndtri(0) and ndtri(1) are infinite.
        u = np.clip(u, 1e-15, 1.0 - 1e-15)
        x = mean + sd * ndtri(u)
    else:
        x = gen.normal(mean, sd, n)
    return np.clip(x, 0.0, 1.0)


def sample_constant_traits(
    region: RegionIndicators,
    mode: str,
    n: int,
    gen: np.random.Generator,
) -> np.ndarray:
    """(n, 5) matrix of constant traits drawn from region demographics."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if mode not in ("random", "lhs"):
        raise ValidationError(f"unknown sampling mode {mode!r}")
    lhs = mode == "lhs"

    levels = np.asarray(EDUCATION_LEVELS)
    education = levels[gen.choice(4, size=n, p=np.asarray(region.education) / sum(region.education))]
    married = (gen.random(n) < region.married_fraction).astype(np.float64)
    wealth = gen.poisson(region.wealth_rate, n) / region.wealth_rate
    religiosity = _stratified_clamped_normal(region.religiosity_mean, region.religiosity_sd, n, gen, lhs)
    crime = _stratified_clamped_normal(region.crime_density_mean, region.crime_density_sd, n, gen, lhs)

    return np.column_stack([education, married, wealth, religiosity, crime])


def init_variable_traits(n: int, gen: np.random.Generator, params: InitParams) -> np.ndarray:
    """(n, 4) matrix of variable traits at birth.

    Nobody has committed a crime yet; both predispositions start near
    neutral (half-normal with a small scale) and power is uniform.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    crimes = np.zeros(n)
    police_pred = np.abs(gen.normal(0.0, params.pred_scale, n)) if params.pred_scale > 0 else np.zeros(n)
    terror_pred = np.abs(gen.normal(0.0, params.pred_scale, n)) if params.pred_scale > 0 else np.zeros(n)
    power = gen.uniform(params.power_min, params.power_max, n)
    return np.column_stack([crimes, police_pred, terror_pred, power])


def constant_trait_targets(region: RegionIndicators) -> np.ndarray:
    """Expected means of the five constant traits under the region."""
    return np.array(
        [
            region.expected_education,
            region.married_fraction,
            1.0,  # Poisson(rate)/rate
            region.religiosity_mean,
            region.crime_density_mean,
        ]
    )


def constant_trait_sds(region: RegionIndicators) -> np.ndarray:
    """Per-draw standard deviations of the constant traits.

    Used to put a standard-error floor under the balance tolerance so that
    small populations are not rejected for ordinary sampling noise. Clamping
    only shrinks the normal traits' spread, so these are safe upper bounds.
    """
    levels = np.asarray(EDUCATION_LEVELS)
    e = np.asarray(region.education)
    edu_var = float(np.dot(e, levels**2) - np.dot(e, levels) ** 2)
    mf = region.married_fraction
    # A [0,1]-clamped variable cannot have sd above 0.5; capping keeps an
    # oversized configured sd from masking real clamping bias.
    return np.array(
        [
            np.sqrt(max(edu_var, 0.0)),
            np.sqrt(mf * (1.0 - mf)),
            1.0 / np.sqrt(region.wealth_rate),
            min(region.religiosity_sd, 0.5),
            min(region.crime_density_sd, 0.5),
        ]
    )


CONSTANT_TRAIT_NAMES = (
    "tau1_education",
    "tau2_marital",
    "tau3_wealth",
    "tau4_religious_training",
    "tau5_crime_exposure",
)
