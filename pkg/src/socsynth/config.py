"""Run configuration: structure, defaults, text format, live-tunable keys.

A config file is a ``key = value`` text document with a leading format tag
line (``#socsynth-config v1``). Keys are the dataclass field names below,
dotted for nested sections, e.g. ``thresholds.terror_pred_threshold``.
The same dotted paths address parameters at runtime through the steering
interface; only the keys in TUNABLE_RANGES may change mid-run.
"""

from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass, field

from .roles import RoleThresholds, ValidationError

CONFIG_FORMAT_TAG = "#socsynth-config v1"


@dataclass(frozen=True)
class GraphConfig:
    """Shape of the ideological-affinity graph.

    A small fraction of nodes (strictly below 10%) is wired into fully
    connected cliques; afterwards every node receives uniformly random
    edges until it reaches the minimum degree.
    """

    n_agents: int = 1000
    cluster_fraction: float = 0.09
    cluster_size: int = 4
    base_random_edges_per_node: int = 5

    def __post_init__(self):
        if self.n_agents < 4:
            raise ValidationError("n_agents must be >= 4")
        if not 0.0 <= self.cluster_fraction < 0.10:
            raise ValidationError("cluster_fraction must lie in [0, 0.10)")
        if self.cluster_size < 3:
            raise ValidationError("cluster_size must be >= 3")
        if self.base_random_edges_per_node < 2:
            raise ValidationError("base_random_edges_per_node must be >= 2")
        if self.base_random_edges_per_node > self.n_agents - 1:
            raise ValidationError("base_random_edges_per_node exceeds n_agents - 1")

    @property
    def clustered_node_target(self) -> int:
        budget = int(self.cluster_fraction * self.n_agents)
        return (budget // self.cluster_size) * self.cluster_size


@dataclass(frozen=True)
class IncrementTable:
    """Magnitudes applied by the interaction rules. All strictly positive."""

    pred_gain_neutral: float = 0.05
    pred_gain_contact: float = 0.1
    power_gain_peer: float = 0.005
    power_loss_police: float = 0.3
    recruit_pred_jump: float = 0.5

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not v > 0.0:
                raise ValidationError(f"{f.name} must be > 0")


@dataclass(frozen=True)
class DeathTollParams:
    """Zero-inflated shifted-Pareto severity model for executed attacks.

    With probability p0 an attack kills nobody; otherwise the toll is
    floor(severity_scale * combined_power * (U**(-1/tail_alpha) - 1)).
    """

    p0: float = 0.85
    tail_alpha: float = 2.05
    severity_scale: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.p0 <= 1.0:
            raise ValidationError("p0 must lie in [0, 1]")
        if not self.tail_alpha > 1.0:
            raise ValidationError("tail_alpha must be > 1")
        if not self.severity_scale > 0.0:
            raise ValidationError("severity_scale must be > 0")


@dataclass(frozen=True)
class InitParams:
    """Distributions for the variable traits at agent creation."""

    pred_scale: float = 19.2
    power_min: float = 1.5
    power_max: float = 2.5

    def __post_init__(self):
        if self.pred_scale < 0.0:
            raise ValidationError("pred_scale must be >= 0")
        if self.power_min < 0.0 or self.power_max < self.power_min:
            raise ValidationError("power bounds must satisfy 0 <= power_min <= power_max")


@dataclass(frozen=True)
class BalanceParams:
    """Post-sampling check that constant-trait means track region targets."""

    tolerance: float = 0.05
    max_retries: int = 10

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValidationError("tolerance must be > 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")


SAMPLING_MODES = ("random", "lhs")

# How collision pairs are drawn each tick: one incident edge per agent in
# slot order (the default contract), or a uniform sample of n edges (a
# sensitivity alternative; the lower-indexed endpoint initiates).
PAIR_SELECTION_MODES = ("per_agent", "edge_sample")


@dataclass(frozen=True)
class SimulationConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    thresholds: RoleThresholds = field(default_factory=RoleThresholds)
    increments: IncrementTable = field(default_factory=IncrementTable)
    death_toll: DeathTollParams = field(default_factory=DeathTollParams)
    init: InitParams = field(default_factory=InitParams)
    balance: BalanceParams = field(default_factory=BalanceParams)
    logistic_scale_s: float = 10.0
    region_weights_w: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    attack_fail_power_factor: float = 0.25
    n_ticks: int = 4000
    seed: int = 42
    sampling_mode: str = "lhs"
    pair_selection: str = "per_agent"
    snapshot_every: int = 100

    def __post_init__(self):
        if not self.logistic_scale_s > 0.0:
            raise ValidationError("logistic_scale_s must be > 0")
        if len(self.region_weights_w) != 5:
            raise ValidationError("region_weights_w must have 5 components")
        if not 0.0 < self.attack_fail_power_factor <= 1.0:
            raise ValidationError("attack_fail_power_factor must lie in (0, 1]")
        if self.n_ticks < 0:
            raise ValidationError("n_ticks must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.sampling_mode not in SAMPLING_MODES:
            raise ValidationError(f"sampling_mode must be one of {SAMPLING_MODES}")
        if self.pair_selection not in PAIR_SELECTION_MODES:
            raise ValidationError(f"pair_selection must be one of {PAIR_SELECTION_MODES}")
        if self.snapshot_every < 1:
            raise ValidationError("snapshot_every must be >= 1")

    def replace(self, **kwargs) -> "SimulationConfig":
        return dataclasses.replace(self, **kwargs)


# Dotted keys that the steering interface may change mid-run, with their
# accepted ranges. Structural keys (graph, seed, n_ticks, ...) are fixed.
TUNABLE_RANGES: dict[str, tuple[float, float]] = {
    "thresholds.police_pred_threshold": (1e-9, 1e6),
    "thresholds.terror_pred_threshold": (1e-9, 1e6),
    "thresholds.leader_education_min": (1e-9, 1.0),
    "thresholds.financier_wealth_min": (1e-9, 1e6),
    "thresholds.leader_power_attack_threshold": (1e-9, 1e6),
    "thresholds.financier_power_min": (1e-9, 1e6),
    "thresholds.power_removal_floor": (0.0, 1e6),
    "increments.pred_gain_neutral": (1e-9, 1e3),
    "increments.pred_gain_contact": (1e-9, 1e3),
    "increments.power_gain_peer": (1e-9, 1e3),
    "increments.power_loss_police": (1e-9, 1e3),
    "increments.recruit_pred_jump": (1e-9, 1e3),
    "logistic_scale_s": (1e-9, 1e6),
    "death_toll.p0": (0.0, 1.0),
    "death_toll.tail_alpha": (1.0000001, 100.0),
}

_SECTIONS = ("graph", "thresholds", "increments", "death_toll", "init", "balance")


def get_param(cfg: SimulationConfig, path: str):
    """Read a config value by dotted path."""
    obj = cfg
    for part in path.split("."):
        if not hasattr(obj, part):
            raise KeyError(path)
        obj = getattr(obj, part)
    return obj


def set_param(cfg: SimulationConfig, path: str, value: float) -> SimulationConfig:
    """Return a copy of cfg with one tunable changed; validates key + range."""
    if path not in TUNABLE_RANGES:
        raise KeyError(f"parameter {path!r} is not tunable")
    lo, hi = TUNABLE_RANGES[path]
    value = float(value)
    if not lo <= value <= hi:
        raise ValidationError(f"value {value} for {path!r} outside allowed range [{lo}, {hi}]")
    parts = path.split(".")
    if len(parts) == 1:
        return cfg.replace(**{parts[0]: value})
    section = getattr(cfg, parts[0])
    new_section = dataclasses.replace(section, **{parts[1]: value})
    return cfg.replace(**{parts[0]: new_section})


def config_to_flat(cfg: SimulationConfig) -> dict:
    """Flatten to dotted-key scalars (weights joined with commas)."""
    flat: dict = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                flat[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
        elif f.name == "region_weights_w":
            flat[f.name] = ", ".join(repr(float(w)) for w in value)
        else:
            flat[f.name] = value
    return flat


def config_to_text(cfg: SimulationConfig) -> str:
    out = io.StringIO()
    out.write(CONFIG_FORMAT_TAG + "\n")
    for key, value in config_to_flat(cfg).items():
        out.write(f"{key} = {value}\n")
    return out.getvalue()


def _parse_scalar(raw: str, target_type, key: str, line_no: int):
    raw = raw.strip()
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        if target_type is str:
            return raw
    except ValueError:
        pass
    raise ValidationError(f"line {line_no}: cannot parse {key} value {raw!r}")


def parse_flat_config(flat: dict) -> SimulationConfig:
    """Build a SimulationConfig from dotted-key scalars (already typed)."""
    kwargs: dict = {}
    section_kwargs: dict[str, dict] = {name: {} for name in _SECTIONS}
    section_types = {
        "graph": GraphConfig,
        "thresholds": RoleThresholds,
        "increments": IncrementTable,
        "death_toll": DeathTollParams,
        "init": InitParams,
        "balance": BalanceParams,
    }
    for key, value in flat.items():
        if "." in key:
            section, sub = key.split(".", 1)
            if section not in section_kwargs:
                raise ValidationError(f"unknown config section {section!r}")
            section_kwargs[section][sub] = value
        elif key == "region_weights_w":
            if isinstance(value, str):
                value = tuple(float(p) for p in value.split(","))
            kwargs[key] = tuple(float(v) for v in value)
        else:
            kwargs[key] = value
    for name, sub in section_kwargs.items():
        if sub:
            kwargs[name] = section_types[name](**sub)
    return SimulationConfig(**kwargs)


def config_from_text(text: str, source: str = "<config>") -> SimulationConfig:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CONFIG_FORMAT_TAG:
        raise ValidationError(f"{source}: line 1: missing format tag {CONFIG_FORMAT_TAG!r}")

    defaults = config_to_flat(SimulationConfig())
    flat: dict = {}
    for line_no, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"{source}: line {line_no}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in defaults:
            raise ValidationError(f"{source}: line {line_no}: unknown key {key!r}")
        if key == "region_weights_w":
            flat[key] = raw
        else:
            flat[key] = _parse_scalar(raw, type(defaults[key]), key, line_no)
    try:
        return parse_flat_config(flat)
    except (TypeError, ValidationError) as exc:
        raise ValidationError(f"{source}: {exc}") from exc
