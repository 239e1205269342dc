"""Region demographics and recorded-incident datasets.

Two file formats, both versioned with a leading tag line:

* Region file (``#socsynth-region v1``): ``key = value`` lines whose keys
  exactly match the RegionIndicators field names; ``education`` is four
  comma-separated fractions that must sum to one.
* Incident file (``#socsynth-incidents v1``): comma-delimited with header
  ``year,deaths,weapon`` (``weapon`` optional, codes 1..6).

Rejections are machine-readable: they name the field, the line and the
violated constraint.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .roles import ValidationError

REGION_FORMAT_TAG = "#socsynth-region v1"
INCIDENT_FORMAT_TAG = "#socsynth-incidents v1"

# Education levels: none, primary, secondary, tertiary mapped onto [0, 1].
EDUCATION_LEVELS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)


@dataclass(frozen=True)
class RegionIndicators:
    """Demographic fractions that seed the constant traits of a region."""

    name: str
    married_fraction: float
    education: tuple  # (e1, e2, e3, e4): none/primary/secondary/tertiary
    wealth_rate: float
    religiosity_mean: float
    religiosity_sd: float
    crime_density_mean: float
    crime_density_sd: float

    def __post_init__(self):
        if not 0.0 <= self.married_fraction <= 1.0:
            raise ValidationError("married_fraction must lie in [0, 1]")
        if len(self.education) != 4:
            raise ValidationError("education must have 4 components")
        for i, e in enumerate(self.education, start=1):
            if not 0.0 <= e <= 1.0:
                raise ValidationError(f"education e{i} must lie in [0, 1]")
        total = sum(self.education)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"education fractions must sum to 1, got {total!r}")
        if not self.wealth_rate > 0.0:
            raise ValidationError("wealth_rate must be > 0")
        if not 0.0 <= self.religiosity_mean <= 1.0:
            raise ValidationError("religiosity_mean must lie in [0, 1]")
        if self.religiosity_sd < 0.0:
            raise ValidationError("religiosity_sd must be >= 0")
        if not 0.0 <= self.crime_density_mean <= 1.0:
            raise ValidationError("crime_density_mean must lie in [0, 1]")
        if self.crime_density_sd < 0.0:
            raise ValidationError("crime_density_sd must be >= 0")

    @property
    def expected_education(self) -> float:
        return sum(e * lvl for e, lvl in zip(self.education, EDUCATION_LEVELS))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["education"] = list(self.education)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RegionIndicators":
        d = dict(d)
        d["education"] = tuple(float(e) for e in d["education"])
        return cls(**d)


_REGION_FLOAT_KEYS = (
    "married_fraction",
    "wealth_rate",
    "religiosity_mean",
    "religiosity_sd",
    "crime_density_mean",
    "crime_density_sd",
)


def region_to_text(region: RegionIndicators) -> str:
    lines = [REGION_FORMAT_TAG, f"name = {region.name}"]
    lines.append("education = " + ", ".join(repr(e) for e in region.education))
    for key in _REGION_FLOAT_KEYS:
        lines.append(f"{key} = {getattr(region, key)!r}")
    return "\n".join(lines) + "\n"


def region_from_text(text: str, source: str = "<region>") -> RegionIndicators:
    lines = text.splitlines()
    if not lines or lines[0].strip() != REGION_FORMAT_TAG:
        raise ValidationError(f"{source}: line 1: missing format tag {REGION_FORMAT_TAG!r}")

    fields: dict = {}
    line_of: dict = {}
    for line_no, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"{source}: line {line_no}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        line_of[key] = line_no
        if key == "name":
            fields[key] = raw
        elif key == "education":
            parts = [p.strip() for p in raw.split(",")]
            if len(parts) != 4:
                raise ValidationError(
                    f"{source}: line {line_no}: education needs 4 comma-separated fractions"
                )
            try:
                fields[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise ValidationError(f"{source}: line {line_no}: education values must be numbers")
        elif key in _REGION_FLOAT_KEYS:
            try:
                fields[key] = float(raw)
            except ValueError:
                raise ValidationError(f"{source}: line {line_no}: {key} must be a number")
        else:
            raise ValidationError(f"{source}: line {line_no}: unknown key {key!r}")

    required = ("name", "education") + _REGION_FLOAT_KEYS
    for key in required:
        if key not in fields:
            raise ValidationError(f"{source}: missing field {key!r}")

    # Tolerate tiny float drift in the education sum; reject real violations.
    e = fields["education"]
    drift = abs(sum(e) - 1.0)
    if drift > 1e-6:
        raise ValidationError(
            f"{source}: line {line_of['education']}: education fractions sum to {sum(e)!r}, not 1"
        )
    if drift > 0.0:
        total = sum(e)
        fields["education"] = tuple(v / total for v in e)

    try:
        return RegionIndicators(**fields)
    except ValidationError as exc:
        offending = str(exc).split()[0]
        line_no = line_of.get(offending, "?")
        raise ValidationError(f"{source}: line {line_no}: {exc}") from exc


def load_region(path) -> RegionIndicators:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"region file not found: {path}")
    return region_from_text(path.read_text(), source=str(path))


@dataclass(frozen=True)
class Incident:
    year: int
    deaths: int
    weapon: int | None = None


@dataclass(frozen=True)
class IncidentDataset:
    incidents: tuple

    def __len__(self):
        return len(self.incidents)

    @property
    def deaths(self) -> list:
        return [it.deaths for it in self.incidents]


def incidents_from_text(text: str, source: str = "<incidents>") -> IncidentDataset:
    lines = text.splitlines()
    if not lines or lines[0].strip() != INCIDENT_FORMAT_TAG:
        raise ValidationError(f"{source}: line 1: missing format tag {INCIDENT_FORMAT_TAG!r}")
    if len(lines) < 2:
        raise ValidationError(f"{source}: line 2: missing header row")
    header = [h.strip() for h in lines[1].split(",")]
    if header not in (["year", "deaths", "weapon"], ["year", "deaths"]):
        raise ValidationError(f"{source}: line 2: header must be 'year,deaths[,weapon]'")
    has_weapon = len(header) == 3

    incidents = []
    for line_no, line in enumerate(lines[2:], start=3):
        stripped = line.strip()
        if not stripped:
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != len(header):
            raise ValidationError(f"{source}: line {line_no}: expected {len(header)} columns")
        try:
            year = int(parts[0])
        except ValueError:
            raise ValidationError(f"{source}: line {line_no}: year must be an integer")
        try:
            deaths = int(parts[1])
        except ValueError:
            raise ValidationError(f"{source}: line {line_no}: deaths must be an integer")
        if deaths < 0:
            raise ValidationError(f"{source}: line {line_no}: deaths must be >= 0")
        weapon = None
        if has_weapon and parts[2] != "":
            try:
                weapon = int(parts[2])
            except ValueError:
                raise ValidationError(f"{source}: line {line_no}: weapon must be an integer code")
            if not 1 <= weapon <= 6:
                raise ValidationError(f"{source}: line {line_no}: weapon code must lie in 1..6")
        incidents.append(Incident(year=year, deaths=deaths, weapon=weapon))
    return IncidentDataset(incidents=tuple(incidents))


def load_incidents(path) -> IncidentDataset:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"incident file not found: {path}")
    return incidents_from_text(path.read_text(), source=str(path))


def incidents_to_text(dataset: IncidentDataset) -> str:
    lines = [INCIDENT_FORMAT_TAG, "year,deaths,weapon"]
    for it in dataset.incidents:
        weapon = "" if it.weapon is None else str(it.weapon)
        lines.append(f"{it.year},{it.deaths},{weapon}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ComparisonReport:
    """Distribution distance between a synthetic toll sample and a recorded one."""

    synthetic: "SummaryStats"
    recorded: "SummaryStats"
    mean_delta: float
    variance_delta: float
    zero_fraction_delta: float
    kl_synthetic_vs_recorded: float
    kl_recorded_vs_synthetic: float
    gamma_shape_delta: float | None
    gamma_scale_delta: float | None

    def to_dict(self) -> dict:
        return {
            "synthetic": dataclasses.asdict(self.synthetic),
            "recorded": dataclasses.asdict(self.recorded),
            "mean_delta": self.mean_delta,
            "variance_delta": self.variance_delta,
            "zero_fraction_delta": self.zero_fraction_delta,
            "kl_synthetic_vs_recorded": self.kl_synthetic_vs_recorded,
            "kl_recorded_vs_synthetic": self.kl_recorded_vs_synthetic,
            "gamma_shape_delta": self.gamma_shape_delta,
            "gamma_scale_delta": self.gamma_scale_delta,
        }

    def to_text(self) -> str:
        rows = [
            ("samples", self.synthetic.count, self.recorded.count),
            ("mean", self.synthetic.mean, self.recorded.mean),
            ("variance", self.synthetic.variance, self.recorded.variance),
            ("median", self.synthetic.median, self.recorded.median),
            ("max", self.synthetic.max, self.recorded.max),
            ("zero_fraction", self.synthetic.zero_fraction, self.recorded.zero_fraction),
        ]
        lines = ["#socsynth-comparison v1", f"{'':<16}{'synthetic':>14}{'recorded':>14}"]
        for label, syn, rec in rows:
            lines.append(f"{label:<16}{syn:>14.4f}{rec:>14.4f}")
        lines.append(f"mean_delta = {self.mean_delta!r}")
        lines.append(f"variance_delta = {self.variance_delta!r}")
        lines.append(f"zero_fraction_delta = {self.zero_fraction_delta!r}")
        lines.append(f"kl_synthetic_vs_recorded = {self.kl_synthetic_vs_recorded!r}")
        lines.append(f"kl_recorded_vs_synthetic = {self.kl_recorded_vs_synthetic!r}")
        if self.gamma_shape_delta is not None:
            lines.append(f"gamma_shape_delta = {self.gamma_shape_delta!r}")
            lines.append(f"gamma_scale_delta = {self.gamma_scale_delta!r}")
        return "\n".join(lines) + "\n"


def compare(synthetic_deaths, recorded_deaths, bins: int = 30, epsilon: float = 1e-9) -> ComparisonReport:
    """Compare two death-toll samples on shared binning.

    Histograms use uniform bins over the combined range so the KL terms are
    well defined in both directions; gamma fits are over the positive tolls
    only and are omitted when either side lacks enough spread.
    """
    from . import stats as _stats

    if len(synthetic_deaths) == 0 or len(recorded_deaths) == 0:
        raise ValidationError("compare needs non-empty samples on both sides")

    syn = _stats.summarize(synthetic_deaths)
    rec = _stats.summarize(recorded_deaths)

    hi = float(max(max(synthetic_deaths), max(recorded_deaths)))
    edges = _stats.uniform_edges(0.0, hi if hi > 0 else 1.0, bins)
    h_syn = _stats.histogram(synthetic_deaths, edges)
    h_rec = _stats.histogram(recorded_deaths, edges)

    def _gamma_or_none(sample):
        positive = [x for x in sample if x > 0]
        if len(positive) < 2:
            return None
        try:
            return _stats.fit_gamma_moments(positive)
        except ValidationError:
            return None

    g_syn = _gamma_or_none(synthetic_deaths)
    g_rec = _gamma_or_none(recorded_deaths)
    shape_delta = scale_delta = None
    if g_syn is not None and g_rec is not None:
        shape_delta = g_syn.shape - g_rec.shape
        scale_delta = g_syn.scale - g_rec.scale

    return ComparisonReport(
        synthetic=syn,
        recorded=rec,
        mean_delta=syn.mean - rec.mean,
        variance_delta=syn.variance - rec.variance,
        zero_fraction_delta=syn.zero_fraction - rec.zero_fraction,
        kl_synthetic_vs_recorded=_stats.kl_divergence(h_syn, h_rec, epsilon),
        kl_recorded_vs_synthetic=_stats.kl_divergence(h_rec, h_syn, epsilon),
        gamma_shape_delta=shape_delta,
        gamma_scale_delta=scale_delta,
    )
