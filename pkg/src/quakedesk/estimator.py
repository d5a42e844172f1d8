"""Resource-need estimation for an incoming quake warning.

Covers the medic staffing math, the analog-based casualty prediction,
and the full relief checklist (shelter, food, blankets, volunteers,
cost, building damage).  All functions here are pure.
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .geo import haversine_km
from .model import EarlyWarning, magnitude_band

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ReferenceDataset


class EstimatorError(ValueError):
    pass


class UnknownRegency(EstimatorError):
    def __init__(self, code: str):
        self.code = code
        super().__init__(f"unknown regency code: {code}")


class InvalidStandard(EstimatorError):
    pass


class EmptyCatalog(EstimatorError):
    pass


# ---------------------------------------------------------------------------
# medic staffing


def required_medics(affected_population: int, persons_per_medic: int) -> int:
    """Medics needed to cover the affected population.

    One medic serves up to persons_per_medic people, so the count is the
    ceiling of the quotient.  Zero affected means zero medics.
    """
    if persons_per_medic < 1:
        raise InvalidStandard(
            f"persons_per_medic must be >= 1, got {persons_per_medic}"
        )
    if affected_population < 0:
        raise EstimatorError("affected_population is negative")
    return (affected_population + persons_per_medic - 1) // persons_per_medic


def medic_shortage(medics_required: int, medics_available: int) -> int:
    """How many medics are missing locally; never negative."""
    if medics_available < 0:
        raise EstimatorError("medics_available is negative")
    if medics_required > medics_available:
        return medics_required - medics_available
    return 0


# ---------------------------------------------------------------------------
# affected area


@dataclass(frozen=True)
class AffectedArea:
    """Resolved population and local medic pool for a warning."""

    population: int
    medics_available: int
    regency_codes: tuple[str, ...]
    low_confidence: bool = False


def affected_area(warning: EarlyWarning, ref: "ReferenceDataset") -> AffectedArea:
    """Resolve the warning's affected regencies into population totals.

    When the feed names no regencies, falls back to every regency whose
    centroid lies within the band-specific radius of the epicenter and
    flags the result low-confidence.
    """
    codes = warning.event.affected_regencies
    low_confidence = False
    if not codes:
        band = magnitude_band(warning.event.magnitude, ref.bands)
        radius = ref.fallback_radius_km.get(band.label, 0.0)
        codes = tuple(
            r.code
            for r in ref.regencies
            if haversine_km(
                warning.event.latitude,
                warning.event.longitude,
                r.centroid_lat,
                r.centroid_lon,
            )
            <= radius
        )
        low_confidence = True

    population = 0
    medics = 0
    for code in codes:
        region = ref.regency_by_code.get(code)
        if region is None:
            raise UnknownRegency(code)
        population += region.population
        medics += region.medics_available
    return AffectedArea(
        population=population,
        medics_available=medics,
        regency_codes=tuple(codes),
        low_confidence=low_confidence,
    )


# ---------------------------------------------------------------------------
# analog casualty prediction


@dataclass(frozen=True)
class CasualtyPrediction:
    predicted_deaths: int
    predicted_injured: int
    death_rate: float
    injury_rate: float
    analogs_used: tuple[tuple[str, float], ...]  # (quake id, weight)

    def as_dict(self) -> dict:
        return {
            "predicted_deaths": self.predicted_deaths,
            "predicted_injured": self.predicted_injured,
            "death_rate": self.death_rate,
            "injury_rate": self.injury_rate,
            "analogs_used": [[qid, w] for qid, w in self.analogs_used],
        }


def _feature(magnitude: float, exposed: float) -> tuple[float, float]:
    return magnitude, math.log10(max(exposed, 1.0))


def _normalise(value: float, low: float, high: float) -> float:
    if high == low:
        return 0.0
    return (value - low) / (high - low)


def predict_casualties(
    warning: EarlyWarning,
    catalog,
    affected_population: int,
    k: int = 3,
    epsilon: float = 1e-6,
) -> CasualtyPrediction:
    """Predict deaths and injuries from the k most similar past quakes.

    Similarity is Euclidean distance in the (magnitude, log10 exposed
    population) plane, with both axes min-max normalised over the
    catalog.  Matches are weighted by inverse distance (epsilon guards
    the exact-hit case) and their casualty rates are blended into a
    rate applied to the affected population.  Distance ties are broken
    by earlier event date, then id.
    """
    catalog = list(catalog)
    if not catalog:
        raise EmptyCatalog("no historical quakes to match against")
    if k < 1:
        raise EstimatorError(f"k must be >= 1, got {k}")

    features = [_feature(q.event.magnitude, q.exposed_population) for q in catalog]
    mags = [f[0] for f in features]
    exps = [f[1] for f in features]
    lo_m, hi_m = min(mags), max(mags)
    lo_e, hi_e = min(exps), max(exps)

    qm, qe = _feature(warning.event.magnitude, affected_population)
    qm_n = _normalise(qm, lo_m, hi_m)
    qe_n = _normalise(qe, lo_e, hi_e)

    ranked = []
    for quake, (m, e) in zip(catalog, features):
        dm = _normalise(m, lo_m, hi_m) - qm_n
        de = _normalise(e, lo_e, hi_e) - qe_n
        distance = math.hypot(dm, de)
        ranked.append((distance, quake.event.date, quake.event.id, quake))
    ranked.sort(key=lambda item: (item[0], item[1], item[2]))

    chosen = ranked[: min(k, len(ranked))]
    raw_weights = [1.0 / (d + epsilon) for d, _, _, _ in chosen]
    total = sum(raw_weights)
    weights = [w / total for w in raw_weights]

    death_rate = sum(w * q.death_rate for w, (_, _, _, q) in zip(weights, chosen))
    injury_rate = sum(w * q.injury_rate for w, (_, _, _, q) in zip(weights, chosen))
    # each analog rate is within [0, 1] so the convex blend is too
    return CasualtyPrediction(
        predicted_deaths=int(round(death_rate * affected_population)),
        predicted_injured=int(round(injury_rate * affected_population)),
        death_rate=death_rate,
        injury_rate=injury_rate,
        analogs_used=tuple(
            (q.event.id, w) for w, (_, _, _, q) in zip(weights, chosen)
        ),
    )


# ---------------------------------------------------------------------------
# relief checklist


def _default_damage_rates() -> dict:
    return {
        "0.0–4.9": 0.0,
        "5.0–5.9": 0.05,
        "6.0–6.9": 0.12,
        "7.0–7.9": 0.25,
        "8.0+": 0.45,
    }


@dataclass(frozen=True)
class ResourceCoefficients:
    """Per-person and per-unit planning factors for the relief checklist."""

    rice_kg_per_person_day: float = 0.4
    ration_days: int = 7
    blankets_per_person: float = 1.0
    persons_per_tent: int = 5
    persons_per_shelter_site: int = 500
    persons_per_sanitation_unit: int = 50
    persons_per_kitchen: int = 250
    infant_fraction: float = 0.05
    baby_food_kg_per_infant_day: float = 0.2
    cost_per_affected_person: float = 150.0
    persons_per_volunteer_national: int = 100
    persons_per_volunteer_international: int = 1000
    persons_per_building: float = 4.0
    cost_per_building: float = 5000.0
    building_damage_rate_per_band: dict = field(default_factory=_default_damage_rates)
    extra_per_person: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in (
            "rice_kg_per_person_day",
            "blankets_per_person",
            "baby_food_kg_per_infant_day",
            "cost_per_affected_person",
            "persons_per_building",
            "cost_per_building",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} is negative")
        for name in (
            "ration_days",
            "persons_per_tent",
            "persons_per_shelter_site",
            "persons_per_sanitation_unit",
            "persons_per_kitchen",
            "persons_per_volunteer_national",
            "persons_per_volunteer_international",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.infant_fraction <= 1.0:
            raise ValueError("infant_fraction outside [0, 1]")
        for label, rate in self.building_damage_rate_per_band.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"damage rate for {label!r} outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "rice_kg_per_person_day": self.rice_kg_per_person_day,
            "ration_days": self.ration_days,
            "blankets_per_person": self.blankets_per_person,
            "persons_per_tent": self.persons_per_tent,
            "persons_per_shelter_site": self.persons_per_shelter_site,
            "persons_per_sanitation_unit": self.persons_per_sanitation_unit,
            "persons_per_kitchen": self.persons_per_kitchen,
            "infant_fraction": self.infant_fraction,
            "baby_food_kg_per_infant_day": self.baby_food_kg_per_infant_day,
            "cost_per_affected_person": self.cost_per_affected_person,
            "persons_per_volunteer_national": self.persons_per_volunteer_national,
            "persons_per_volunteer_international": self.persons_per_volunteer_international,
            "persons_per_building": self.persons_per_building,
            "cost_per_building": self.cost_per_building,
            "building_damage_rate_per_band": dict(self.building_damage_rate_per_band),
            "extra_per_person": dict(self.extra_per_person),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ResourceCoefficients":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown coefficient keys: {sorted(unknown)}")
        return cls(**raw)


def _per_unit(population: int, capacity: int) -> int:
    # capacity validated >= 1 at construction
    return (population + capacity - 1) // capacity


@dataclass(frozen=True)
class ResourceChecklist:
    """Quantified relief needs for one assessed warning."""

    medics_required: int
    medic_shortage: int
    medics_international: int
    volunteers_national: int
    volunteers_international: int
    tents: int
    shelter_sites: int
    sanitation_units: int
    kitchens: int
    rice_kg: float
    baby_food_kg: float
    blankets: float
    total_cost: float
    buildings_at_risk: int
    damage_cost: float
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "medics_required": self.medics_required,
            "medic_shortage": self.medic_shortage,
            "medics_international": self.medics_international,
            "volunteers_national": self.volunteers_national,
            "volunteers_international": self.volunteers_international,
            "tents": self.tents,
            "shelter_sites": self.shelter_sites,
            "sanitation_units": self.sanitation_units,
            "kitchens": self.kitchens,
            "rice_kg": self.rice_kg,
            "baby_food_kg": self.baby_food_kg,
            "blankets": self.blankets,
            "total_cost": self.total_cost,
            "buildings_at_risk": self.buildings_at_risk,
            "damage_cost": self.damage_cost,
            "extras": dict(self.extras),
        }
        return out


def resource_checklist(
    affected_population: int,
    band_label: str,
    coefficients: ResourceCoefficients,
    medics_required_count: int,
    medic_shortage_count: int,
    national_pledgeable_medics: int = 0,
) -> ResourceChecklist:
    """Derive the full relief checklist from the affected headcount.

    Unit counts (tents, sites, kitchens, volunteers) round up so no one
    is left uncovered; consumables stay fractional in kilograms.  The
    international medic projection is whatever the shortage exceeds the
    national pledgeable pool by.
    """
    if affected_population < 0:
        raise EstimatorError("affected_population is negative")
    c = coefficients
    w = affected_population
    # whole infants first, then rations: round(W x fraction) x kg/day x days
    infants = round(w * c.infant_fraction)
    damage_rate = c.building_damage_rate_per_band.get(band_label, 0.0)
    buildings = int(round(w / c.persons_per_building * damage_rate)) if c.persons_per_building > 0 else 0
    return ResourceChecklist(
        medics_required=medics_required_count,
        medic_shortage=medic_shortage_count,
        medics_international=max(0, medic_shortage_count - national_pledgeable_medics),
        volunteers_national=_per_unit(w, c.persons_per_volunteer_national),
        volunteers_international=_per_unit(w, c.persons_per_volunteer_international),
        tents=_per_unit(w, c.persons_per_tent),
        shelter_sites=_per_unit(w, c.persons_per_shelter_site),
        sanitation_units=_per_unit(w, c.persons_per_sanitation_unit),
        kitchens=_per_unit(w, c.persons_per_kitchen),
        rice_kg=w * c.rice_kg_per_person_day * c.ration_days,
        baby_food_kg=infants * c.baby_food_kg_per_infant_day * c.ration_days,
        blankets=w * c.blankets_per_person,
        total_cost=w * c.cost_per_affected_person,
        buildings_at_risk=buildings,
        damage_cost=buildings * c.cost_per_building,
        extras={
            name: w * per_person for name, per_person in sorted(c.extra_per_person.items())
        },
    )


# ---------------------------------------------------------------------------
# full assessment


@dataclass(frozen=True)
class Assessment:
    """Everything the response team needs to see for one warning."""

    warning_id: str
    affected_population: int
    persons_per_medic: int
    medics_available: int
    medics_required: int
    medic_shortage: int
    affected_regencies: tuple[str, ...]
    low_confidence: bool
    magnitude_band: str
    casualties: CasualtyPrediction
    checklist: ResourceChecklist

    def as_dict(self) -> dict:
        return {
            "warning_id": self.warning_id,
            "affected_population": self.affected_population,
            "persons_per_medic": self.persons_per_medic,
            "medics_available": self.medics_available,
            "medics_required": self.medics_required,
            "medic_shortage": self.medic_shortage,
            "affected_regencies": list(self.affected_regencies),
            "low_confidence": self.low_confidence,
            "magnitude_band": self.magnitude_band,
            "casualties": self.casualties.as_dict(),
            "checklist": self.checklist.as_dict(),
        }


def build_assessment(
    warning: EarlyWarning,
    ref: "ReferenceDataset",
    catalog,
    population_override: int | None = None,
) -> Assessment:
    """Run the whole estimation pipeline for one warning.

    population_override substitutes the affected headcount after area
    resolution; used by what-if exploration.
    """
    area = affected_area(warning, ref)
    population = area.population if population_override is None else population_override
    if population < 0:
        raise EstimatorError("affected_population is negative")
    medics_req = required_medics(population, ref.persons_per_medic)
    shortage = medic_shortage(medics_req, area.medics_available)
    casualties = predict_casualties(warning, catalog, population, k=ref.analog_k)
    band = magnitude_band(warning.event.magnitude, ref.bands)
    affected_set = set(area.regency_codes)
    national_pledgeable = sum(
        r.medics_pledgeable for r in ref.regencies if r.code not in affected_set
    )
    checklist = resource_checklist(
        population,
        band.label,
        ref.coefficients,
        medics_req,
        shortage,
        national_pledgeable,
    )
    return Assessment(
        warning_id=warning.id,
        affected_population=population,
        persons_per_medic=ref.persons_per_medic,
        medics_available=area.medics_available,
        medics_required=medics_req,
        medic_shortage=shortage,
        affected_regencies=area.regency_codes,
        low_confidence=area.low_confidence,
        magnitude_band=band.label,
        casualties=casualties,
        checklist=checklist,
    )
