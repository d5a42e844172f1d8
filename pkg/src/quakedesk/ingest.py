"""Loading and saving of feeds, reference data and the quake catalog.

Feed parsing never aborts on a bad line: every input line is either an
accepted record or a reported error, so counts always reconcile.
"""

import csv
import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .estimator import ResourceCoefficients
from .model import (
    DEFAULT_BANDS,
    EarlyWarning,
    HistoricalQuake,
    MagnitudeBand,
    Region,
    RegionKind,
    ValidationError,
    check_band_partition,
    iso_utc,
    parse_utc,
    validate_quake_event,
    validate_warning,
)

log = logging.getLogger(__name__)

PROVINCE_HEADER = ["code", "name", "centroid_lat", "centroid_lon"]
REGENCY_HEADER = [
    "code",
    "province_code",
    "name",
    "population",
    "medics_available",
    "medics_pledgeable",
    "centroid_lat",
    "centroid_lon",
]
CATALOG_HEADER = [
    "id",
    "date",
    "time",
    "latitude",
    "longitude",
    "magnitude",
    "region_label",
    "deaths",
    "injured",
    "buildings_destroyed",
    "exposed_population",
]


class IngestError(ValueError):
    pass


class BadHeader(IngestError):
    def __init__(self, path, expected, got):
        super().__init__(f"{path}: expected header {expected}, got {got}")


class DuplicateCode(IngestError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"duplicate region code: {code}")


class OrphanRegency(IngestError):
    def __init__(self, code, province_code):
        self.code = code
        super().__init__(f"regency {code} references unknown province {province_code}")


@dataclass(frozen=True)
class LineError:
    """One rejected input line with a human-readable reason."""

    line: int  # 1-based
    reason: str


# ---------------------------------------------------------------------------
# warning feed


def parse_warning_feed(lines) -> tuple[list[EarlyWarning], list[LineError]]:
    """Parse a line-delimited warning feed.

    Accepts an iterable of lines or a single string.  Blank lines are
    ignored; every other line becomes exactly one warning or one error,
    so len(warnings) + len(errors) equals the non-blank line count.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    warnings: list[EarlyWarning] = []
    errors: list[LineError] = []
    for number, raw_line in enumerate(lines, start=1):
        text = raw_line.strip()
        if not text:
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            errors.append(LineError(number, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(record, dict):
            errors.append(LineError(number, "record is not an object"))
            continue
        try:
            warnings.append(validate_warning(record))
        except ValidationError as exc:
            errors.append(LineError(number, str(exc)))
    return warnings, errors


# ---------------------------------------------------------------------------
# reference data


@dataclass
class ReferenceDataset:
    """Regions plus the planning configuration the estimator consumes."""

    provinces: list[Region] = field(default_factory=list)
    regencies: list[Region] = field(default_factory=list)
    persons_per_medic: int = 500
    coefficients: ResourceCoefficients = field(default_factory=ResourceCoefficients)
    bands: tuple[MagnitudeBand, ...] = DEFAULT_BANDS
    analog_k: int = 3
    sla_minutes: int = 60
    fallback_radius_km: dict = field(default_factory=dict)
    province_by_code: dict = field(default_factory=dict, compare=False, repr=False)
    regency_by_code: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.persons_per_medic < 1:
            raise ValueError("persons_per_medic must be >= 1")
        if self.analog_k < 1:
            raise ValueError("analog_k must be >= 1")
        if self.sla_minutes < 1:
            raise ValueError("sla_minutes must be >= 1")
        self.bands = check_band_partition(self.bands)
        self.reindex()

    def reindex(self):
        self.province_by_code = {p.code: p for p in self.provinces}
        self.regency_by_code = {r.code: r for r in self.regencies}

    def region_by_code(self, code: str) -> Region | None:
        return self.regency_by_code.get(code) or self.province_by_code.get(code)

    def all_regions(self) -> list[Region]:
        return list(self.provinces) + list(self.regencies)


def _read_csv(path: Path, expected_header: list[str]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise BadHeader(path, expected_header, []) from None
        if [h.strip() for h in header] != expected_header:
            raise BadHeader(path, expected_header, header)
        return [dict(zip(expected_header, row)) for row in reader if any(row)]


def load_reference_data(
    province_path, regency_path, config_path=None
) -> ReferenceDataset:
    """Load provinces, regencies and (optionally) the planning config.

    Raises DuplicateCode when any code repeats across both files and
    OrphanRegency when a regency points at a missing province.
    """
    seen: set[str] = set()

    provinces: list[Region] = []
    for row in _read_csv(Path(province_path), PROVINCE_HEADER):
        code = row["code"].strip()
        if code in seen:
            raise DuplicateCode(code)
        seen.add(code)
        provinces.append(
            Region(
                code=code,
                name=row["name"].strip(),
                kind=RegionKind.PROVINCE,
                centroid_lat=float(row["centroid_lat"]),
                centroid_lon=float(row["centroid_lon"]),
            )
        )
    province_codes = {p.code for p in provinces}

    regencies: list[Region] = []
    for row in _read_csv(Path(regency_path), REGENCY_HEADER):
        code = row["code"].strip()
        if code in seen:
            raise DuplicateCode(code)
        seen.add(code)
        parent = row["province_code"].strip()
        if parent not in province_codes:
            raise OrphanRegency(code, parent)
        regencies.append(
            Region(
                code=code,
                name=row["name"].strip(),
                kind=RegionKind.REGENCY,
                parent_code=parent,
                population=int(row["population"]),
                medics_available=int(row["medics_available"]),
                medics_pledgeable=int(row["medics_pledgeable"]),
                centroid_lat=float(row["centroid_lat"]),
                centroid_lon=float(row["centroid_lon"]),
            )
        )

    config = {}
    if config_path is not None:
        with open(config_path, encoding="utf-8") as fh:
            config = json.load(fh)
    return dataset_from_config(provinces, regencies, config)


def dataset_from_config(provinces, regencies, config: dict) -> ReferenceDataset:
    """Assemble a dataset from region lists and a parsed config mapping."""
    bands = DEFAULT_BANDS
    if "magnitude_bands" in config:
        bands = tuple(
            MagnitudeBand(label, float(lower), None if upper is None else float(upper))
            for label, lower, upper in config["magnitude_bands"]
        )
    coefficients = ResourceCoefficients.from_dict(config.get("coefficients", {}))
    # "sn" accepted as a legacy alias for the national persons-per-medic standard
    standard = config.get("persons_per_medic", config.get("sn", 500))
    return ReferenceDataset(
        provinces=list(provinces),
        regencies=list(regencies),
        persons_per_medic=int(standard),
        coefficients=coefficients,
        bands=bands,
        analog_k=int(config.get("analog_k", 3)),
        sla_minutes=int(config.get("sla_minutes", 60)),
        fallback_radius_km={
            str(k): float(v) for k, v in config.get("fallback_radius_km", {}).items()
        },
    )


def config_to_dict(ref: ReferenceDataset) -> dict:
    return {
        "persons_per_medic": ref.persons_per_medic,
        "analog_k": ref.analog_k,
        "sla_minutes": ref.sla_minutes,
        "coefficients": ref.coefficients.as_dict(),
        "magnitude_bands": [[b.label, b.lower, b.upper] for b in ref.bands],
        "fallback_radius_km": dict(ref.fallback_radius_km),
    }


def save_reference_data(ref: ReferenceDataset, province_path, regency_path, config_path):
    """Write the dataset back out; inverse of load_reference_data."""
    with open(province_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROVINCE_HEADER)
        for p in ref.provinces:
            writer.writerow([p.code, p.name, p.centroid_lat, p.centroid_lon])
    with open(regency_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGENCY_HEADER)
        for r in ref.regencies:
            writer.writerow(
                [
                    r.code,
                    r.parent_code,
                    r.name,
                    r.population,
                    r.medics_available,
                    r.medics_pledgeable,
                    r.centroid_lat,
                    r.centroid_lon,
                ]
            )
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(ref), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# historical catalog


def load_historical_catalog(path) -> tuple[list[HistoricalQuake], list[LineError]]:
    """Load the quake catalog CSV with per-row diagnostics.

    Row numbers in errors are 1-based over data rows (the header is
    row 0 and must match exactly or BadHeader is raised).
    """
    quakes: list[HistoricalQuake] = []
    errors: list[LineError] = []
    for number, row in enumerate(_read_csv(Path(path), CATALOG_HEADER), start=1):
        try:
            event = validate_quake_event(
                {
                    "id": row["id"],
                    "date": row["date"],
                    "time": row["time"],
                    "latitude": row["latitude"],
                    "longitude": row["longitude"],
                    "magnitude": row["magnitude"],
                    "epicenter_desc": row["region_label"],
                }
            )
            quakes.append(
                HistoricalQuake(
                    event=event,
                    deaths=int(row["deaths"]),
                    injured=int(row["injured"]),
                    buildings_destroyed=int(row["buildings_destroyed"]),
                    exposed_population=int(row["exposed_population"]),
                )
            )
        except (ValidationError, ValueError) as exc:
            errors.append(LineError(number, str(exc)))
    return quakes, errors


def save_historical_catalog(quakes, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CATALOG_HEADER)
        for q in quakes:
            ev = q.event
            writer.writerow(
                [
                    ev.id,
                    ev.date.isoformat(),
                    ev.time.isoformat(),
                    ev.latitude,
                    ev.longitude,
                    ev.magnitude,
                    ev.epicenter_desc,
                    q.deaths,
                    q.injured,
                    q.buildings_destroyed,
                    q.exposed_population,
                ]
            )


def seed_data_dir() -> Path:
    """Directory holding the packaged example reference data and catalog."""
    return Path(__file__).resolve().parent / "data"


def load_seed_dataset() -> tuple[ReferenceDataset, list[HistoricalQuake]]:
    """Load the packaged regions, config and historical catalog."""
    root = seed_data_dir()
    ref = load_reference_data(
        root / "provinces.csv", root / "regencies.csv", root / "config.json"
    )
    catalog, errors = load_historical_catalog(root / "historical_quakes.csv")
    if errors:  # packaged data must always be clean
        raise IngestError(f"seed catalog rejected rows: {errors}")
    return ref, catalog


# ---------------------------------------------------------------------------
# extraction watermarks

EPOCH = dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)


@dataclass(frozen=True)
class SourceWatermark:
    """High-water mark of row timestamps already pulled from one source."""

    source_id: str
    last_extracted_at: dt.datetime = EPOCH

    def advanced_to(self, stamp: dt.datetime) -> "SourceWatermark":
        # monotone: a watermark never moves backwards
        if stamp <= self.last_extracted_at:
            return self
        return SourceWatermark(self.source_id, stamp)

    def as_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "last_extracted_at": iso_utc(self.last_extracted_at),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SourceWatermark":
        return cls(raw["source_id"], parse_utc(raw["last_extracted_at"]))
