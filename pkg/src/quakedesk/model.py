"""Core domain values: quake events, warnings, regions, magnitude bands.

Everything here is an immutable value object plus the validation that
turns untrusted feed records into those objects.  No I/O.
"""

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum

UTC = dt.timezone.utc

MISSING = "missing"
MALFORMED = "malformed"
OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True)
class Violation:
    """One field-level problem found while validating a record."""

    field: str
    kind: str  # MISSING, MALFORMED or OUT_OF_RANGE
    message: str = ""

    def describe(self) -> str:
        if self.message:
            return f"{self.field}: {self.kind} ({self.message})"
        return f"{self.field}: {self.kind}"


class ValidationError(ValueError):
    """Raised when a raw record fails validation; carries all violations."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(v.describe() for v in self.violations))


def parse_utc(value) -> dt.datetime:
    """Parse an ISO 8601 timestamp into an aware UTC datetime.

    Accepts a trailing 'Z' and naive timestamps (assumed UTC).
    """
    if isinstance(value, dt.datetime):
        stamp = value
    else:
        text = str(value).strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        stamp = dt.datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=UTC)
    return stamp.astimezone(UTC)


def iso_utc(stamp: dt.datetime) -> str:
    """Render an aware datetime as a compact UTC ISO string with 'Z'."""
    return stamp.astimezone(UTC).replace(tzinfo=None).isoformat() + "Z"


# ---------------------------------------------------------------------------
# magnitude bands


@dataclass(frozen=True)
class MagnitudeBand:
    """Half-open magnitude interval [lower, upper); upper None = unbounded."""

    label: str
    lower: float
    upper: float | None = None

    def contains(self, magnitude: float) -> bool:
        if magnitude < self.lower:
            return False
        return self.upper is None or magnitude < self.upper


DEFAULT_BANDS: tuple[MagnitudeBand, ...] = (
    MagnitudeBand("0.0–4.9", 0.0, 5.0),
    MagnitudeBand("5.0–5.9", 5.0, 6.0),
    MagnitudeBand("6.0–6.9", 6.0, 7.0),
    MagnitudeBand("7.0–7.9", 7.0, 8.0),
    MagnitudeBand("8.0+", 8.0, None),
)


def check_band_partition(bands) -> tuple[MagnitudeBand, ...]:
    """Verify bands partition [0, inf): contiguous, ordered, last unbounded."""
    bands = tuple(bands)
    if not bands:
        raise ValueError("at least one magnitude band is required")
    if bands[0].lower != 0.0:
        raise ValueError("first band must start at 0.0")
    for left, right in zip(bands, bands[1:]):
        if left.upper is None:
            raise ValueError(f"band {left.label!r} is unbounded but not last")
        if left.upper != right.lower:
            raise ValueError(
                f"gap or overlap between {left.label!r} and {right.label!r}"
            )
        if left.upper <= left.lower:
            raise ValueError(f"band {left.label!r} is empty")
    if bands[-1].upper is not None:
        raise ValueError("last band must be unbounded")
    if len({b.label for b in bands}) != len(bands):
        raise ValueError("band labels must be unique")
    return bands


def magnitude_band(magnitude: float, bands=DEFAULT_BANDS) -> MagnitudeBand:
    """Return the band containing the magnitude; exactly one always does."""
    if magnitude < 0:
        raise ValueError(f"magnitude {magnitude} is negative")
    for band in bands:
        if band.contains(magnitude):
            return band
    raise ValueError(f"no band contains magnitude {magnitude}")


# ---------------------------------------------------------------------------
# events and warnings


@dataclass(frozen=True)
class QuakeEvent:
    """A single earthquake observation or prediction."""

    id: str
    date: dt.date
    time: dt.time
    latitude: float
    longitude: float
    magnitude: float
    depth_km: float = 0.0
    epicenter_desc: str = ""
    affected_regencies: tuple[str, ...] = ()

    @property
    def occurred_at(self) -> dt.datetime:
        return dt.datetime.combine(self.date, self.time, tzinfo=UTC)


@dataclass(frozen=True)
class EarlyWarning:
    """A predicted quake as broadcast by the monitoring agency."""

    event: QuakeEvent
    issued_at: dt.datetime
    source: str = "feed"
    risk_note: str = ""

    @property
    def id(self) -> str:
        return self.event.id


def _parse_float(raw, name, violations, low=None, high=None):
    value = raw.get(name)
    if value is None or (isinstance(value, str) and not value.strip()):
        violations.append(Violation(name, MISSING))
        return None
    try:
        number = float(value)
    except (TypeError, ValueError):
        violations.append(Violation(name, MALFORMED, f"not a number: {value!r}"))
        return None
    if number != number:  # NaN
        violations.append(Violation(name, MALFORMED, "not a number"))
        return None
    if low is not None and number < low or high is not None and number > high:
        violations.append(
            Violation(name, OUT_OF_RANGE, f"{number} outside [{low}, {high}]")
        )
        return None
    return number


def _parse_codes(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    return tuple(p.strip() for p in parts if str(p).strip())


def validate_quake_event(raw: dict) -> QuakeEvent:
    """Build a QuakeEvent from a raw mapping, raising ValidationError.

    All problems are gathered before raising so a caller can report the
    full list instead of the first failure.
    """
    violations: list[Violation] = []

    ident = raw.get("id")
    if ident is None or not str(ident).strip():
        violations.append(Violation("id", MISSING))
        ident = ""
    ident = str(ident).strip()

    date = time = None
    raw_date = raw.get("date")
    if raw_date is None or not str(raw_date).strip():
        violations.append(Violation("date", MISSING))
    else:
        try:
            date = dt.date.fromisoformat(str(raw_date).strip())
        except ValueError:
            violations.append(Violation("date", MALFORMED, str(raw_date)))

    raw_time = raw.get("time")
    if raw_time is None or not str(raw_time).strip():
        violations.append(Violation("time", MISSING))
    else:
        try:
            time = dt.time.fromisoformat(str(raw_time).strip())
        except ValueError:
            violations.append(Violation("time", MALFORMED, str(raw_time)))

    latitude = _parse_float(raw, "latitude", violations, -90.0, 90.0)
    longitude = _parse_float(raw, "longitude", violations, -180.0, 180.0)
    magnitude = _parse_float(raw, "magnitude", violations, 0.0, 10.0)
    depth = raw.get("depth_km")
    depth_km = 0.0
    if depth is not None and str(depth).strip():
        parsed = _parse_float(raw, "depth_km", violations, 0.0, None)
        depth_km = parsed if parsed is not None else 0.0

    if violations:
        raise ValidationError(violations)

    return QuakeEvent(
        id=ident,
        date=date,
        time=time,
        latitude=latitude,
        longitude=longitude,
        magnitude=magnitude,
        depth_km=depth_km,
        epicenter_desc=str(raw.get("epicenter_desc", "") or ""),
        affected_regencies=_parse_codes(raw.get("affected_regencies")),
    )


def validate_warning(raw: dict) -> EarlyWarning:
    """Build an EarlyWarning from a raw feed record."""
    violations: list[Violation] = []
    issued_at = None
    raw_issued = raw.get("issued_at")
    if raw_issued is None or not str(raw_issued).strip():
        violations.append(Violation("issued_at", MISSING))
    else:
        try:
            issued_at = parse_utc(raw_issued)
        except ValueError:
            violations.append(Violation("issued_at", MALFORMED, str(raw_issued)))

    try:
        event = validate_quake_event(raw)
    except ValidationError as exc:
        violations.extend(exc.violations)
        raise ValidationError(violations) from None
    if violations:
        raise ValidationError(violations)
    return EarlyWarning(
        event=event,
        issued_at=issued_at,
        source=str(raw.get("source", "feed") or "feed"),
        risk_note=str(raw.get("risk_note", "") or ""),
    )


def warning_record(warning: EarlyWarning) -> dict:
    """Flatten a warning back into its feed-record shape."""
    ev = warning.event
    return {
        "id": ev.id,
        "source": warning.source,
        "issued_at": iso_utc(warning.issued_at),
        "date": ev.date.isoformat(),
        "time": ev.time.isoformat(),
        "latitude": ev.latitude,
        "longitude": ev.longitude,
        "magnitude": ev.magnitude,
        "depth_km": ev.depth_km,
        "epicenter_desc": ev.epicenter_desc,
        "affected_regencies": ",".join(ev.affected_regencies),
        "risk_note": warning.risk_note,
    }


# ---------------------------------------------------------------------------
# regions and history


class RegionKind(str, Enum):
    PROVINCE = "province"
    REGENCY = "regency"


@dataclass(frozen=True)
class Region:
    """A province or regency with its medical capacity numbers."""

    code: str
    name: str
    kind: RegionKind
    centroid_lat: float
    centroid_lon: float
    parent_code: str = ""
    population: int = 0
    medics_available: int = 0
    medics_pledgeable: int = 0

    def __post_init__(self):
        if not self.code:
            raise ValueError("region code must be non-empty")
        if self.population < 0:
            raise ValueError(f"{self.code}: population is negative")
        if self.medics_available < 0:
            raise ValueError(f"{self.code}: medics_available is negative")
        if self.kind is RegionKind.REGENCY and self.medics_available > self.population:
            raise ValueError(f"{self.code}: medics_available exceeds population")
        if not 0 <= self.medics_pledgeable <= self.medics_available:
            raise ValueError(
                f"{self.code}: medics_pledgeable outside [0, medics_available]"
            )
        if not -90.0 <= self.centroid_lat <= 90.0:
            raise ValueError(f"{self.code}: centroid latitude out of range")
        if not -180.0 <= self.centroid_lon <= 180.0:
            raise ValueError(f"{self.code}: centroid longitude out of range")


@dataclass(frozen=True)
class HistoricalQuake:
    """A past quake with observed casualty and damage outcomes."""

    event: QuakeEvent
    deaths: int
    injured: int
    buildings_destroyed: int
    exposed_population: int

    def __post_init__(self):
        if self.exposed_population < 1:
            raise ValueError(f"{self.event.id}: exposed_population must be >= 1")
        for name in ("deaths", "injured", "buildings_destroyed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{self.event.id}: {name} is negative")
        if self.deaths + self.injured > self.exposed_population:
            raise ValueError(
                f"{self.event.id}: casualties exceed exposed population"
            )

    @property
    def death_rate(self) -> float:
        return self.deaths / self.exposed_population

    @property
    def injury_rate(self) -> float:
        return self.injured / self.exposed_population
