"""Analytical store for quake history: deferred ETL plus cube queries.

The store keeps additive casualty measures at the finest grain (one row
per quake per affected regency).  Dimensions form small hierarchies:

    time       year > month > day
    geography  province > regency
    magnitude  band

Extraction is watermark-based: only source rows modified strictly after
the stored mark are pulled, so re-running a load is a no-op.  Queries
build an in-memory hypercube and then roll up, drill down, slice or
dice it; every operation conserves the additive totals.
"""

import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field

from .ingest import EPOCH, SourceWatermark
from .model import DEFAULT_BANDS, iso_utc, magnitude_band, parse_utc

DIMENSIONS = {
    "time": ("year", "month", "day"),
    "geography": ("province", "regency"),
    "magnitude": ("band",),
}

MEASURE_NAMES = ("deaths", "injured", "buildings_destroyed", "event_count")


@dataclass(frozen=True)
class DimensionHierarchy:
    name: str
    levels: tuple[str, ...]  # coarsest first


HIERARCHIES = tuple(DimensionHierarchy(n, l) for n, l in DIMENSIONS.items())


class WarehouseError(ValueError):
    pass


class UnknownDimension(WarehouseError):
    pass


class UnknownLevel(WarehouseError):
    pass


class UnknownMember(WarehouseError):
    pass


class ConflictingDimension(WarehouseError):
    pass


class AlreadyCoarsest(WarehouseError):
    pass


class AlreadyFinest(WarehouseError):
    pass


class BadBatch(WarehouseError):
    """A load batch failed validation; nothing was applied."""

    def __init__(self, reasons):
        self.reasons = tuple(reasons)
        super().__init__("; ".join(self.reasons))


# ---------------------------------------------------------------------------
# rows


@dataclass(frozen=True)
class Measures:
    deaths: int = 0
    injured: int = 0
    buildings_destroyed: int = 0
    event_count: int = 0

    def __add__(self, other: "Measures") -> "Measures":
        return Measures(
            self.deaths + other.deaths,
            self.injured + other.injured,
            self.buildings_destroyed + other.buildings_destroyed,
            self.event_count + other.event_count,
        )

    def as_dict(self) -> dict:
        return {
            "deaths": self.deaths,
            "injured": self.injured,
            "buildings_destroyed": self.buildings_destroyed,
            "event_count": self.event_count,
        }


@dataclass(frozen=True)
class FactRow:
    """Finest-grain fact: one quake's impact on one regency."""

    quake_id: str
    date: dt.date
    regency_code: str
    band_label: str
    deaths: int
    injured: int
    buildings_destroyed: int
    event_count: int = 1

    def key(self) -> tuple[str, str]:
        return (self.quake_id, self.regency_code)

    def measures(self) -> Measures:
        return Measures(
            self.deaths, self.injured, self.buildings_destroyed, self.event_count
        )


@dataclass(frozen=True)
class DimensionUpsert:
    """Registers (or renames) a regency under its province."""

    regency_code: str
    province_code: str
    regency_name: str = ""
    province_name: str = ""


@dataclass(frozen=True)
class SourceRow:
    modified_at: dt.datetime
    payload: object  # FactRow or DimensionUpsert


@dataclass
class TimestampedSource:
    """An upstream table whose rows carry modification timestamps."""

    source_id: str
    rows: list = field(default_factory=list)


@dataclass(frozen=True)
class ExtractionBatch:
    source_id: str
    rows: tuple  # SourceRow, source order preserved
    max_timestamp: dt.datetime


@dataclass(frozen=True)
class LoadStats:
    inserted: int = 0
    updated: int = 0
    dimensions: int = 0


# ---------------------------------------------------------------------------
# store


class WarehouseStore:
    """Facts, the geography mapping and per-source watermarks."""

    def __init__(self, band_labels=None):
        self.facts: dict[tuple[str, str], FactRow] = {}
        self.geo_parent: dict[str, str] = {}
        self.region_names: dict[str, str] = {}
        self.band_labels: tuple[str, ...] = tuple(
            band_labels if band_labels is not None else (b.label for b in DEFAULT_BANDS)
        )
        self.watermarks: dict[str, dt.datetime] = {}

    def watermark_for(self, source_id: str) -> SourceWatermark:
        return SourceWatermark(source_id, self.watermarks.get(source_id, EPOCH))

    def register_regency(self, up: DimensionUpsert):
        self.geo_parent[up.regency_code] = up.province_code
        if up.regency_name:
            self.region_names[up.regency_code] = up.regency_name
        if up.province_name:
            self.region_names[up.province_code] = up.province_name

    def fact_rows(self) -> list[FactRow]:
        return [self.facts[k] for k in sorted(self.facts)]

    def content_hash(self) -> str:
        """Deterministic digest of everything queryable in the store."""
        doc = {
            "facts": [
                {
                    "quake_id": f.quake_id,
                    "date": f.date.isoformat(),
                    "regency_code": f.regency_code,
                    "band_label": f.band_label,
                    "deaths": f.deaths,
                    "injured": f.injured,
                    "buildings_destroyed": f.buildings_destroyed,
                    "event_count": f.event_count,
                }
                for f in self.fact_rows()
            ],
            "geo_parent": dict(sorted(self.geo_parent.items())),
            "region_names": dict(sorted(self.region_names.items())),
            "band_labels": list(self.band_labels),
            "watermarks": {
                s: iso_utc(ts) for s, ts in sorted(self.watermarks.items())
            },
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# deferred extraction and load


def extract_deferred(source: TimestampedSource, watermark: SourceWatermark) -> ExtractionBatch:
    """Pull rows modified strictly after the watermark, in source order.

    The batch's max_timestamp is the new watermark candidate; when no
    rows qualify it stays at the old mark.
    """
    selected = tuple(r for r in source.rows if r.modified_at > watermark.last_extracted_at)
    if selected:
        max_ts = max(r.modified_at for r in selected)
    else:
        max_ts = watermark.last_extracted_at
    return ExtractionBatch(source.source_id, selected, max_ts)


def validate_batch(batch: ExtractionBatch, store: WarehouseStore):
    """Raise BadBatch if any row would be rejected; store untouched."""
    geo = dict(store.geo_parent)
    reasons = []
    for row in batch.rows:
        payload = row.payload
        if isinstance(payload, DimensionUpsert):
            if not payload.regency_code or not payload.province_code:
                reasons.append("dimension upsert with empty code")
                continue
            geo[payload.regency_code] = payload.province_code
        elif isinstance(payload, FactRow):
            if payload.regency_code not in geo:
                reasons.append(
                    f"fact {payload.quake_id}: unregistered regency {payload.regency_code}"
                )
            if payload.band_label not in store.band_labels:
                reasons.append(
                    f"fact {payload.quake_id}: unknown band {payload.band_label!r}"
                )
            for name in MEASURE_NAMES:
                if getattr(payload, name) < 0:
                    reasons.append(f"fact {payload.quake_id}: negative {name}")
        else:
            reasons.append(f"unsupported row payload: {type(payload).__name__}")
    if reasons:
        raise BadBatch(reasons)


def load_facts(batch: ExtractionBatch, store: WarehouseStore) -> LoadStats:
    """Validate and apply a batch; all-or-nothing.

    Dimension upserts inside the batch take effect before fact rows are
    checked, so a batch may introduce a regency and facts for it at
    once.  A fact whose key already exists replaces the old row.
    """
    validate_batch(batch, store)

    inserted = updated = dimensions = 0
    for row in batch.rows:
        payload = row.payload
        if isinstance(payload, DimensionUpsert):
            store.register_regency(payload)
            dimensions += 1
        else:
            if payload.key() in store.facts:
                updated += 1
            else:
                inserted += 1
            store.facts[payload.key()] = payload
    previous = store.watermarks.get(batch.source_id, EPOCH)
    store.watermarks[batch.source_id] = max(previous, batch.max_timestamp)
    return LoadStats(inserted, updated, dimensions)


# ---------------------------------------------------------------------------
# proportional attribution


def allocate_proportional(total: int, weights) -> list[int]:
    """Split an integer total by weights, conserving the sum exactly.

    Largest-remainder rounding: each share gets its floor, then the
    leftover units go to the largest fractional parts (ties to the
    earliest position).  All-zero weights split as evenly as possible.
    """
    weights = [float(w) for w in weights]
    if not weights:
        raise ValueError("cannot allocate over zero weights")
    if any(w < 0 for w in weights):
        raise ValueError("negative weight")
    if total < 0:
        raise ValueError("negative total")
    denom = sum(weights)
    if denom == 0:
        weights = [1.0] * len(weights)
        denom = float(len(weights))
    raw = [total * w / denom for w in weights]
    shares = [int(r) for r in raw]
    leftover = total - sum(shares)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - shares[i]), i))
    for i in order[:leftover]:
        shares[i] += 1
    return shares


def fact_rows_for_quake(quake, regencies, bands=DEFAULT_BANDS) -> list[FactRow]:
    """Attribute one quake's totals across regencies by population share.

    regencies is a sequence of (regency_code, population).  Every
    resulting row keeps event_count 1; casualty and building measures
    conserve the quake's totals exactly.
    """
    if not regencies:
        raise ValueError(f"{quake.event.id}: no regencies to attribute to")
    codes = [c for c, _ in regencies]
    pops = [p for _, p in regencies]
    deaths = allocate_proportional(quake.deaths, pops)
    injured = allocate_proportional(quake.injured, pops)
    buildings = allocate_proportional(quake.buildings_destroyed, pops)
    band = magnitude_band(quake.event.magnitude, bands).label
    return [
        FactRow(
            quake_id=quake.event.id,
            date=quake.event.date,
            regency_code=code,
            band_label=band,
            deaths=deaths[i],
            injured=injured[i],
            buildings_destroyed=buildings[i],
        )
        for i, code in enumerate(codes)
    ]


# ---------------------------------------------------------------------------
# catalog conversion


def _slug(label: str) -> str:
    out = []
    for ch in label.lower():
        out.append(ch if ch.isalnum() else "-")
    text = "".join(out)
    while "--" in text:
        text = text.replace("--", "-")
    return text.strip("-") or "unlabelled"


def catalog_source(
    catalog, bands=DEFAULT_BANDS, ref=None, source_id="historical-catalog"
) -> TimestampedSource:
    """Expose a quake catalog as an extractable warehouse source.

    Each quake's region label (kept in its epicenter description) is
    resolved to a regency: an exact case-insensitive match on a known
    regency name wins; otherwise a regency and a self-named province
    are synthesised from the label and registered via dimension
    upserts.  Row timestamps are the quake's own occurrence time, so a
    second extraction of the same catalog yields an empty batch.
    """
    by_name = {}
    if ref is not None:
        by_name = {r.name.lower(): r for r in ref.regencies}
    rows = []
    registered: set[str] = set()
    for quake in catalog:
        ev = quake.event
        label = ev.epicenter_desc.strip() or ev.id
        match = by_name.get(label.lower())
        if match is not None:
            code, parent = match.code, match.parent_code
            names = (match.name, "")
        else:
            code = _slug(label)
            parent = "p." + code
            names = (label, label)
        stamp = ev.occurred_at
        if code not in registered:
            rows.append(
                SourceRow(
                    stamp,
                    DimensionUpsert(
                        regency_code=code,
                        province_code=parent,
                        regency_name=names[0],
                        province_name=names[1],
                    ),
                )
            )
            registered.add(code)
        band = magnitude_band(ev.magnitude, bands).label
        rows.append(
            SourceRow(
                stamp,
                FactRow(
                    quake_id=ev.id,
                    date=ev.date,
                    regency_code=code,
                    band_label=band,
                    deaths=quake.deaths,
                    injured=quake.injured,
                    buildings_destroyed=quake.buildings_destroyed,
                ),
            )
        )
    return TimestampedSource(source_id, rows)


# ---------------------------------------------------------------------------
# batch serialization (for the event log)


def batch_to_payload(batch: ExtractionBatch) -> dict:
    rows = []
    for row in batch.rows:
        if isinstance(row.payload, DimensionUpsert):
            body = {
                "kind": "dimension",
                "regency_code": row.payload.regency_code,
                "province_code": row.payload.province_code,
                "regency_name": row.payload.regency_name,
                "province_name": row.payload.province_name,
            }
        else:
            f = row.payload
            body = {
                "kind": "fact",
                "quake_id": f.quake_id,
                "date": f.date.isoformat(),
                "regency_code": f.regency_code,
                "band_label": f.band_label,
                "deaths": f.deaths,
                "injured": f.injured,
                "buildings_destroyed": f.buildings_destroyed,
                "event_count": f.event_count,
            }
        body["modified_at"] = iso_utc(row.modified_at)
        rows.append(body)
    return {
        "source_id": batch.source_id,
        "max_timestamp": iso_utc(batch.max_timestamp),
        "rows": rows,
    }


def batch_from_payload(payload: dict) -> ExtractionBatch:
    rows = []
    for body in payload["rows"]:
        if body["kind"] == "dimension":
            inner = DimensionUpsert(
                regency_code=body["regency_code"],
                province_code=body["province_code"],
                regency_name=body.get("regency_name", ""),
                province_name=body.get("province_name", ""),
            )
        else:
            inner = FactRow(
                quake_id=body["quake_id"],
                date=dt.date.fromisoformat(body["date"]),
                regency_code=body["regency_code"],
                band_label=body["band_label"],
                deaths=body["deaths"],
                injured=body["injured"],
                buildings_destroyed=body["buildings_destroyed"],
                event_count=body.get("event_count", 1),
            )
        rows.append(SourceRow(parse_utc(body["modified_at"]), inner))
    return ExtractionBatch(
        source_id=payload["source_id"],
        rows=tuple(rows),
        max_timestamp=parse_utc(payload["max_timestamp"]),
    )


# ---------------------------------------------------------------------------
# cube model


def _check_axis(dimension: str, level: str):
    if dimension not in DIMENSIONS:
        raise UnknownDimension(f"unknown dimension: {dimension}")
    if level not in DIMENSIONS[dimension]:
        raise UnknownLevel(f"dimension {dimension} has no level {level}")


def _member_of(fact: FactRow, dimension: str, level: str, geo_parent: dict):
    """The member a fact belongs to at (dimension, level)."""
    if dimension == "time":
        if level == "year":
            return fact.date.year
        if level == "month":
            return (fact.date.year, fact.date.month)
        return fact.date
    if dimension == "geography":
        if level == "regency":
            return fact.regency_code
        return geo_parent[fact.regency_code]
    return fact.band_label


def _coarsen(dimension: str, from_level: str, member):
    """Map a member one level up its hierarchy."""
    if dimension == "time":
        if from_level == "day":
            return (member.year, member.month)
        return member[0]  # (year, month) -> year
    # geography regency -> province handled by caller (needs the mapping)
    raise AssertionError(f"no coarsening rule for {dimension}/{from_level}")


def _check_member_shape(dimension: str, level: str, member, cube: "Hypercube"):
    """Validate a slice/dice member; unknown members of finite domains raise."""
    if dimension == "geography":
        if level == "regency":
            domain = set(cube.geo_parent)
        else:
            domain = set(cube.geo_parent.values())
        if member not in domain:
            raise UnknownMember(f"unknown {level}: {member!r}")
    elif dimension == "magnitude":
        if member not in cube.band_labels:
            raise UnknownMember(f"unknown band: {member!r}")
    else:  # time has an open domain; check the shape only
        if level == "year":
            ok = isinstance(member, int) and not isinstance(member, bool)
        elif level == "month":
            ok = (
                isinstance(member, tuple)
                and len(member) == 2
                and all(isinstance(p, int) for p in member)
                and 1 <= member[1] <= 12
            )
        else:
            ok = isinstance(member, dt.date)
        if not ok:
            raise UnknownMember(f"malformed {level} member: {member!r}")


def _normalise_constraints(constraints) -> tuple:
    merged: dict[tuple[str, str], frozenset] = {}
    for dimension, level, members in constraints:
        key = (dimension, level)
        members = frozenset(members)
        if key in merged:
            members = merged[key] & members
        merged[key] = members
    return tuple(
        (d, l, merged[(d, l)]) for d, l in sorted(merged)
    )


@dataclass(frozen=True)
class Hypercube:
    """Aggregated measures addressed by one member per axis.

    Cells are sparse: only coordinates backed by at least one fact
    exist.  The cube carries the filters used to build it so a drill
    down can rebuild the finer view from the store without losing
    them.  Equality compares the observable view (axes and cells), not
    the bookkeeping.
    """

    axes: tuple  # ((dimension, level), ...)
    cells: dict  # coordinate tuple -> Measures
    constraints: tuple = field(default=(), compare=False)
    geo_parent: dict = field(default_factory=dict, compare=False)
    band_labels: tuple = field(default=(), compare=False)

    def totals(self) -> Measures:
        total = Measures()
        for m in self.cells.values():
            total = total + m
        return total

    def _axis_index(self, dimension: str) -> int:
        for i, (d, _) in enumerate(self.axes):
            if d == dimension:
                return i
        raise UnknownDimension(f"dimension {dimension} is not an axis of this cube")

    def roll_up(self, dimension: str) -> "Hypercube":
        """Aggregate the axis one level coarser."""
        i = self._axis_index(dimension)
        level = self.axes[i][1]
        levels = DIMENSIONS[dimension]
        pos = levels.index(level)
        if pos == 0:
            raise AlreadyCoarsest(f"{dimension} is already at {level}")
        new_level = levels[pos - 1]
        cells: dict = {}
        for coord, measures in self.cells.items():
            member = coord[i]
            if dimension == "geography":
                coarse = self.geo_parent[member]
            else:
                coarse = _coarsen(dimension, level, member)
            new_coord = coord[:i] + (coarse,) + coord[i + 1 :]
            cells[new_coord] = cells.get(new_coord, Measures()) + measures
        new_axes = self.axes[:i] + ((dimension, new_level),) + self.axes[i + 1 :]
        return Hypercube(
            new_axes, cells, self.constraints, self.geo_parent, self.band_labels
        )

    def drill_down(self, dimension: str, store: WarehouseStore) -> "Hypercube":
        """Refine the axis one level finer by rebuilding from the store.

        The cube's accumulated filters are re-applied, so the result is
        exactly the finer cube the same build-and-filter chain would
        have produced.
        """
        i = self._axis_index(dimension)
        level = self.axes[i][1]
        levels = DIMENSIONS[dimension]
        pos = levels.index(level)
        if pos == len(levels) - 1:
            raise AlreadyFinest(f"{dimension} is already at {level}")
        new_axes = self.axes[:i] + ((dimension, levels[pos + 1]),) + self.axes[i + 1 :]
        return build_cube(store, new_axes, self.constraints)

    def slice(self, dimension: str, member) -> "Hypercube":
        """Fix one axis to a single member and drop that axis."""
        i = self._axis_index(dimension)
        level = self.axes[i][1]
        _check_member_shape(dimension, level, member, self)
        cells = {
            coord[:i] + coord[i + 1 :]: measures
            for coord, measures in self.cells.items()
            if coord[i] == member
        }
        new_axes = self.axes[:i] + self.axes[i + 1 :]
        constraints = _normalise_constraints(
            list(self.constraints) + [(dimension, level, frozenset([member]))]
        )
        return Hypercube(
            new_axes, cells, constraints, self.geo_parent, self.band_labels
        )

    def dice(self, predicates: dict) -> "Hypercube":
        """Keep only cells whose members pass every per-dimension filter.

        predicates maps dimension name to an iterable of allowed
        members at that dimension's current level.  Axes stay put.
        """
        checked: dict[int, frozenset] = {}
        extra = []
        for dimension, members in predicates.items():
            i = self._axis_index(dimension)
            level = self.axes[i][1]
            members = frozenset(members)
            for member in members:
                _check_member_shape(dimension, level, member, self)
            checked[i] = members
            extra.append((dimension, level, members))
        cells = {
            coord: measures
            for coord, measures in self.cells.items()
            if all(coord[i] in allowed for i, allowed in checked.items())
        }
        constraints = _normalise_constraints(list(self.constraints) + extra)
        return Hypercube(
            self.axes, cells, constraints, self.geo_parent, self.band_labels
        )


def build_cube(store: WarehouseStore, axes, constraints=()) -> Hypercube:
    """Aggregate the store's facts onto the requested axes.

    axes is an ordered sequence of (dimension, level); each dimension
    may appear once.  constraints are (dimension, level, members)
    filters applied at the fact level regardless of the axes.
    """
    axes = tuple((d, l) for d, l in axes)
    seen_dims = set()
    for dimension, level in axes:
        _check_axis(dimension, level)
        if dimension in seen_dims:
            raise ConflictingDimension(f"dimension {dimension} appears twice")
        seen_dims.add(dimension)
    constraints = _normalise_constraints(constraints)
    for dimension, level, _ in constraints:
        _check_axis(dimension, level)

    geo_parent = dict(store.geo_parent)
    cells: dict = {}
    for fact in store.facts.values():
        keep = True
        for dimension, level, members in constraints:
            if _member_of(fact, dimension, level, geo_parent) not in members:
                keep = False
                break
        if not keep:
            continue
        coord = tuple(
            _member_of(fact, dimension, level, geo_parent) for dimension, level in axes
        )
        cells[coord] = cells.get(coord, Measures()) + fact.measures()
    return Hypercube(axes, cells, constraints, geo_parent, tuple(store.band_labels))
