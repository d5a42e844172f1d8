"""Event-sourced engine tying the domain modules together.

Every state change is appended to a JSONL log before it touches memory
(write-ahead), so killing the process at any point loses at most the
response, never a logged event.  Replaying the log from scratch always
reproduces the same state hash.
"""

import dataclasses
import datetime as dt
import functools
import hashlib
import json
import logging
import os
import threading
from pathlib import Path

from . import escalation as esc
from .ingest import ReferenceDataset, load_historical_catalog, load_reference_data
from .model import (
    UTC,
    ValidationError,
    Violation,
    iso_utc,
    parse_utc,
    validate_warning,
    warning_record,
)
from .warehouse import (
    LoadStats,
    MEASURE_NAMES,
    TimestampedSource,
    UnknownLevel,
    UnknownMember,
    WarehouseStore,
    batch_from_payload,
    batch_to_payload,
    build_cube,
    catalog_source,
    extract_deferred,
    load_facts,
    validate_batch,
)

log = logging.getLogger(__name__)


class ServiceError(Exception):
    pass


class UnknownWarning(ServiceError):
    def __init__(self, warning_id):
        self.warning_id = warning_id
        super().__init__(f"unknown warning id: {warning_id}")


class DuplicateWarning(ServiceError):
    def __init__(self, warning_id):
        self.warning_id = warning_id
        super().__init__(f"warning already ingested: {warning_id}")


class CorruptLog(ServiceError):
    def __init__(self, line, reason):
        self.line = line
        super().__init__(f"event log corrupt at line {line}: {reason}")


# ---------------------------------------------------------------------------
# append-only log


class EventLog:
    """Dense-sequence JSONL log; append flushes and fsyncs before returning."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.last_seq = 0

    def append(self, kind: str, payload: dict, at: dt.datetime) -> int:
        self.last_seq += 1
        line = json.dumps(
            {"seq": self.last_seq, "kind": kind, "at": iso_utc(at), "payload": payload},
            sort_keys=True,
            separators=(",", ":"),
        )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        return self.last_seq

    @staticmethod
    def read(path):
        """Yield (seq, kind, at, payload); sequence must be dense from 1."""
        path = Path(path)
        if not path.exists():
            return
        expected = 1
        with open(path, encoding="utf-8") as fh:
            for number, raw in enumerate(fh, start=1):
                if not raw.strip():
                    raise CorruptLog(number, "blank line")
                try:
                    entry = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise CorruptLog(number, f"invalid JSON: {exc.msg}") from None
                seq = entry.get("seq")
                if seq != expected:
                    raise CorruptLog(number, f"expected seq {expected}, found {seq}")
                expected += 1
                yield seq, entry["kind"], parse_utc(entry["at"]), entry["payload"]


# ---------------------------------------------------------------------------
# level-name grammar shared by the HTTP and CLI query surfaces

LEVEL_MAP = {
    "year": ("time", "year"),
    "month": ("time", "month"),
    "day": ("time", "day"),
    "province": ("geography", "province"),
    "regency": ("geography", "regency"),
    "band": ("magnitude", "band"),
}


def _parse_member(level: str, text: str):
    """Turn a filter string into the member value the cube uses."""
    try:
        if level == "year":
            return int(text)
        if level == "month":
            year, month = text.split("-")
            member = (int(year), int(month))
            if not 1 <= member[1] <= 12:
                raise ValueError(text)
            return member
        if level == "day":
            return dt.date.fromisoformat(text)
    except ValueError:
        raise UnknownMember(f"malformed {level} member: {text!r}") from None
    return text


def _render_member(level: str, member) -> str:
    if level == "month":
        return f"{member[0]:04d}-{member[1]:02d}"
    if level == "day":
        return member.isoformat()
    return str(member)


# ---------------------------------------------------------------------------
# engine


def _safe_name(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in text)


def _locked(method):
    """Serialize mutations: one writer at a time through the log appender."""

    @functools.wraps(method)
    def wrapper(self, *args, **kwargs):
        with self._write_lock:
            return method(self, *args, **kwargs)

    return wrapper


class Engine:
    """Single-writer service core; all mutations go through the log."""

    def __init__(self, data_dir, ref: ReferenceDataset, catalog=(), clock=None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.ref = ref
        self.catalog = list(catalog)
        self.clock = clock or (lambda: dt.datetime.now(UTC))
        self.after_append = None  # test hook: runs after fsync, before apply
        self._write_lock = threading.RLock()
        self.log = EventLog(self.data_dir / "events.jsonl")

        self.warnings: dict = {}
        self.assessments: dict = {}
        self.escalations: dict = {}
        self.store = WarehouseStore(band_labels=(b.label for b in ref.bands))
        self._replaying = True
        for seq, kind, at, payload in EventLog.read(self.log.path):
            try:
                self._apply(kind, payload, at)
            except (ValueError, KeyError) as exc:
                raise CorruptLog(seq, f"{type(exc).__name__}: {exc}") from exc
            self.log.last_seq = seq
        self._replaying = False

    # -- construction helpers

    REFERENCE_SUBDIR = "reference"

    @classmethod
    def open(cls, data_dir, clock=None) -> "Engine":
        """Start an engine from an initialised data directory."""
        data_dir = Path(data_dir)
        ref_dir = data_dir / cls.REFERENCE_SUBDIR
        ref = load_reference_data(
            ref_dir / "provinces.csv",
            ref_dir / "regencies.csv",
            ref_dir / "config.json",
        )
        catalog_path = ref_dir / "historical_quakes.csv"
        catalog = []
        if catalog_path.exists():
            catalog, problems = load_historical_catalog(catalog_path)
            for problem in problems:
                log.warning("catalog row %d rejected: %s", problem.line, problem.reason)
        return cls(data_dir, ref, catalog, clock=clock)

    @property
    def log_seq(self) -> int:
        return self.log.last_seq

    # -- event application (shared by live path and replay)

    def _apply(self, kind: str, payload: dict, at: dt.datetime):
        if kind == "warning-ingested":
            warning = validate_warning(payload)
            self.warnings[warning.id] = warning
            self.escalations[warning.id] = esc.initial_state(warning.id)
            return warning
        if kind == "assessed":
            wid = payload["warning_id"]
            assessment = payload["assessment"]
            event = esc.AssessedEvent(
                medics_required=assessment["medics_required"],
                medics_available=assessment["medics_available"],
                medic_shortage=assessment["medic_shortage"],
                affected=tuple(assessment["affected_regencies"]),
                at=at,
            )
            self.escalations[wid] = esc.apply_event(self.escalations[wid], event)
            self.assessments[wid] = assessment
            return assessment
        if kind in ("sos1", "pledge", "sos2", "resolved"):
            wid = payload["warning_id"]
            body = {k: v for k, v in payload.items() if k != "warning_id"}
            event = esc.event_from_payload(kind, body, at)
            self.escalations[wid] = esc.apply_event(self.escalations[wid], event)
            return self.escalations[wid]
        if kind == "etl-batch":
            return load_facts(batch_from_payload(payload), self.store)
        raise ValueError(f"unknown log event kind: {kind}")

    def _commit(self, entries, at: dt.datetime):
        """Append every entry, fire the crash hook, then apply in order."""
        appended = []
        for kind, payload in entries:
            self.log.append(kind, payload, at)
            appended.append((kind, payload))
        if self.after_append is not None:
            self.after_append()
        return [self._apply(kind, payload, at) for kind, payload in appended]

    # -- mutations

    @_locked
    def ingest_warning(self, record: dict) -> dict:
        """Accept one warning, assess it immediately, log both.

        The response bundles the assessment and the escalation phase so
        a caller sees at once whether a stage-1 request awaits approval.
        """
        warning = validate_warning(record)
        if warning.id in self.warnings:
            raise DuplicateWarning(warning.id)
        at = self.clock()
        assessment, _ = esc.assess(warning, self.ref, self.catalog, at)
        self._commit(
            [
                ("warning-ingested", warning_record(warning)),
                (
                    "assessed",
                    {"warning_id": warning.id, "assessment": assessment.as_dict()},
                ),
            ],
            at,
        )
        state = self.escalations[warning.id]
        return {
            "warning": self.warning_view(warning.id),
            "assessment": self.assessments[warning.id],
            "phase": state.phase.value,
            "sos1_pending_approval": state.shortage > 0,
        }

    @_locked
    def issue_sos1(self, warning_id: str, approver: str) -> dict:
        state = self._escalation(warning_id)
        at = self.clock()
        event, request = esc.issue_sos1(state, self.ref, approver, at)
        payload = {"warning_id": warning_id, **esc.event_to_payload(event)}
        self._commit([("sos1", payload)], at)
        self._write_outbox(request)
        return self.escalation_view(warning_id)

    @_locked
    def record_pledge(self, warning_id: str, source: str, medics: int) -> dict:
        state = self._escalation(warning_id)
        at = self.clock()
        event = esc.record_pledge(state, self.ref, source, medics, at)
        payload = {"warning_id": warning_id, **esc.event_to_payload(event)}
        self._commit([("pledge", payload)], at)
        return self.escalation_view(warning_id)

    @_locked
    def issue_sos2(self, warning_id: str, approver: str) -> dict:
        state = self._escalation(warning_id)
        at = self.clock()
        event, request = esc.evaluate_sos2(state, approver, at)
        kind = "sos2" if request is not None else "resolved"
        payload = {"warning_id": warning_id, **esc.event_to_payload(event)}
        self._commit([(kind, payload)], at)
        if request is not None:
            self._write_outbox(request)
        return self.escalation_view(warning_id)

    @_locked
    def resolve(self, warning_id: str) -> dict:
        state = self._escalation(warning_id)
        at = self.clock()
        esc.resolve(state, at)
        self._commit([("resolved", {"warning_id": warning_id})], at)
        return self.escalation_view(warning_id)

    @_locked
    def run_etl(self, source: TimestampedSource):
        """Extract past the source's watermark and load; no-op when empty."""
        watermark = self.store.watermark_for(source.source_id)
        batch = extract_deferred(source, watermark)
        if not batch.rows:
            return LoadStats()
        validate_batch(batch, self.store)
        results = self._commit([("etl-batch", batch_to_payload(batch))], self.clock())
        return results[0]

    def load_catalog_facts(self):
        """Push the historical catalog through the deferred ETL path."""
        source = catalog_source(self.catalog, bands=self.ref.bands, ref=self.ref)
        return self.run_etl(source)

    def _write_outbox(self, request: esc.SosRequest):
        if self._replaying:
            return
        outbox = self.data_dir / "outbox"
        outbox.mkdir(exist_ok=True)
        name = f"{_safe_name(request.warning_id)}-sos{request.stage}.json"
        with open(outbox / name, "w", encoding="utf-8") as fh:
            json.dump(request.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    # -- pure recomputation (never logged)

    def whatif(self, warning_id: str, overrides: dict) -> dict:
        """Recompute an assessment with modified inputs; stored state untouched."""
        warning = self._warning(warning_id)
        allowed = {
            "persons_per_medic",
            "affected_population",
            "magnitude",
            "affected_regencies",
            "coefficients",
        }
        unknown = set(overrides) - allowed
        if unknown:
            raise ValidationError(
                [Violation(key, "malformed", "unknown what-if override") for key in sorted(unknown)]
            )
        ref = self.ref
        changes = {}
        if "persons_per_medic" in overrides:
            changes["persons_per_medic"] = int(overrides["persons_per_medic"])
        if "coefficients" in overrides:
            merged = ref.coefficients.as_dict()
            merged.update(overrides["coefficients"])
            changes["coefficients"] = type(ref.coefficients).from_dict(merged)
        if changes:
            ref = dataclasses.replace(ref, **changes)
        event = warning.event
        event_changes = {}
        if "magnitude" in overrides:
            event_changes["magnitude"] = float(overrides["magnitude"])
        if "affected_regencies" in overrides:
            event_changes["affected_regencies"] = tuple(overrides["affected_regencies"])
        if event_changes:
            warning = dataclasses.replace(
                warning, event=dataclasses.replace(event, **event_changes)
            )
        population = overrides.get("affected_population")
        assessment = esc.assess(
            warning,
            ref,
            self.catalog,
            self.clock(),
            population_override=None if population is None else int(population),
        )[0]
        return assessment.as_dict()

    # -- queries

    def _warning(self, warning_id: str):
        warning = self.warnings.get(warning_id)
        if warning is None:
            raise UnknownWarning(warning_id)
        return warning

    def _escalation(self, warning_id: str):
        state = self.escalations.get(warning_id)
        if state is None:
            raise UnknownWarning(warning_id)
        return state

    def warning_view(self, warning_id: str, now=None) -> dict:
        warning = self._warning(warning_id)
        state = self.escalations[warning_id]
        now = now or self.clock()
        ev = warning.event
        return {
            "id": ev.id,
            "issued_at": iso_utc(warning.issued_at),
            "date": ev.date.isoformat(),
            "time": ev.time.isoformat(),
            "latitude": ev.latitude,
            "longitude": ev.longitude,
            "magnitude": ev.magnitude,
            "depth_km": ev.depth_km,
            "epicenter_desc": ev.epicenter_desc,
            "affected_regencies": list(ev.affected_regencies),
            "risk_note": warning.risk_note,
            "phase": state.phase.value,
            "medic_shortage": state.shortage,
            "overdue": esc.is_overdue(state, now, self.ref.sla_minutes),
        }

    def list_warnings(self) -> list:
        now = self.clock()
        ordered = sorted(
            self.warnings.values(), key=lambda w: (w.issued_at, w.event.id)
        )
        return [self.warning_view(w.event.id, now) for w in ordered]

    def get_assessment(self, warning_id: str) -> dict:
        self._warning(warning_id)
        assessment = self.assessments.get(warning_id)
        if assessment is None:
            raise UnknownWarning(warning_id)
        return assessment

    def escalation_view(self, warning_id: str, now=None) -> dict:
        state = self._escalation(warning_id)
        now = now or self.clock()
        if state.phase is esc.Phase.ASSESSED and state.shortage > 0:
            candidates = esc.nearest_sources(state.affected, self.ref)
        else:
            candidates = self._enriched_sources(state)
        return {
            "warning_id": state.warning_id,
            "phase": state.phase.value,
            "medic_shortage": state.shortage,
            "medics_required": state.medics_required,
            "medics_available": state.medics_available,
            "affected_regencies": list(state.affected),
            "sos1_amount": state.sos1_amount,
            "sos2_amount": state.sos2_amount,
            "total_pledged": state.total_pledged(),
            "pledges": [
                {"source": p.source, "medics": p.medics, "at": iso_utc(p.at)}
                for p in state.pledges
            ],
            "approvals": [
                {"action": a.action, "approver": a.approver, "at": iso_utc(a.at)}
                for a in state.approvals
            ],
            "sources": [c.as_dict() for c in candidates],
            "assessed_at": None if state.assessed_at is None else iso_utc(state.assessed_at),
            "overdue": esc.is_overdue(state, now, self.ref.sla_minutes),
        }

    def _enriched_sources(self, state) -> list:
        """Stage-1 candidates with their remaining pledgeable medics."""
        if not state.sos1_sources:
            return []
        try:
            ranked = {c.code: c for c in esc.nearest_sources(state.affected, self.ref)}
        except esc.NotEligible:
            ranked = {}
        out = []
        for code in state.sos1_sources:
            candidate = ranked.get(code)
            if candidate is None:
                continue
            remaining = max(0, candidate.medics_pledgeable - state.pledged_from(code))
            out.append(dataclasses.replace(candidate, medics_pledgeable=remaining))
        return out

    def olap_query(self, group_by, filters=()) -> dict:
        """Aggregate warehouse facts; group_by and filters use level names.

        group_by is an iterable of level names (year, month, day,
        province, regency, band); filters are "level=member" strings
        applied as constraints before aggregation.
        """
        axes = []
        for name in group_by:
            name = name.strip()
            if name not in LEVEL_MAP:
                raise UnknownLevel(f"unknown level name: {name}")
            axes.append(LEVEL_MAP[name])
        constraints = []
        for item in filters:
            if "=" not in item:
                raise UnknownMember(f"filter must look like level=member: {item!r}")
            name, _, raw = item.partition("=")
            name = name.strip()
            if name not in LEVEL_MAP:
                raise UnknownLevel(f"unknown level name: {name}")
            dimension, level = LEVEL_MAP[name]
            member = _parse_member(level, raw.strip())
            self._check_domain(dimension, level, member)
            constraints.append((dimension, level, frozenset([member])))
        cube = build_cube(self.store, axes, constraints)
        level_names = [level for _, level in cube.axes]
        rendered = []
        for coord, measures in cube.cells.items():
            keys = tuple(
                _render_member(level, member)
                for level, member in zip(level_names, coord)
            )
            rendered.append((keys, measures))
        rendered.sort(key=lambda item: item[0])  # lexicographic coordinate order
        rows = []
        for keys, measures in rendered:
            row = dict(zip(level_names, keys))
            row.update(measures.as_dict())
            rows.append(row)
        return {
            "columns": level_names + list(MEASURE_NAMES),
            "rows": rows,
            "totals": cube.totals().as_dict(),
        }

    def _check_domain(self, dimension, level, member):
        if dimension == "geography":
            domain = (
                set(self.store.geo_parent)
                if level == "regency"
                else set(self.store.geo_parent.values())
            )
            if member not in domain:
                raise UnknownMember(f"unknown {level}: {member!r}")
        elif dimension == "magnitude" and member not in self.store.band_labels:
            raise UnknownMember(f"unknown band: {member!r}")

    def list_historical(self) -> list:
        return [
            {
                "id": q.event.id,
                "date": q.event.date.isoformat(),
                "time": q.event.time.isoformat(),
                "latitude": q.event.latitude,
                "longitude": q.event.longitude,
                "magnitude": q.event.magnitude,
                "region_label": q.event.epicenter_desc,
                "deaths": q.deaths,
                "injured": q.injured,
                "buildings_destroyed": q.buildings_destroyed,
                "exposed_population": q.exposed_population,
            }
            for q in self.catalog
        ]

    def list_regions(self) -> dict:
        def region_dict(r):
            return {
                "code": r.code,
                "name": r.name,
                "kind": r.kind.value,
                "parent_code": r.parent_code,
                "population": r.population,
                "medics_available": r.medics_available,
                "medics_pledgeable": r.medics_pledgeable,
                "centroid_lat": r.centroid_lat,
                "centroid_lon": r.centroid_lon,
            }

        return {
            "provinces": [region_dict(p) for p in self.ref.provinces],
            "regencies": [region_dict(r) for r in self.ref.regencies],
        }

    # -- integrity

    def snapshot(self) -> dict:
        """Canonical, JSON-stable view of all replayable state."""
        escalations = {}
        for wid, state in sorted(self.escalations.items()):
            escalations[wid] = {
                "phase": state.phase.value,
                "shortage": state.shortage,
                "medics_required": state.medics_required,
                "medics_available": state.medics_available,
                "affected": list(state.affected),
                "sos1_sources": list(state.sos1_sources),
                "sos1_amount": state.sos1_amount,
                "sos2_amount": state.sos2_amount,
                "pledges": [
                    [p.source, p.medics, iso_utc(p.at)] for p in state.pledges
                ],
                "approvals": [
                    [a.action, a.approver, iso_utc(a.at)] for a in state.approvals
                ],
                "assessed_at": None
                if state.assessed_at is None
                else iso_utc(state.assessed_at),
            }
        return {
            "warnings": {
                wid: warning_record(w) for wid, w in sorted(self.warnings.items())
            },
            "assessments": dict(sorted(self.assessments.items())),
            "escalations": escalations,
            "warehouse": self.store.content_hash(),
        }

    def state_hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()
