"""Two-stage aid escalation with human approval gates.

A warning moves Received -> Assessed, and when local medics fall short
an operator may issue a stage-1 request to the nearest domestic
reserves, record pledges against it, and only then escalate stage 2 to
the international community.  State is an immutable value folded from
events; `apply_event` is the single transition authority and rejects
anything out of order.
"""

import datetime as dt
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

from .estimator import Assessment, build_assessment
from .geo import haversine_km, weighted_centroid
from .model import EarlyWarning

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ReferenceDataset

# pledge source code for stage-2 international aid; not a region code
INTERNATIONAL = "INTERNATIONAL"


class Phase(str, Enum):
    RECEIVED = "Received"
    ASSESSED = "Assessed"
    SOS1_ISSUED = "Sos1Issued"
    SOS2_ISSUED = "Sos2Issued"
    RESOLVED = "Resolved"


class EscalationError(ValueError):
    pass


class IllegalTransition(EscalationError):
    """An event arrived in a phase where it is not allowed."""


class NotEligible(EscalationError):
    """A requested operation fails its business guard."""


class InvalidSource(EscalationError):
    pass


class InvalidPledge(EscalationError):
    pass


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class AssessedEvent:
    medics_required: int
    medics_available: int
    medic_shortage: int
    affected: tuple
    at: dt.datetime


@dataclass(frozen=True)
class Sos1Event:
    approver: str
    amount: int
    sources: tuple  # candidate codes, nearest first
    at: dt.datetime


@dataclass(frozen=True)
class PledgeEvent:
    source: str
    medics: int
    at: dt.datetime


@dataclass(frozen=True)
class Sos2Event:
    approver: str
    amount: int
    at: dt.datetime


@dataclass(frozen=True)
class ResolvedEvent:
    at: dt.datetime


@dataclass(frozen=True)
class Approval:
    action: str  # "sos1" or "sos2"
    approver: str
    at: dt.datetime


@dataclass(frozen=True)
class Pledge:
    source: str
    medics: int
    at: dt.datetime


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class EscalationState:
    """Snapshot of one warning's escalation; replaced, never mutated."""

    warning_id: str
    phase: Phase = Phase.RECEIVED
    shortage: int = 0
    medics_required: int = 0
    medics_available: int = 0
    affected: tuple = ()
    sos1_sources: tuple = ()
    sos1_amount: int = 0
    sos2_amount: int = 0
    pledges: tuple = ()
    approvals: tuple = ()
    assessed_at: dt.datetime | None = None

    def pledged_from(self, source: str) -> int:
        return sum(p.medics for p in self.pledges if p.source == source)

    def total_pledged(self) -> int:
        return sum(p.medics for p in self.pledges)


def initial_state(warning_id: str) -> EscalationState:
    return EscalationState(warning_id=warning_id)


def apply_event(state: EscalationState, event) -> EscalationState:
    """Fold one event into the state; the only legal transition path.

    Raises IllegalTransition for any event/phase pair outside the
    workflow, including stage-2 before stage-1 and aid requests with a
    zero shortage.  Shortage can never go negative: pledges floor at 0.
    """
    if isinstance(event, AssessedEvent):
        if state.phase is not Phase.RECEIVED:
            raise IllegalTransition(f"cannot assess in phase {state.phase.value}")
        if event.medic_shortage < 0:
            raise IllegalTransition("assessed shortage is negative")
        return replace(
            state,
            phase=Phase.ASSESSED,
            shortage=event.medic_shortage,
            medics_required=event.medics_required,
            medics_available=event.medics_available,
            affected=tuple(event.affected),
            assessed_at=event.at,
        )

    if isinstance(event, Sos1Event):
        if state.phase is not Phase.ASSESSED:
            raise IllegalTransition(
                f"stage-1 request requires phase Assessed, not {state.phase.value}"
            )
        if state.shortage <= 0:
            raise IllegalTransition("stage-1 request with no shortage")
        return replace(
            state,
            phase=Phase.SOS1_ISSUED,
            sos1_sources=tuple(event.sources),
            sos1_amount=event.amount,
            approvals=state.approvals + (Approval("sos1", event.approver, event.at),),
        )

    if isinstance(event, PledgeEvent):
        if state.phase not in (Phase.SOS1_ISSUED, Phase.SOS2_ISSUED):
            raise IllegalTransition(
                f"pledge requires an open aid request, phase is {state.phase.value}"
            )
        if event.medics < 1:
            raise IllegalTransition("pledge must be a positive medic count")
        return replace(
            state,
            shortage=max(0, state.shortage - event.medics),
            pledges=state.pledges + (Pledge(event.source, event.medics, event.at),),
        )

    if isinstance(event, Sos2Event):
        if state.phase is not Phase.SOS1_ISSUED:
            raise IllegalTransition(
                f"stage-2 request requires phase Sos1Issued, not {state.phase.value}"
            )
        if state.shortage <= 0:
            raise IllegalTransition("stage-2 request with no remaining shortage")
        return replace(
            state,
            phase=Phase.SOS2_ISSUED,
            sos2_amount=event.amount,
            approvals=state.approvals + (Approval("sos2", event.approver, event.at),),
        )

    if isinstance(event, ResolvedEvent):
        if state.phase not in (Phase.ASSESSED, Phase.SOS1_ISSUED, Phase.SOS2_ISSUED):
            raise IllegalTransition(f"cannot resolve in phase {state.phase.value}")
        if state.shortage != 0:
            raise IllegalTransition("cannot resolve with an open shortage")
        return replace(state, phase=Phase.RESOLVED)

    raise IllegalTransition(f"unknown event type: {type(event).__name__}")


# ---------------------------------------------------------------------------
# event serialization (for the append-only log)

_EVENT_KINDS = {
    AssessedEvent: "assessed",
    Sos1Event: "sos1",
    PledgeEvent: "pledge",
    Sos2Event: "sos2",
    ResolvedEvent: "resolved",
}


def event_to_payload(event) -> dict:
    kind = _EVENT_KINDS[type(event)]
    if kind == "assessed":
        return {
            "medics_required": event.medics_required,
            "medics_available": event.medics_available,
            "medic_shortage": event.medic_shortage,
            "affected": list(event.affected),
        }
    if kind == "sos1":
        return {
            "approver": event.approver,
            "amount": event.amount,
            "sources": list(event.sources),
        }
    if kind == "pledge":
        return {"source": event.source, "medics": event.medics}
    if kind == "sos2":
        return {"approver": event.approver, "amount": event.amount}
    return {}


def event_from_payload(kind: str, payload: dict, at: dt.datetime):
    if kind == "assessed":
        return AssessedEvent(
            medics_required=payload["medics_required"],
            medics_available=payload["medics_available"],
            medic_shortage=payload["medic_shortage"],
            affected=tuple(payload["affected"]),
            at=at,
        )
    if kind == "sos1":
        return Sos1Event(
            approver=payload["approver"],
            amount=payload["amount"],
            sources=tuple(payload["sources"]),
            at=at,
        )
    if kind == "pledge":
        return PledgeEvent(source=payload["source"], medics=payload["medics"], at=at)
    if kind == "sos2":
        return Sos2Event(approver=payload["approver"], amount=payload["amount"], at=at)
    if kind == "resolved":
        return ResolvedEvent(at=at)
    raise ValueError(f"unknown escalation event kind: {kind}")


# ---------------------------------------------------------------------------
# source ranking


@dataclass(frozen=True)
class CandidateSource:
    """A non-affected region that could send medics."""

    code: str
    name: str
    kind: str
    distance_km: float
    medics_pledgeable: int

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "name": self.name,
            "kind": self.kind,
            "distance_km": round(self.distance_km, 1),
            "medics_pledgeable": self.medics_pledgeable,
        }


def nearest_sources(affected_codes, ref: "ReferenceDataset") -> list[CandidateSource]:
    """Rank pledgeable regions by distance from the affected area.

    Distance is measured from the population-weighted centroid of the
    affected regencies.  Affected regencies themselves are excluded;
    ties go to the lexically smaller code.
    """
    affected = [ref.regency_by_code[c] for c in affected_codes if c in ref.regency_by_code]
    if not affected:
        raise NotEligible("no resolvable affected regencies to rank sources for")
    lat, lon = weighted_centroid(
        [(r.centroid_lat, r.centroid_lon, r.population) for r in affected]
    )
    affected_set = set(affected_codes)
    candidates = [
        CandidateSource(
            code=r.code,
            name=r.name,
            kind=r.kind.value,
            distance_km=haversine_km(lat, lon, r.centroid_lat, r.centroid_lon),
            medics_pledgeable=r.medics_pledgeable,
        )
        for r in ref.all_regions()
        if r.code not in affected_set and r.medics_pledgeable > 0
    ]
    candidates.sort(key=lambda c: (c.distance_km, c.code))
    return candidates


# ---------------------------------------------------------------------------
# operations (validate a command, produce the event)


@dataclass(frozen=True)
class SosRequest:
    """The outbound aid-request document for stage 1 or stage 2."""

    warning_id: str
    stage: int
    medics_requested: int
    sources: tuple
    issued_at: dt.datetime

    def as_dict(self) -> dict:
        return {
            "warning_id": self.warning_id,
            "stage": self.stage,
            "medics_requested": self.medics_requested,
            "sources": list(self.sources),
            "issued_at": self.issued_at.astimezone(dt.timezone.utc)
            .replace(tzinfo=None)
            .isoformat()
            + "Z",
        }


def assess(
    warning: EarlyWarning,
    ref: "ReferenceDataset",
    catalog,
    at: dt.datetime,
    population_override: int | None = None,
) -> tuple[Assessment, AssessedEvent]:
    """Run the estimation pipeline and produce the Assessed event."""
    assessment = build_assessment(warning, ref, catalog, population_override)
    event = AssessedEvent(
        medics_required=assessment.medics_required,
        medics_available=assessment.medics_available,
        medic_shortage=assessment.medic_shortage,
        affected=assessment.affected_regencies,
        at=at,
    )
    return assessment, event


def issue_sos1(
    state: EscalationState, ref: "ReferenceDataset", approver: str, at: dt.datetime
) -> tuple[Sos1Event, SosRequest]:
    """Approve the stage-1 (domestic reserves) aid request."""
    if not approver or not str(approver).strip():
        raise NotEligible("stage-1 request requires a named approver")
    if state.phase is not Phase.ASSESSED:
        raise NotEligible(
            f"stage-1 request requires phase Assessed, current is {state.phase.value}"
        )
    if state.shortage <= 0:
        raise NotEligible("no medic shortage, nothing to request")
    ranked = nearest_sources(state.affected, ref)
    event = Sos1Event(
        approver=str(approver).strip(),
        amount=state.shortage,
        sources=tuple(c.code for c in ranked),
        at=at,
    )
    request = SosRequest(state.warning_id, 1, event.amount, event.sources, at)
    return event, request


def record_pledge(
    state: EscalationState,
    ref: "ReferenceDataset",
    source: str,
    medics: int,
    at: dt.datetime,
) -> PledgeEvent:
    """Validate and record one pledge against the open request.

    Domestic sources may not pledge more, cumulatively, than their
    pledgeable pool; the international source has no cap.
    """
    if not isinstance(medics, int) or isinstance(medics, bool) or medics < 1:
        raise InvalidPledge(f"pledge must be a positive integer, got {medics!r}")
    if state.phase not in (Phase.SOS1_ISSUED, Phase.SOS2_ISSUED):
        raise NotEligible(
            f"no open aid request to pledge against, phase is {state.phase.value}"
        )
    if source != INTERNATIONAL:
        region = ref.region_by_code(source)
        if region is None:
            raise InvalidSource(f"unknown pledge source: {source}")
        if source in state.affected:
            raise InvalidSource(f"affected regency {source} cannot pledge")
        already = state.pledged_from(source)
        if already + medics > region.medics_pledgeable:
            raise InvalidPledge(
                f"{source} has {region.medics_pledgeable - already} pledgeable medics left,"
                f" cannot pledge {medics}"
            )
    return PledgeEvent(source=source, medics=medics, at=at)


def evaluate_sos2(
    state: EscalationState, approver: str, at: dt.datetime
) -> tuple[object, SosRequest | None]:
    """Close stage 1: escalate internationally or resolve if covered.

    Returns (event, request); the request is None when the shortage is
    already fully pledged and the escalation resolves instead.
    """
    if state.phase is not Phase.SOS1_ISSUED:
        raise NotEligible(
            f"stage-2 evaluation requires phase Sos1Issued, current is {state.phase.value}"
        )
    if state.shortage > 0:
        if not approver or not str(approver).strip():
            raise NotEligible("stage-2 request requires a named approver")
        event = Sos2Event(approver=str(approver).strip(), amount=state.shortage, at=at)
        request = SosRequest(
            state.warning_id, 2, event.amount, (INTERNATIONAL,), at
        )
        return event, request
    return ResolvedEvent(at=at), None


def resolve(state: EscalationState, at: dt.datetime) -> ResolvedEvent:
    """Close out an escalation whose shortage has reached zero."""
    if state.phase not in (Phase.ASSESSED, Phase.SOS1_ISSUED, Phase.SOS2_ISSUED):
        raise NotEligible(f"cannot resolve in phase {state.phase.value}")
    if state.shortage != 0:
        raise NotEligible(f"shortage of {state.shortage} medics still open")
    return ResolvedEvent(at=at)


def is_overdue(state: EscalationState, now: dt.datetime, sla_minutes: int) -> bool:
    """True when an unresolved escalation has aged past the SLA."""
    if state.phase is Phase.RESOLVED or state.assessed_at is None:
        return False
    return now - state.assessed_at > dt.timedelta(minutes=sla_minutes)
