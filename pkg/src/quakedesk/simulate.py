"""Seeded synthetic scenario: generate a region set, a catalog, one
warning, and drive the full escalation to resolution.

Everything derives from the seed and a fixed logical clock, so two runs
with the same arguments produce byte-identical reports.  No wall-clock
time or filesystem path leaks into the output.
"""

import datetime as dt
import random
import tempfile
from dataclasses import dataclass

from .escalation import INTERNATIONAL
from .ingest import ReferenceDataset
from .model import UTC, HistoricalQuake, Region, RegionKind, validate_quake_event
from .service import Engine


class TickClock:
    """Logical clock: every call advances one fixed step."""

    def __init__(self, start=dt.datetime(2021, 1, 1, tzinfo=UTC), step_seconds=60):
        self.now = start
        self.step = dt.timedelta(seconds=step_seconds)

    def __call__(self) -> dt.datetime:
        stamp = self.now
        self.now = stamp + self.step
        return stamp


@dataclass
class Scenario:
    ref: ReferenceDataset
    catalog: list
    warning_record: dict


_PROVINCE_NAMES = ("North Province", "Central Province", "South Province")


def build_scenario(seed: int, regencies: int = 12, magnitude: float = 7.6) -> Scenario:
    """Deterministically generate reference data, history and a warning."""
    if regencies < 3:
        raise ValueError("need at least 3 regencies for a scenario")
    if not 0.0 <= magnitude <= 10.0:
        raise ValueError("magnitude outside [0, 10]")
    rng = random.Random(seed)

    provinces = []
    for i, name in enumerate(_PROVINCE_NAMES, start=1):
        provinces.append(
            Region(
                code=f"P{i:02d}",
                name=name,
                kind=RegionKind.PROVINCE,
                centroid_lat=round(rng.uniform(-9.0, 5.0), 4),
                centroid_lon=round(rng.uniform(95.0, 119.0), 4),
            )
        )

    regency_list = []
    for i in range(1, regencies + 1):
        parent = provinces[(i - 1) % len(provinces)]
        population = rng.randrange(30_000, 900_000, 1000)
        # medic density well below the 1-per-400 planning standard, so a
        # simulated quake always produces a shortage to escalate
        medics = population // rng.choice((700, 900, 1100, 1300))
        regency_list.append(
            Region(
                code=f"R{i:02d}",
                name=f"Regency {i:02d}",
                kind=RegionKind.REGENCY,
                parent_code=parent.code,
                population=population,
                medics_available=medics,
                medics_pledgeable=int(medics * rng.uniform(0.2, 0.6)),
                centroid_lat=round(parent.centroid_lat + rng.uniform(-1.5, 1.5), 4),
                centroid_lon=round(parent.centroid_lon + rng.uniform(-1.5, 1.5), 4),
            )
        )

    ref = ReferenceDataset(
        provinces=provinces,
        regencies=regency_list,
        persons_per_medic=400,
        fallback_radius_km={"8.0+": 300.0, "7.0–7.9": 200.0},
    )

    catalog = []
    for i in range(1, 9):
        mag = round(rng.uniform(5.0, 9.3), 1)
        exposed = rng.randrange(100_000, 5_000_000, 1000)
        severity = (mag / 9.3) ** 4
        deaths = int(exposed * rng.uniform(0.0005, 0.02) * severity)
        injured = min(deaths * rng.randint(2, 5), exposed - deaths)
        event = validate_quake_event(
            {
                "id": f"hist-{seed}-{i:02d}",
                "date": dt.date(1988 + 4 * i, rng.randint(1, 12), rng.randint(1, 28)).isoformat(),
                "time": dt.time(rng.randint(0, 23), rng.randint(0, 59)).isoformat(),
                "latitude": round(rng.uniform(-9.0, 5.0), 3),
                "longitude": round(rng.uniform(95.0, 119.0), 3),
                "magnitude": mag,
                "epicenter_desc": f"Historic zone {i}",
            }
        )
        catalog.append(
            HistoricalQuake(
                event=event,
                deaths=deaths,
                injured=injured,
                buildings_destroyed=int(deaths * rng.uniform(1.0, 4.0)),
                exposed_population=exposed,
            )
        )

    struck = rng.sample([r.code for r in regency_list], 3)
    first = next(r for r in regency_list if r.code == struck[0])
    warning_record = {
        "id": f"sim-{seed}-w1",
        "issued_at": "2021-01-01T00:00:00Z",
        "date": "2021-01-01",
        "time": "00:00:00",
        "latitude": first.centroid_lat,
        "longitude": first.centroid_lon,
        "magnitude": magnitude,
        "depth_km": round(rng.uniform(5.0, 60.0), 1),
        "epicenter_desc": f"near {first.name}",
        "affected_regencies": ",".join(struck),
        "risk_note": "synthetic scenario",
    }
    return Scenario(ref=ref, catalog=catalog, warning_record=warning_record)


def run_scenario(seed: int, regencies: int = 12, magnitude: float = 7.6) -> str:
    """Drive warning -> assessment -> SOS-1 -> pledges -> SOS-2 -> resolve.

    Returns the textual report; all state lives in a throwaway
    directory that is never mentioned in the output.
    """
    scenario = build_scenario(seed, regencies, magnitude)
    lines = [
        f"scenario seed={seed} regencies={regencies} magnitude={magnitude}",
        f"regions: {len(scenario.ref.provinces)} provinces, {len(scenario.ref.regencies)} regencies",
    ]
    with tempfile.TemporaryDirectory(prefix="quakedesk-sim-") as workdir:
        engine = Engine(
            workdir, scenario.ref, scenario.catalog, clock=TickClock()
        )
        stats = engine.load_catalog_facts()
        lines.append(
            f"catalog: {len(scenario.catalog)} historical quakes,"
            f" {stats.inserted} facts loaded"
        )

        wid = scenario.warning_record["id"]
        response = engine.ingest_warning(scenario.warning_record)
        assessment = response["assessment"]
        lines.append(
            f"warning {wid}: magnitude {magnitude},"
            f" {len(assessment['affected_regencies'])} regencies affected"
        )
        lines.append(
            "assessment: population={affected_population}"
            " medics_required={medics_required}"
            " medics_available={medics_available}"
            " shortage={medic_shortage}".format(**assessment)
        )
        checklist = assessment["checklist"]
        lines.append(
            "checklist: tents={tents} shelter_sites={shelter_sites}"
            " kitchens={kitchens} rice_kg={rice_kg:.0f}"
            " blankets={blankets:.0f}".format(**checklist)
        )
        casualties = assessment["casualties"]
        lines.append(
            "prediction: deaths={predicted_deaths}"
            " injured={predicted_injured}".format(**casualties)
        )

        view = engine.issue_sos1(wid, f"duty-officer-{seed}")
        lines.append(
            f"sos1 approved: requesting {view['sos1_amount']} medics"
            f" from {len(view['sources'])} candidate sources"
        )

        shortage = view["medic_shortage"]
        for candidate in view["sources"][:2]:
            if candidate["medics_pledgeable"] < 1:
                continue
            amount = min(candidate["medics_pledgeable"], max(1, shortage // 3))
            view = engine.record_pledge(wid, candidate["code"], amount)
            shortage = view["medic_shortage"]
            lines.append(
                f"pledge {candidate['code']} -> {amount} medics"
                f" (shortage {shortage})"
            )

        view = engine.issue_sos2(wid, f"coordinator-{seed}")
        lines.append(f"sos2 approved: requesting {view['sos2_amount']} medics internationally")

        view = engine.record_pledge(wid, INTERNATIONAL, view["medic_shortage"])
        lines.append(
            f"pledge {INTERNATIONAL} -> covers remaining"
            f" (shortage {view['medic_shortage']})"
        )

        view = engine.resolve(wid)
        lines.append(f"resolved: phase {view['phase']}")
        lines.append(f"events logged: {engine.log_seq}")
        lines.append(f"state hash: {engine.state_hash()}")
    return "\n".join(lines)
