"""Record live service responses into tests/fixtures/.

Drives the real engine through a small scripted scenario and saves
every response the console tests replay later.  Run from the frontend
directory after installing the Python package:

    python3 scripts/record_fixtures.py

The clock is scripted so the recordings are stable: warning one is
deliberately left to age past the SLA before the inbox snapshot.
"""

from __future__ import annotations

import datetime as dt
import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from quakedesk.api import create_app
from quakedesk.ingest import load_seed_dataset
from quakedesk.service import Engine

TOKEN = "console-test-token"
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


class ScriptedClock:
    def __init__(self):
        self.now = dt.datetime(2026, 1, 5, 3, 0, tzinfo=dt.timezone.utc)

    def __call__(self):
        self.now += dt.timedelta(minutes=1)
        return self.now


def warning_payload(wid, issued, regencies, magnitude):
    return {
        "id": wid,
        "issued_at": issued,
        "date": issued[:10],
        "time": "03:02:11",
        "latitude": 5.4,
        "longitude": 95.5,
        "magnitude": magnitude,
        "depth_km": 20.0,
        "epicenter_desc": "off the west coast",
        "affected_regencies": regencies,
        "risk_note": "tsunami watch",
    }


def main() -> int:
    ref, catalog = load_seed_dataset()
    recorded: dict[str, object] = {}

    with tempfile.TemporaryDirectory() as tmp:
        clock = ScriptedClock()
        engine = Engine(Path(tmp), ref, catalog, clock=clock)
        engine.load_catalog_facts()
        client = TestClient(create_app(engine, write_token=TOKEN))
        auth = {"Authorization": f"Bearer {TOKEN}"}

        def save(name, response, expect=200):
            assert response.status_code == expect, (
                name,
                response.status_code,
                response.text,
            )
            recorded[name] = response.json()

        save(
            "post_warning_aceh",
            client.post(
                "/warnings",
                json=warning_payload(
                    "w-aceh-01", "2026-01-05T03:10:00Z", "ACH-01,ACH-02", 8.4
                ),
                headers=auth,
            ),
            expect=201,
        )
        # let the first warning age past the 60 minute SLA, then take
        # in a fully covered one so the inbox shows both states
        clock.now += dt.timedelta(hours=2)
        save(
            "post_warning_yogya",
            client.post(
                "/warnings",
                json=warning_payload(
                    "w-yogya-02", "2026-01-05T05:20:00Z", "YOG-01", 5.6
                ),
                headers=auth,
            ),
            expect=201,
        )

        save("warnings", client.get("/warnings"))
        save("assessment_aceh", client.get("/assessments/w-aceh-01"))
        save("assessment_covered", client.get("/assessments/w-yogya-02"))
        save("escalation_assessed", client.get("/escalations/w-aceh-01"))
        save("escalation_covered", client.get("/escalations/w-yogya-02"))

        save(
            "whatif_standard250",
            client.post(
                "/assessments/w-aceh-01/whatif",
                json={"persons_per_medic": 250},
                headers=auth,
            ),
        )
        save(
            "whatif_invalid",
            client.post(
                "/assessments/w-aceh-01/whatif",
                json={"affected_population": -5},
                headers=auth,
            ),
            expect=400,
        )
        # the what-if must not have touched the stored assessment
        save("assessment_aceh_after_whatif", client.get("/assessments/w-aceh-01"))
        if recorded["assessment_aceh"] != recorded["assessment_aceh_after_whatif"]:
            raise AssertionError("what-if mutated the stored assessment")

        save(
            "escalation_sos1",
            client.post(
                "/escalations/w-aceh-01/sos1",
                json={"approver": "duty officer"},
                headers=auth,
            ),
        )
        first_source = recorded["escalation_sos1"]["sources"][0]["code"]
        save(
            "escalation_pledged",
            client.post(
                "/escalations/w-aceh-01/pledges",
                json={"source": first_source, "medics": 100},
                headers=auth,
            ),
        )
        save(
            "escalation_sos2",
            client.post(
                "/escalations/w-aceh-01/sos2",
                json={"approver": "coordinator"},
                headers=auth,
            ),
        )
        save(
            "escalation_intl_pledged",
            client.post(
                "/escalations/w-aceh-01/pledges",
                json={"source": "INTERNATIONAL", "medics": 50},
                headers=auth,
            ),
        )
        save(
            "escalation_resolved",
            client.post("/escalations/w-aceh-01/resolve", json={}, headers=auth),
        )

        save("olap_province_band", client.get("/olap/query?group_by=province,band"))
        save(
            "olap_year_band8",
            client.get("/olap/query?group_by=year&filter=band%3D8.0%2B"),
        )
        save("healthz", client.get("/healthz"))

    OUT.mkdir(parents=True, exist_ok=True)
    for name, body in recorded.items():
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path.relative_to(OUT.parent.parent)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
