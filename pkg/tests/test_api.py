"""HTTP surface: statuses, auth, response envelopes."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from quakedesk.api import create_app
from quakedesk.service import Engine

from .helpers import warning_record

TOKEN = "test-write-token"
AUTH = {"Authorization": f"Bearer {TOKEN}"}


@pytest.fixture()
def client(tmp_path, seed_ref, seed_catalog):
    engine = Engine(tmp_path, seed_ref, seed_catalog)
    engine.load_catalog_facts()
    return TestClient(create_app(engine, write_token=TOKEN))


@pytest.fixture()
def open_client(tmp_path, seed_ref, seed_catalog):
    engine = Engine(tmp_path, seed_ref, seed_catalog)
    return TestClient(create_app(engine, write_token=None))


def _post_warning(client, **over):
    return client.post("/warnings", json=warning_record(**over), headers=AUTH)


def test_healthz(client):
    res = client.get("/healthz")
    assert res.status_code == 200
    body = res.json()
    assert body["status"] == "ok"
    assert "log_seq" in body


def test_every_response_carries_log_seq(client):
    _post_warning(client)
    paths = ["/healthz", "/warnings", "/assessments/w-test-1",
             "/escalations/w-test-1", "/historical", "/regions"]
    for path in paths:
        body = client.get(path).json()
        assert "log_seq" in body, path
    # including errors
    body = client.get("/assessments/ghost").json()
    assert "log_seq" in body


def test_write_requires_token(client):
    res = client.post("/warnings", json=warning_record())
    assert res.status_code == 401
    res = client.post(
        "/warnings", json=warning_record(),
        headers={"Authorization": "Bearer wrong"},
    )
    assert res.status_code == 401


def test_reads_are_open(client):
    assert client.get("/warnings").status_code == 200


def test_no_token_configured_allows_writes(open_client):
    res = open_client.post("/warnings", json=warning_record())
    assert res.status_code == 201


def test_post_warning_round_trip(client):
    res = _post_warning(client)
    assert res.status_code == 201
    body = res.json()
    assert body["phase"] == "Assessed"
    assert body["assessment"]["medics_required"] == 200
    assert body["sos1_pending_approval"] is True

    listing = client.get("/warnings").json()
    assert [w["id"] for w in listing["items"]] == ["w-test-1"]
    assert listing["items"][0]["phase"] == "Assessed"


def test_duplicate_warning_conflict(client):
    _post_warning(client)
    res = _post_warning(client)
    assert res.status_code == 409
    assert res.json()["error"] == "DuplicateWarning"


def test_invalid_warning_400_with_violations(client):
    res = _post_warning(client, magnitude=99, latitude=200)
    assert res.status_code == 400
    body = res.json()
    assert body["error"] == "ValidationError"
    fields = {v["field"] for v in body["violations"]}
    assert {"magnitude", "latitude"} <= fields


def test_unknown_ids_404(client):
    assert client.get("/assessments/ghost").status_code == 404
    assert client.get("/escalations/ghost").status_code == 404
    res = client.post("/escalations/ghost/sos1", json={"approver": "x"}, headers=AUTH)
    assert res.status_code == 404


def test_whatif_shapes_and_purity(client):
    _post_warning(client)
    res = client.post(
        "/assessments/w-test-1/whatif",
        json={"overrides": {"persons_per_medic": 250}},
        headers=AUTH,
    )
    assert res.status_code == 200
    assert res.json()["assessment"]["medics_required"] == 400

    # bare-object body works too
    res = client.post(
        "/assessments/w-test-1/whatif", json={"persons_per_medic": 125}, headers=AUTH
    )
    assert res.json()["assessment"]["medics_required"] == 800

    # stored assessment untouched
    assert client.get("/assessments/w-test-1").json()["assessment"]["medics_required"] == 200


def test_whatif_rejects_bad_bodies(client):
    _post_warning(client)
    res = client.post("/assessments/w-test-1/whatif", json=[1, 2], headers=AUTH)
    assert res.status_code == 400
    res = client.post(
        "/assessments/w-test-1/whatif", json={"analog_k": 1}, headers=AUTH
    )
    assert res.status_code == 400
    assert res.json()["error"] == "ValidationError"


def test_escalation_flow_over_http(client):
    _post_warning(client)
    res = client.post("/escalations/w-test-1/sos1", json={"approver": "duty"}, headers=AUTH)
    assert res.status_code == 200
    view = res.json()
    assert view["phase"] == "Sos1Issued"
    first = view["sources"][0]["code"]

    res = client.post(
        "/escalations/w-test-1/pledges",
        json={"source": first, "medics": 100},
        headers=AUTH,
    )
    assert res.json()["medic_shortage"] == 50

    res = client.post("/escalations/w-test-1/sos2", json={"approver": "coord"}, headers=AUTH)
    assert res.json()["phase"] == "Sos2Issued"
    assert res.json()["sos2_amount"] == 50

    res = client.post(
        "/escalations/w-test-1/pledges",
        json={"source": "INTERNATIONAL", "medics": 50},
        headers=AUTH,
    )
    assert res.json()["medic_shortage"] == 0

    res = client.post("/escalations/w-test-1/resolve", json={}, headers=AUTH)
    assert res.json()["phase"] == "Resolved"

    view = client.get("/escalations/w-test-1").json()
    assert view["phase"] == "Resolved"
    assert view["total_pledged"] == 150


def test_sos1_retry_conflicts(client):
    _post_warning(client)
    client.post("/escalations/w-test-1/sos1", json={"approver": "duty"}, headers=AUTH)
    res = client.post("/escalations/w-test-1/sos1", json={"approver": "duty"}, headers=AUTH)
    assert res.status_code == 409
    assert res.json()["error"] == "NotEligible"


def test_sos1_requires_approver_field(client):
    _post_warning(client)
    res = client.post("/escalations/w-test-1/sos1", json={}, headers=AUTH)
    assert res.status_code == 409  # refused by the eligibility guard


def test_pledge_validation_statuses(client):
    _post_warning(client)
    client.post("/escalations/w-test-1/sos1", json={"approver": "duty"}, headers=AUTH)

    res = client.post(
        "/escalations/w-test-1/pledges",
        json={"source": "XX-404", "medics": 5}, headers=AUTH,
    )
    assert res.status_code == 400
    assert res.json()["error"] == "InvalidSource"

    # float medics: whole numbers coerce, fractions refused
    res = client.post(
        "/escalations/w-test-1/pledges",
        json={"source": "YOG-01", "medics": 25.0}, headers=AUTH,
    )
    assert res.status_code == 200
    res = client.post(
        "/escalations/w-test-1/pledges",
        json={"source": "YOG-01", "medics": 25.5}, headers=AUTH,
    )
    assert res.status_code == 400
    assert res.json()["error"] == "InvalidPledge"


def test_olap_query_http(client):
    res = client.get("/olap/query", params={"group_by": "band"})
    assert res.status_code == 200
    body = res.json()
    assert body["columns"][0] == "band"
    assert body["totals"]["deaths"] == 216_080

    res = client.get(
        "/olap/query",
        params=[("group_by", "regency"), ("filter", "band=8.0+"), ("filter", "year=2004")],
    )
    rows = res.json()["rows"]
    assert [r["regency"] for r in rows] == ["aceh"]

    assert client.get("/olap/query", params={"group_by": "continent"}).status_code == 400
    assert (
        client.get("/olap/query", params={"group_by": "band", "filter": "band=nope"}).status_code
        == 400
    )


def test_historical_and_regions(client):
    hist = client.get("/historical").json()["items"]
    assert len(hist) == 5
    assert {h["id"] for h in hist} >= {"aceh-2004", "nias-2005"}
    regions = client.get("/regions").json()
    assert len(regions["provinces"]) == 3
    assert len(regions["regencies"]) == 7
    assert regions["regencies"][0]["medics_pledgeable"] >= 0
