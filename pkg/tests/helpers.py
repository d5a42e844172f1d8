"""Shared test helpers: record builders and independent math oracles."""

from __future__ import annotations

import math


def warning_record(**over) -> dict:
    rec = {
        "id": "w-test-1",
        "issued_at": "2026-01-05T03:10:00Z",
        "date": "2026-01-05",
        "time": "03:02:11",
        "latitude": 5.4,
        "longitude": 95.5,
        "magnitude": 8.4,
        "depth_km": 20.0,
        "epicenter_desc": "off the west coast",
        "affected_regencies": "ACH-01,ACH-02",
        "risk_note": "tsunami watch",
    }
    rec.update(over)
    return rec


def sphere_distance_km(lat1, lon1, lat2, lon2, radius_km=6371.0):
    """Great-circle distance via the atan2 form (independent of the
    package's asin-based haversine)."""
    p1, l1 = math.radians(lat1), math.radians(lon1)
    p2, l2 = math.radians(lat2), math.radians(lon2)
    dl = l2 - l1
    y = math.hypot(
        math.cos(p2) * math.sin(dl),
        math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl),
    )
    x = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return radius_km * math.atan2(y, x)


def make_group_oracle(geo_parent):
    """Build a (facts, axes) -> {coords: measure-tuple} brute-force oracle."""

    def member(fact, dimension, level):
        if dimension == "time":
            if level == "year":
                return fact.date.year
            if level == "month":
                return (fact.date.year, fact.date.month)
            return fact.date
        if dimension == "geography":
            if level == "province":
                return geo_parent[fact.regency_code]
            return fact.regency_code
        return fact.band_label

    def oracle(facts, axes):
        out = {}
        for f in facts:
            coords = tuple(member(f, d, lv) for d, lv in axes)
            prev = out.get(coords, (0, 0, 0, 0))
            out[coords] = (
                prev[0] + f.deaths,
                prev[1] + f.injured,
                prev[2] + f.buildings_destroyed,
                prev[3] + f.event_count,
            )
        return out

    return oracle


def cube_as_plain(cube) -> dict:
    """Cube cells as {coords: (deaths, injured, buildings, events)}."""
    return {
        coords: (m.deaths, m.injured, m.buildings_destroyed, m.event_count)
        for coords, m in cube.cells.items()
    }
