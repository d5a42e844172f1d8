"""Great-circle helpers used for ranking aid sources by distance."""

import math

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two points in kilometres."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    # clamp guards rounding noise at antipodal points
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def weighted_centroid(points) -> tuple[float, float]:
    """Weighted mean position of (lat, lon, weight) triples.

    Falls back to the unweighted mean when all weights are zero.
    Adequate for the regional scales involved; no spherical averaging.
    """
    points = list(points)
    if not points:
        raise ValueError("centroid of no points")
    total = float(sum(w for _, _, w in points))
    if total <= 0:
        lat = sum(p[0] for p in points) / len(points)
        lon = sum(p[1] for p in points) / len(points)
        return lat, lon
    lat = sum(p[0] * p[2] for p in points) / total
    lon = sum(p[1] * p[2] for p in points) / total
    return lat, lon
