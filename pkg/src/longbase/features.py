"""GPS mobility features: behavioral variance and daily location features."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .core import SECONDS_PER_DAY, CohortDataset, GpsPoint, ParticipantRecord

EARTH_RADIUS_M = 6_371_000.0
VARIANCE_FLOOR = 1e-12
DEFAULT_GRID_M = 500.0

FEATURE_NAMES = (
    "n_points",
    "day_location_variance",
    "total_distance_m",
    "radius_of_gyration_m",
    "n_clusters",
    "cluster_entropy",
)


@dataclass(frozen=True)
class DailyFeatures:
    participant_id: str
    day: int
    n_points: int
    day_location_variance: float
    total_distance_m: float
    radius_of_gyration_m: float
    n_clusters: int
    cluster_entropy: float

    @property
    def vector(self) -> tuple[float, ...]:
        return tuple(float(v) for v in astuple(self)[2:])


@dataclass(frozen=True)
class BehavioralVariance:
    participant_id: str
    value: float


def haversine_m(a: GpsPoint, b: GpsPoint) -> float:
    return float(_haversine(a.lat, a.lon, b.lat, b.lon))


def _haversine(lat1, lon1, lat2, lon2):
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def log_location_variance(lat, lon) -> float:
    """ln(var(lat) + var(lon) + 1e-12) in squared degrees, population variance."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if lat.size == 0:
        raise ValueError("location variance of an empty point set")
    return math.log(float(np.var(lat) + np.var(lon)) + VARIANCE_FLOOR)


def behavioral_variance(points) -> BehavioralVariance:
    """Log total location variance over a participant's whole GPS log.

    Accepts a sequence of GpsPoint or a ParticipantRecord.
    """
    if isinstance(points, ParticipantRecord):
        _, lat, lon = points.gps_arrays
        pid = points.id
    else:
        points = list(points)
        if not points:
            raise ValueError("behavioral variance needs at least one GPS point")
        lat = [p.lat for p in points]
        lon = [p.lon for p in points]
        pid = points[0].participant_id
    return BehavioralVariance(pid, log_location_variance(lat, lon))


def _grid_cells(lat, lon, anchor_lat, anchor_lon, grid_m):
    # equirectangular projection around the anchor point
    k = math.pi / 180.0 * EARTH_RADIUS_M
    north = (lat - anchor_lat) * k
    east = (lon - anchor_lon) * k * math.cos(math.radians(anchor_lat))
    return np.floor(north / grid_m).astype(np.int64), np.floor(east / grid_m).astype(np.int64)


def _day_features(pid, day, lat, lon, anchor, grid_m) -> DailyFeatures:
    n = lat.size
    if n > 1:
        steps = _haversine(lat[:-1], lon[:-1], lat[1:], lon[1:])
        total = float(steps.sum())
    else:
        total = 0.0
    to_centroid = _haversine(lat, lon, lat.mean(), lon.mean())
    rog = float(np.sqrt(np.mean(to_centroid**2)))
    rows, cols = _grid_cells(lat, lon, anchor[0], anchor[1], grid_m)
    _, counts = np.unique(np.stack([rows, cols], axis=1), axis=0, return_counts=True)
    p = counts / n
    entropy = float(-(p * np.log(p)).sum()) if len(counts) > 1 else 0.0
    return DailyFeatures(
        participant_id=pid,
        day=int(day),
        n_points=int(n),
        day_location_variance=log_location_variance(lat, lon),
        total_distance_m=total,
        radius_of_gyration_m=rog,
        n_clusters=int(len(counts)),
        cluster_entropy=entropy,
    )


def _days(ts, day_offset_seconds):
    return (ts - int(day_offset_seconds)) // SECONDS_PER_DAY


def daily_features(
    participant: ParticipantRecord,
    day: int,
    grid_m: float = DEFAULT_GRID_M,
    day_offset_seconds: int = 0,
) -> DailyFeatures:
    ts, lat, lon = participant.gps_arrays
    mask = _days(ts, day_offset_seconds) == day
    if not mask.any():
        raise ValueError(f"participant {participant.id} has no GPS points on day {day}")
    return _day_features(participant.id, day, lat[mask], lon[mask], (lat[0], lon[0]), grid_m)


def participant_features(
    participant: ParticipantRecord,
    grid_m: float = DEFAULT_GRID_M,
    day_offset_seconds: int = 0,
) -> list[DailyFeatures]:
    ts, lat, lon = participant.gps_arrays
    if ts.size == 0:
        return []
    days = _days(ts, day_offset_seconds)
    # gps is time sorted, so day indices are non-decreasing
    bounds = np.flatnonzero(np.diff(days)) + 1
    starts = np.concatenate([[0], bounds])
    stops = np.concatenate([bounds, [ts.size]])
    anchor = (lat[0], lon[0])
    return [
        _day_features(participant.id, days[a], lat[a:b], lon[a:b], anchor, grid_m)
        for a, b in zip(starts, stops)
    ]


def feature_matrix(dataset: CohortDataset, grid_m: float = DEFAULT_GRID_M) -> list[DailyFeatures]:
    """One row per (participant, day) with GPS data, ordered by (id, day)."""
    rows = []
    for p in sorted(dataset, key=lambda p: p.id):
        rows.extend(participant_features(p, grid_m, dataset.day_offset_seconds))
    return rows


def cohort_behavioral_variance(dataset: CohortDataset) -> dict[str, float]:
    return {p.id: behavioral_variance(p).value for p in dataset if p.gps}
