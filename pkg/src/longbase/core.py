"""Domain records, CSV ingestion and day bucketing.

Reports CSV: ``participant_id,timestamp,kind,value`` (kind is ``mood`` or
``energy``, value an integer on the 1-9 Likert scale).
GPS CSV: ``participant_id,timestamp,lat,lon`` in decimal degrees.
"""

from __future__ import annotations

import csv
import enum
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

LIKERT_MIN = 1
LIKERT_MAX = 9
SECONDS_PER_DAY = 86400

REPORT_HEADER = ("participant_id", "timestamp", "kind", "value")
GPS_HEADER = ("participant_id", "timestamp", "lat", "lon")


class DataError(ValueError):
    """Raised for malformed or out-of-range input records."""


class Kind(str, enum.Enum):
    MOOD = "mood"
    ENERGY = "energy"

    @classmethod
    def parse(cls, token: str | Kind) -> Kind:
        try:
            return cls(token)
        except ValueError:
            raise DataError(f"unknown kind token {token!r}") from None


@dataclass(frozen=True, slots=True)
class LikertReport:
    participant_id: str
    timestamp: int
    kind: Kind
    value: int

    def __post_init__(self):
        if not LIKERT_MIN <= self.value <= LIKERT_MAX:
            raise DataError(f"value out of range: {self.value}")
        if self.timestamp < 0:
            raise DataError(f"negative timestamp: {self.timestamp}")


@dataclass(frozen=True, slots=True)
class GpsPoint:
    participant_id: str
    timestamp: int
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise DataError(f"lat out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise DataError(f"lon out of range: {self.lon}")
        if self.timestamp < 0:
            raise DataError(f"negative timestamp: {self.timestamp}")


@dataclass(frozen=True)
class ParticipantRecord:
    id: str
    reports: tuple[LikertReport, ...] = ()
    gps: tuple[GpsPoint, ...] = ()

    def __post_init__(self):
        for rec in (*self.reports, *self.gps):
            if rec.participant_id != self.id:
                raise DataError(f"record for {rec.participant_id!r} filed under {self.id!r}")
        object.__setattr__(self, "reports", tuple(sorted(self.reports, key=lambda r: r.timestamp)))
        object.__setattr__(self, "gps", tuple(sorted(self.gps, key=lambda g: g.timestamp)))

    def values(self, kind: Kind | str) -> list[int]:
        kind = Kind.parse(kind)
        return [r.value for r in self.reports if r.kind is kind]

    @cached_property
    def gps_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(timestamps, lat, lon) as arrays, in time order."""
        ts = np.fromiter((g.timestamp for g in self.gps), dtype=np.int64, count=len(self.gps))
        lat = np.fromiter((g.lat for g in self.gps), dtype=float, count=len(self.gps))
        lon = np.fromiter((g.lon for g in self.gps), dtype=float, count=len(self.gps))
        return ts, lat, lon


@dataclass(frozen=True)
class CohortDataset:
    participants: tuple[ParticipantRecord, ...]
    day_offset_seconds: int = 0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.participants:
            raise DataError("dataset has no participants")
        ids = [p.id for p in self.participants]
        if len(set(ids)) != len(ids):
            raise DataError("participant ids are not unique")
        object.__setattr__(self, "participants", tuple(self.participants))
        object.__setattr__(self, "_index", {p.id: p for p in self.participants})

    def __getitem__(self, participant_id: str) -> ParticipantRecord:
        return self._index[participant_id]

    def __len__(self):
        return len(self.participants)

    def __iter__(self):
        return iter(self.participants)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.participants]


def local_day(timestamp: int, day_offset_seconds: int = 0) -> int:
    return (int(timestamp) - int(day_offset_seconds)) // SECONDS_PER_DAY


def _read_rows(path, header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or tuple(h.strip() for h in first) != header:
            raise DataError(f"{path}: expected header {','.join(header)}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, row


def _parse_int(token: str) -> int:
    # sub-second precision is dropped
    try:
        return int(token)
    except ValueError:
        return int(float(token))


def load_reports(path, kind_filter: Kind | str | None = None) -> list[LikertReport]:
    """Load and validate a reports CSV, sorted by (participant_id, timestamp)."""
    wanted = Kind.parse(kind_filter) if kind_filter is not None else None
    out = []
    for line, (pid, ts, kind, value) in _read_rows(path, REPORT_HEADER):
        try:
            rep = LikertReport(pid, _parse_int(ts), Kind.parse(kind.strip()), int(value))
        except (ValueError, OverflowError) as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
        if wanted is None or rep.kind is wanted:
            out.append(rep)
    out.sort(key=lambda r: (r.participant_id, r.timestamp))
    return out


def load_gps(path) -> list[GpsPoint]:
    out = []
    for line, (pid, ts, lat, lon) in _read_rows(path, GPS_HEADER):
        try:
            out.append(GpsPoint(pid, _parse_int(ts), float(lat), float(lon)))
        except (ValueError, OverflowError) as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
    out.sort(key=lambda g: (g.participant_id, g.timestamp))
    return out


def assemble_dataset(
    reports: Iterable[LikertReport],
    gps: Iterable[GpsPoint],
    day_offset_seconds: int = 0,
) -> CohortDataset:
    """Group both streams by participant; anyone seen in either stream is kept."""
    by_report: dict[str, list[LikertReport]] = {}
    by_gps: dict[str, list[GpsPoint]] = {}
    for r in reports:
        by_report.setdefault(r.participant_id, []).append(r)
    for g in gps:
        by_gps.setdefault(g.participant_id, []).append(g)
    ids = sorted(set(by_report) | set(by_gps))
    if not ids:
        raise DataError("both report and GPS streams are empty")
    participants = tuple(
        ParticipantRecord(pid, tuple(by_report.get(pid, ())), tuple(by_gps.get(pid, ())))
        for pid in ids
    )
    return CohortDataset(participants, day_offset_seconds)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def reports_to_csv(reports: Sequence[LikertReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in reports:
        w.writerow((r.participant_id, r.timestamp, r.kind.value, r.value))
    return buf.getvalue()


def gps_to_csv(points: Sequence[GpsPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GPS_HEADER)
    for g in points:
        w.writerow((g.participant_id, g.timestamp, _fmt_float(g.lat), _fmt_float(g.lon)))
    return buf.getvalue()


def write_reports(path, reports: Sequence[LikertReport]) -> Path:
    path = Path(path)
    path.write_text(reports_to_csv(reports), encoding="utf-8", newline="")
    return path


def write_gps(path, points: Sequence[GpsPoint]) -> Path:
    path = Path(path)
    path.write_text(gps_to_csv(points), encoding="utf-8", newline="")
    return path


def all_reports(dataset: CohortDataset) -> list[LikertReport]:
    return [r for p in dataset for r in p.reports]


def all_gps(dataset: CohortDataset) -> list[GpsPoint]:
    return [g for p in dataset for g in p.gps]
