"""Daily "more energetic than usual" labels and the feature/label join."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .core import CohortDataset, Kind, ParticipantRecord, local_day
from .features import DailyFeatures


@dataclass(frozen=True)
class DailyLabel:
    participant_id: str
    day: int
    label: int
    day_mean_energy: float
    personal_mean: float


@dataclass(frozen=True)
class DailyRow:
    participant_id: str
    day: int
    features: tuple[float, ...]
    label: int


@dataclass(frozen=True)
class JoinReport:
    n_joined: int
    features_without_label: int
    labels_without_features: int


def daily_energy_labels(participant: ParticipantRecord, day_offset_seconds: int = 0) -> list[DailyLabel]:
    """Label each day 1 when its mean energy is strictly above the participant's
    mean of daily means, else 0.  Days without energy reports get no row."""
    by_day: dict[int, list[int]] = {}
    for r in participant.reports:
        if r.kind is Kind.ENERGY:
            by_day.setdefault(local_day(r.timestamp, day_offset_seconds), []).append(r.value)
    if not by_day:
        raise ValueError(f"participant {participant.id} has no energy reports")
    days = sorted(by_day)
    day_means = [sum(by_day[d]) / len(by_day[d]) for d in days]
    personal_mean = sum(day_means) / len(day_means)
    return [
        DailyLabel(participant.id, d, int(m > personal_mean), m, personal_mean)
        for d, m in zip(days, day_means)
    ]


def cohort_labels(dataset: CohortDataset) -> list[DailyLabel]:
    out = []
    for p in sorted(dataset, key=lambda p: p.id):
        if any(r.kind is Kind.ENERGY for r in p.reports):
            out.extend(daily_energy_labels(p, dataset.day_offset_seconds))
    return out


def join_rows(
    features: Sequence[DailyFeatures], labels: Sequence[DailyLabel]
) -> tuple[list[DailyRow], JoinReport]:
    """Inner join on (participant_id, day), ordered by that key."""
    feat = {(f.participant_id, f.day): f for f in features}
    lab = {(lb.participant_id, lb.day): lb for lb in labels}
    keys = sorted(feat.keys() & lab.keys())
    rows = [DailyRow(k[0], k[1], feat[k].vector, lab[k].label) for k in keys]
    report = JoinReport(
        n_joined=len(rows),
        features_without_label=len(feat) - len(keys),
        labels_without_features=len(lab) - len(keys),
    )
    return rows, report
