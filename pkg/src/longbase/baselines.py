"""Population and personal mode baselines.

The population baseline predicts the single most frequent state pooled
over every participant; the personal baseline predicts each participant's
own most frequent state.  Any model of longitudinal self-reports has to
beat the personal one to be worth anything.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .core import CohortDataset, DataError, Kind


class EmptyDomainError(DataError):
    """No observations of the requested kind."""


def mode_of(values: Iterable[int]) -> int:
    """Most frequent value; ties go to the smallest value."""
    counts = Counter(values)
    if not counts:
        raise ValueError("mode of empty sequence")
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


@dataclass(frozen=True)
class BaselineResult:
    scheme: str
    kind: str
    per_participant_accuracy: Mapping[str, float]
    n_observations: Mapping[str, int]
    micro_accuracy: float
    macro_accuracy: float
    global_mode: int | None = None
    per_participant_mode: Mapping[str, int] = field(default_factory=dict)
    excluded: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "kind": self.kind,
            "global_mode": self.global_mode,
            "per_participant_mode": dict(self.per_participant_mode),
            "per_participant_accuracy": dict(self.per_participant_accuracy),
            "n_observations": dict(self.n_observations),
            "micro_accuracy": self.micro_accuracy,
            "macro_accuracy": self.macro_accuracy,
            "excluded": list(self.excluded),
        }


def _grouped(dataset: CohortDataset, kind: Kind) -> tuple[dict[str, list[int]], list[str]]:
    groups, excluded = {}, []
    for p in dataset:
        vals = p.values(kind)
        if vals:
            groups[p.id] = vals
        else:
            excluded.append(p.id)
    if not groups:
        raise EmptyDomainError(f"no {kind.value} reports in dataset")
    return groups, excluded


def _result(scheme, kind, groups, predicted, excluded, global_mode=None) -> BaselineResult:
    acc, n_obs = {}, {}
    hits_total = obs_total = 0
    for pid, vals in groups.items():
        hits = sum(v == predicted[pid] for v in vals)
        acc[pid] = hits / len(vals)
        n_obs[pid] = len(vals)
        hits_total += hits
        obs_total += len(vals)
    return BaselineResult(
        scheme=scheme,
        kind=kind.value,
        per_participant_accuracy=acc,
        n_observations=n_obs,
        micro_accuracy=hits_total / obs_total,
        macro_accuracy=sum(acc.values()) / len(acc),
        global_mode=global_mode,
        per_participant_mode=dict(predicted) if scheme == "personal" else {},
        excluded=tuple(excluded),
    )


def population_baseline(dataset: CohortDataset, kind: Kind | str) -> BaselineResult:
    kind = Kind.parse(kind)
    groups, excluded = _grouped(dataset, kind)
    pooled = mode_of(v for vals in groups.values() for v in vals)
    return _result("population", kind, groups, {pid: pooled for pid in groups}, excluded, pooled)


def personal_baseline(dataset: CohortDataset, kind: Kind | str) -> BaselineResult:
    kind = Kind.parse(kind)
    groups, excluded = _grouped(dataset, kind)
    modes = {pid: mode_of(vals) for pid, vals in groups.items()}
    return _result("personal", kind, groups, modes, excluded)
