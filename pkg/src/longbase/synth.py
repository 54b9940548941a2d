"""Seeded synthetic cohort with planted personal modes and mobility-energy coupling.

Every participant gets a personal mood mode, an energy centre, a mobility
scale and a home location.  Each day they make one out-and-back excursion
whose length is log-normal around their mobility scale; the day's latent
energy rises with the (within-person standardized, log) excursion length
times their coupling strength.  All randomness comes from counter-based
substreams keyed by (participant) and (participant, day), so the output is
a pure function of the config.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._random import substream
from .core import (
    LIKERT_MAX,
    LIKERT_MIN,
    SECONDS_PER_DAY,
    CohortDataset,
    GpsPoint,
    Kind,
    LikertReport,
    ParticipantRecord,
    all_gps,
    all_reports,
    write_gps,
    write_reports,
)

M_PER_DEG = math.pi / 180.0 * 6_371_000.0
_DROPOUT_KEY = 2**31


@dataclass(frozen=True)
class SynthConfig:
    n_participants: int = 73
    study_days: int = 56
    prompts_per_day: int = 4
    likert_min: int = LIKERT_MIN
    likert_max: int = LIKERT_MAX
    mode_concentration: float = 0.6
    gps_samples_per_day: int = 48
    mobility_scale_range: tuple[float, float] = (500.0, 20_000.0)
    daily_distance_sigma: float = 0.6
    coupling: float = 0.0
    couple_by_variance: bool = False
    energy_center_range: tuple[float, float] = (3.5, 6.5)
    day_noise_sd: float = 0.5
    missing_prob: float = 0.0
    n_dropouts: int = 0
    dropout_max_days: int = 10
    home_lat_range: tuple[float, float] = (37.70, 37.90)
    home_lon_range: tuple[float, float] = (-122.50, -122.20)
    gps_noise_m: float = 5.0
    start_timestamp: int = 1_475_280_000
    seed: int = 0

    def __post_init__(self):
        def need(ok, msg):
            if not ok:
                raise ValueError(msg)

        need(self.n_participants >= 1, "n_participants must be >= 1")
        need(self.study_days >= 1, "study_days must be >= 1")
        need(self.prompts_per_day >= 1, "prompts_per_day must be >= 1")
        need(self.gps_samples_per_day >= 1, "gps_samples_per_day must be >= 1")
        need(
            LIKERT_MIN <= self.likert_min and self.likert_min + 2 <= self.likert_max <= LIKERT_MAX,
            "likert bounds must satisfy 1 <= min, min+2 <= max <= 9",
        )
        need(0.0 < self.mode_concentration <= 1.0, "mode_concentration must be in (0, 1]")
        lo, hi = self.mobility_scale_range
        need(0.0 < lo <= hi, "mobility_scale_range must satisfy 0 < low <= high")
        need(self.daily_distance_sigma > 0.0, "daily_distance_sigma must be > 0")
        need(self.coupling >= 0.0, "coupling must be >= 0")
        need(self.energy_center_range[0] <= self.energy_center_range[1], "energy_center_range reversed")
        need(self.day_noise_sd >= 0.0, "day_noise_sd must be >= 0")
        need(0.0 <= self.missing_prob < 1.0, "missing_prob must be in [0, 1)")
        need(0 <= self.n_dropouts <= self.n_participants, "n_dropouts must be in [0, n_participants]")
        need(1 <= self.dropout_max_days, "dropout_max_days must be >= 1")
        need(-90 <= self.home_lat_range[0] <= self.home_lat_range[1] <= 90, "bad home_lat_range")
        need(-180 <= self.home_lon_range[0] <= self.home_lon_range[1] <= 180, "bad home_lon_range")
        need(self.gps_noise_m >= 0.0, "gps_noise_m must be >= 0")
        need(self.start_timestamp >= 0, "start_timestamp must be >= 0")
        need(self.seed >= 0, "seed must be >= 0")


@dataclass(frozen=True)
class ParticipantTruth:
    participant_id: str
    mood_mode: int
    energy_center: float
    mobility_scale_m: float
    coupling: float
    active_days: int
    home_lat: float
    home_lon: float


@dataclass(frozen=True)
class GroundTruth:
    participants: tuple[ParticipantTruth, ...] = field(default_factory=tuple)

    def __getitem__(self, participant_id: str) -> ParticipantTruth:
        for p in self.participants:
            if p.participant_id == participant_id:
                return p
        raise KeyError(participant_id)

    def to_json(self) -> str:
        return json.dumps({"participants": [asdict(p) for p in self.participants]}, indent=2) + "\n"


def participant_id(i: int) -> str:
    return f"p{i:03d}"


def _mood_values(rng, mode, n, cfg: SynthConfig) -> np.ndarray:
    keep = rng.random(n) < cfg.mode_concentration
    # off-mode reports: |shift| 1 or 2 with geometric weights 2:1, random sign
    mag = np.where(rng.random(n) < 2.0 / 3.0, 1, 2)
    sign = np.where(rng.random(n) < 0.5, -1, 1)
    vals = np.where(keep, mode, mode + sign * mag)
    return np.clip(vals, cfg.likert_min, cfg.likert_max).astype(int)


def _excursion(rng, distance_m, cfg: SynthConfig, home_lat, home_lon):
    """Out-and-back path between 08:00 and 20:00, at home otherwise."""
    g = cfg.gps_samples_per_day
    secs = np.arange(g) * (SECONDS_PER_DAY // g)
    phase = (secs - 8 * 3600) / (12 * 3600)
    away = np.where((phase >= 0) & (phase < 1), (distance_m / 2.0) * (1.0 - np.abs(2.0 * phase - 1.0)), 0.0)
    heading = rng.uniform(0.0, 2.0 * math.pi)
    north = away * math.cos(heading) + rng.normal(0.0, cfg.gps_noise_m, g)
    east = away * math.sin(heading) + rng.normal(0.0, cfg.gps_noise_m, g)
    lat = np.clip(home_lat + north / M_PER_DEG, -90.0, 90.0)
    lon = home_lon + east / (M_PER_DEG * math.cos(math.radians(home_lat)))
    lon = (lon + 180.0) % 360.0 - 180.0
    return secs, lat, lon


def _participant(i: int, cfg: SynthConfig, dropout: bool):
    pid = participant_id(i)
    rng = substream(cfg.seed, i)
    mode = int(rng.integers(cfg.likert_min + 1, cfg.likert_max))
    center = float(rng.uniform(*cfg.energy_center_range))
    lo, hi = cfg.mobility_scale_range
    u = rng.random()
    scale = float(math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo))))
    home_lat = float(rng.uniform(*cfg.home_lat_range))
    home_lon = float(rng.uniform(*cfg.home_lon_range))
    dropout_days = int(rng.integers(1, cfg.dropout_max_days + 1))
    active = min(dropout_days, cfg.study_days) if dropout else cfg.study_days
    if cfg.couple_by_variance:
        strength = (math.log(scale) - math.log(lo)) / (math.log(hi) - math.log(lo)) if hi > lo else 1.0
        coupling = cfg.coupling * strength
    else:
        coupling = cfg.coupling

    day_rngs = [substream(cfg.seed, i, d) for d in range(active)]
    log_dist = np.array([math.log(scale) + r.normal(0.0, cfg.daily_distance_sigma) for r in day_rngs])
    sd = log_dist.std()
    z = (log_dist - log_dist.mean()) / sd if sd > 0 else np.zeros(active)

    reports, gps = [], []
    p = cfg.prompts_per_day
    span = 12 * 3600
    prompt_secs = [9 * 3600 + (span * j // (p - 1) if p > 1 else 0) for j in range(p)]
    for d, r in enumerate(day_rngs):
        day_start = cfg.start_timestamp + d * SECONDS_PER_DAY
        secs, lat, lon = _excursion(r, math.exp(log_dist[d]), cfg, home_lat, home_lon)
        gps.extend(GpsPoint(pid, int(day_start + s), float(a), float(b)) for s, a, b in zip(secs, lat, lon))

        latent = center + coupling * z[d] + r.normal(0.0, cfg.day_noise_sd)
        present = r.random(p) >= cfg.missing_prob
        jitter_s = r.integers(0, 1800, size=p)
        moods = _mood_values(r, mode, p, cfg)
        energies = np.clip(np.rint(latent + r.uniform(-1.0, 1.0, p)), cfg.likert_min, cfg.likert_max).astype(int)
        for j in range(p):
            if not present[j]:
                continue
            ts = int(day_start + prompt_secs[j] + jitter_s[j])
            reports.append(LikertReport(pid, ts, Kind.MOOD, int(moods[j])))
            reports.append(LikertReport(pid, ts, Kind.ENERGY, int(energies[j])))

    truth = ParticipantTruth(pid, mode, center, scale, coupling, active, home_lat, home_lon)
    return ParticipantRecord(pid, tuple(reports), tuple(gps)), truth


def generate(config: SynthConfig = SynthConfig()) -> tuple[CohortDataset, GroundTruth]:
    n = config.n_participants
    dropouts = set(substream(config.seed, _DROPOUT_KEY).permutation(n)[: config.n_dropouts].tolist())
    records, truths = [], []
    for i in range(n):
        rec, truth = _participant(i, config, i in dropouts)
        records.append(rec)
        truths.append(truth)
    return CohortDataset(tuple(records)), GroundTruth(tuple(truths))


def emit_csv(dataset: CohortDataset, out_dir) -> tuple[Path, Path]:
    """Write reports.csv and gps.csv; returns their paths."""
    if out_dir is None or str(out_dir) == "":
        raise ValueError("output directory path is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return write_reports(out / "reports.csv", all_reports(dataset)), write_gps(out / "gps.csv", all_gps(dataset))
