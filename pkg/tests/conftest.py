import pytest

from longbase.core import GpsPoint, Kind, LikertReport, assemble_dataset
from longbase.synth import SynthConfig, generate

ACCEPTANCE_LINES = []


def reports_from(values_by_pid, kind=Kind.MOOD, start=0, step=3600):
    out = []
    for pid, values in values_by_pid.items():
        out += [LikertReport(pid, start + j * step, kind, v) for j, v in enumerate(values)]
    return out


def cohort_from(values_by_pid, kind=Kind.MOOD):
    return assemble_dataset(reports_from(values_by_pid, kind), [])


def gps_track(pid, coords, start=0, step=600):
    return [GpsPoint(pid, start + j * step, lat, lon) for j, (lat, lon) in enumerate(coords)]


@pytest.fixture(scope="session")
def small_cohort():
    cfg = SynthConfig(n_participants=12, study_days=21, gps_samples_per_day=12, seed=3)
    return generate(cfg)


@pytest.fixture(scope="session")
def default_cohort():
    return generate(SynthConfig())


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
