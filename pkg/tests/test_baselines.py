import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from longbase.baselines import EmptyDomainError, mode_of, personal_baseline, population_baseline
from longbase.core import Kind
from longbase.synth import SynthConfig, generate

from .conftest import cohort_from


def brute_mode(values):
    best, best_count = None, -1
    for v in range(1, 10):
        c = list(values).count(v)
        if c > best_count:
            best, best_count = v, c
    return best


def test_mode_examples():
    assert mode_of([5, 5, 2]) == 5
    assert mode_of([2, 8]) == 2
    with pytest.raises(ValueError):
        mode_of([])


def test_mode_matches_brute_force():
    rng = random.Random(0)
    for _ in range(1000):
        vals = [rng.randint(1, 9) for _ in range(rng.randint(1, 30))]
        assert mode_of(vals) == brute_mode(vals)


@given(st.lists(st.integers(1, 9), min_size=1), st.randoms())
def test_mode_permutation_invariant(vals, rnd):
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert mode_of(shuffled) == mode_of(vals)


def test_hand_example():
    ds = cohort_from({"A": [8, 8, 8, 2], "B": [4, 4, 4, 4]})
    pop = population_baseline(ds, "mood")
    assert pop.global_mode == 4
    assert pop.per_participant_accuracy == {"A": 0.0, "B": 1.0}
    assert pop.micro_accuracy == 0.5
    per = personal_baseline(ds, "mood")
    assert per.per_participant_mode == {"A": 8, "B": 4}
    assert per.per_participant_accuracy == {"A": 0.75, "B": 1.0}
    assert per.micro_accuracy == 0.875
    assert per.macro_accuracy == 0.875


def test_constant_data():
    ds = cohort_from({"A": [7] * 5, "B": [7] * 3})
    assert population_baseline(ds, "mood").global_mode == 7
    assert population_baseline(ds, "mood").micro_accuracy == 1.0
    ds = cohort_from({"A": [3] * 5, "B": [6] * 3})
    assert personal_baseline(ds, "mood").micro_accuracy == 1.0


def test_single_participant_schemes_agree():
    ds = cohort_from({"A": [1, 4, 4, 9, 2]})
    assert population_baseline(ds, "mood").micro_accuracy == personal_baseline(ds, "mood").micro_accuracy


def test_participants_without_kind_are_excluded():
    ds = cohort_from({"A": [3, 3], "B": [5]})
    res = personal_baseline(ds, Kind.MOOD)
    assert res.excluded == ()
    with pytest.raises(EmptyDomainError):
        personal_baseline(ds, Kind.ENERGY)
    with pytest.raises(EmptyDomainError):
        population_baseline(ds, Kind.ENERGY)


def test_micro_macro_definitions():
    ds = cohort_from({"A": [1, 1, 2], "B": [5, 6]})
    res = personal_baseline(ds, "mood")
    assert res.micro_accuracy == pytest.approx(3 / 5)
    assert res.macro_accuracy == pytest.approx((2 / 3 + 1 / 2) / 2)


def test_personal_dominates_population_on_random_cohorts():
    rng = random.Random(1)
    for trial in range(200):
        cfg = SynthConfig(
            n_participants=rng.randint(1, 10),
            study_days=rng.randint(1, 5),
            mode_concentration=rng.uniform(0.05, 1.0),
            gps_samples_per_day=1,
            seed=trial,
        )
        ds, _ = generate(cfg)
        per = personal_baseline(ds, "mood")
        pop = population_baseline(ds, "mood")
        total_per = total_pop = n = 0
        for p in ds:
            vals = p.values("mood")
            total_per += max(vals.count(v) for v in range(1, 10))
            total_pop += vals.count(pop.global_mode)
            n += len(vals)
        assert per.micro_accuracy == pytest.approx(total_per / n)
        assert pop.micro_accuracy == pytest.approx(total_pop / n)
        assert per.micro_accuracy >= pop.micro_accuracy
        assert per.macro_accuracy >= pop.macro_accuracy


@given(st.dictionaries(st.sampled_from("abcdef"), st.lists(st.integers(1, 9), min_size=1, max_size=40), min_size=1))
def test_per_participant_bounds(groups):
    ds = cohort_from(groups)
    per = personal_baseline(ds, "mood")
    pop = population_baseline(ds, "mood")
    for pid, vals in groups.items():
        assert per.per_participant_accuracy[pid] >= pop.per_participant_accuracy[pid]
        assert per.per_participant_accuracy[pid] >= 1 / len(set(vals))
        for fixed in range(1, 10):
            assert per.per_participant_accuracy[pid] >= vals.count(fixed) / len(vals)


@given(st.dictionaries(st.sampled_from("abcd"), st.lists(st.integers(1, 9), min_size=1, max_size=20), min_size=1))
def test_monotone_relabel(groups):
    # strictly increasing map of the used levels onto the top of the scale
    used = sorted({v for vals in groups.values() for v in vals})
    table = dict(zip(used, range(10 - len(used), 10)))
    relabelled = {pid: [table[v] for v in vals] for pid, vals in groups.items()}
    a, b = personal_baseline(cohort_from(groups), "mood"), personal_baseline(cohort_from(relabelled), "mood")
    assert b.per_participant_mode == {pid: table[m] for pid, m in a.per_participant_mode.items()}
    assert a.per_participant_accuracy == b.per_participant_accuracy
    pa, pb = population_baseline(cohort_from(groups), "mood"), population_baseline(cohort_from(relabelled), "mood")
    assert pb.global_mode == table[pa.global_mode]
    assert pa.micro_accuracy == pb.micro_accuracy
