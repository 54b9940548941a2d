"""
Personal versus population baselines
====================================

A population model that always predicts the cohort's most common mood is
beaten by predicting each person's own most common mood.
"""

import numpy as np

from longbase import SynthConfig, generate, personal_baseline, population_baseline

dataset, truth = generate(SynthConfig(gps_samples_per_day=1))

pop = population_baseline(dataset, "mood")
per = personal_baseline(dataset, "mood")
print(f"population: micro {pop.micro_accuracy:.3f} macro {pop.macro_accuracy:.3f} (mode {pop.global_mode})")
print(f"personal:   micro {per.micro_accuracy:.3f} macro {per.macro_accuracy:.3f}")

# per participant the personal mode can only match or win
gain = np.array([per.per_participant_accuracy[p] - pop.per_participant_accuracy[p]
                 for p in per.per_participant_accuracy])
print("smallest per-participant gain", gain.min())

# how the gap depends on how concentrated each person's reports are
for conc in (0.2, 0.4, 0.6, 0.8, 1.0):
    ds, _ = generate(SynthConfig(mode_concentration=conc, gps_samples_per_day=1))
    g = personal_baseline(ds, "mood").micro_accuracy - population_baseline(ds, "mood").micro_accuracy
    print(f"concentration {conc:.1f}: gap {g:.3f}")
