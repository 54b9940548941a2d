"""
Forward chaining
================

Train only on earlier days and test on the next block.  With a majority
model this can never beat predicting the majority label of all days.
"""

from longbase import SynthConfig, generate
from longbase.evaluation import CVSpec, ModelSpec, evaluate_personal
from longbase.evaluation import forward_chaining_split, prepare_rows

dataset, _ = generate(SynthConfig(n_participants=6, study_days=28, gps_samples_per_day=12, coupling=2.0))

# what the splits look like for one participant
rows = [r for r in prepare_rows(dataset).rows if r.participant_id == "p000"]
for train, test in forward_chaining_split(rows, 4):
    print(f"train days {rows[train[0]].day}..{rows[train[-1]].day}  test days {rows[test[0]].day}..{rows[test[-1]].day}")

for model in ("majority", "forest"):
    evals, _ = evaluate_personal(dataset, ModelSpec(model), CVSpec("forward", k=4))
    print(model, [round(e.improvement, 3) for e in evals])
