"""Personal vs population baselines and predictability screening for
longitudinal self-report studies."""

__version__ = "0.1.0"

from .baselines import BaselineResult, mode_of, personal_baseline, population_baseline
from .core import (
    CohortDataset,
    DataError,
    GpsPoint,
    Kind,
    LikertReport,
    ParticipantRecord,
    assemble_dataset,
    load_gps,
    load_reports,
    local_day,
)
from .evaluation import (
    CVSpec,
    ModelSpec,
    correlate,
    evaluate_personal,
    filter_eligible,
    forward_chaining_split,
    record_wise_split,
    screening_sweep,
    stratified_kfold_within_subject,
    subject_wise_split,
)
from .features import behavioral_variance, daily_features, feature_matrix, haversine_m
from .labels import daily_energy_labels, join_rows
from .models import ForestParams, majority_model, predict, train_forest, train_tree
from .synth import GroundTruth, SynthConfig, emit_csv, generate
