"""Per-participant evaluation against the personal baseline, CV splitters,
the behavioral-variance screening sweep and correlation statistics."""

from __future__ import annotations

import math
import os
import zlib
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

from ._random import substream
from .core import CohortDataset
from .features import DEFAULT_GRID_M, cohort_behavioral_variance, feature_matrix
from .labels import DailyRow, JoinReport, cohort_labels, join_rows
from .models import ForestParams, TreeParams, as_arrays, fit_tree, majority_model, predict_tree_many, train_forest

REPORT_SCHEMA_VERSION = 1
DEFAULT_MIN_DAYS = 14


class SplitError(ValueError):
    """A splitter's preconditions are not met."""


@dataclass(frozen=True)
class FoldAssignment:
    folds: np.ndarray
    k: int

    def __len__(self):
        return len(self.folds)

    def splits(self):
        """Yield (fold, train_idx, test_idx) for every non-empty fold."""
        for f in range(self.k):
            test = np.flatnonzero(self.folds == f)
            if test.size:
                yield f, np.flatnonzero(self.folds != f), test


@dataclass(frozen=True)
class Exclusion:
    participant_id: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class ParticipantEval:
    participant_id: str
    n_rows: int
    label_baseline_accuracy: float
    model_accuracy: float
    improvement: float
    behavioral_variance: float


@dataclass(frozen=True)
class ScreeningPoint:
    threshold: float
    n_retained: int
    # None when nobody is retained
    mean_improvement: float | None


@dataclass(frozen=True)
class Correlation:
    pearson_r: float
    spearman_rho: float
    p_value: float
    n: int


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "forest"
    forest: ForestParams = ForestParams()

    def __post_init__(self):
        if self.kind not in ("majority", "tree", "forest"):
            raise ValueError(f"unknown model kind {self.kind!r}")


@dataclass(frozen=True)
class CVSpec:
    scheme: str = "stratified"
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("stratified", "forward"):
            raise ValueError(f"unknown cv scheme {self.scheme!r}")
        if self.k < 1 or (self.scheme == "stratified" and self.k < 2):
            raise ValueError("k too small for the cv scheme")


def _labels(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        return rows.astype(int)
    return np.array([getattr(r, "label", r) for r in rows], dtype=int)


def _key(participant_id: str) -> int:
    return zlib.crc32(participant_id.encode("utf-8"))


def _group_rows(rows: Sequence[DailyRow]) -> dict[str, list[DailyRow]]:
    groups: dict[str, list[DailyRow]] = {}
    for r in rows:
        groups.setdefault(r.participant_id, []).append(r)
    return {pid: sorted(g, key=lambda r: r.day) for pid, g in sorted(groups.items())}


# -- splitters ---------------------------------------------------------------


def stratified_kfold_within_subject(rows, k: int = 5, seed: int = 0) -> FoldAssignment:
    """Class-stratified random k-fold over one participant's rows.

    Each class is shuffled and dealt round-robin, continuing the deal from
    one class to the next, so per-fold class counts differ by at most one.
    """
    y = _labels(rows)
    if k < 2:
        raise SplitError("k must be >= 2")
    if y.size < k:
        raise SplitError(f"too few rows: {y.size} < k={k}")
    if np.unique(y).size < 2:
        raise SplitError("single class")
    rng = substream(seed, 0)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in (0, 1)])
    folds = np.empty(y.size, dtype=int)
    folds[order] = np.arange(y.size) % k
    return FoldAssignment(folds, k)


def forward_chaining_split(rows, n_splits: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Expanding-window splits; test blocks tile rows 1..n-1 in order."""
    n = len(rows)
    if n_splits < 1:
        raise SplitError("n_splits must be >= 1")
    if n < n_splits + 1:
        raise SplitError(f"too few rows: {n} < n_splits+1={n_splits + 1}")
    days = [getattr(r, "day", None) for r in rows]
    if None not in days and any(b < a for a, b in zip(days, days[1:])):
        raise SplitError("rows are not time ordered")
    out = []
    for block in np.array_split(np.arange(1, n), n_splits):
        out.append((np.arange(block[0]), block))
    return out


def subject_wise_split(rows: Sequence[DailyRow], k: int, seed: int = 0) -> FoldAssignment:
    """Whole participants go to folds; sizes balanced in participant count."""
    ids = sorted({r.participant_id for r in rows})
    if len(ids) < k:
        raise SplitError(f"too few participants: {len(ids)} < k={k}")
    perm = substream(seed, 1).permutation(len(ids))
    fold_of = {ids[j]: pos % k for pos, j in enumerate(perm)}
    return FoldAssignment(np.array([fold_of[r.participant_id] for r in rows], dtype=int), k)


def record_wise_split(rows: Sequence, k: int, seed: int = 0) -> FoldAssignment:
    """Rows dealt to folds ignoring who they belong to (leaks identity)."""
    n = len(rows)
    if n < k:
        raise SplitError(f"too few rows: {n} < k={k}")
    folds = np.empty(n, dtype=int)
    folds[substream(seed, 2).permutation(n)] = np.arange(n) % k
    return FoldAssignment(folds, k)


# -- fitting -----------------------------------------------------------------


def _fit_predict(spec: ModelSpec, X_train, y_train, X_test, seed: int) -> np.ndarray:
    if spec.kind == "majority":
        return np.full(len(X_test), majority_model(y_train).label, dtype=int)
    if spec.kind == "tree":
        p = spec.forest
        root = fit_tree(X_train, y_train, TreeParams(p.max_depth, p.min_leaf, None, p.min_gain))
        return predict_tree_many(root, X_test)
    params = ForestParams(**{**asdict(spec.forest), "seed": seed})
    return train_forest((X_train, y_train), params).predict_many(X_test)[0]


def _fold_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=keys).generate_state(1)[0])


def cv_accuracy(rows, spec: ModelSpec, cv: CVSpec, participant_key: int = 0) -> float:
    """Fraction of tested rows predicted correctly, pooled over folds."""
    X, y = as_arrays(rows)
    if cv.scheme == "stratified":
        splits = [(tr, te) for _, tr, te in stratified_kfold_within_subject(y, cv.k, _fold_seed(cv.seed, participant_key)).splits()]
    else:
        splits = forward_chaining_split(rows, cv.k)
    correct = tested = 0
    for fold, (tr, te) in enumerate(splits):
        pred = _fit_predict(spec, X[tr], y[tr], X[te], _fold_seed(cv.seed, participant_key, fold))
        correct += int((pred == y[te]).sum())
        tested += te.size
    return correct / tested


def pooled_cv_accuracy(rows: Sequence[DailyRow], folds: FoldAssignment, spec: ModelSpec, seed: int = 0) -> float:
    """Accuracy of one model fitted across participants, under a given fold map."""
    X, y = as_arrays(rows)
    correct = 0
    for fold, tr, te in folds.splits():
        pred = _fit_predict(spec, X[tr], y[tr], X[te], _fold_seed(seed, fold))
        correct += int((pred == y[te]).sum())
    return correct / len(y)


def compare_cv_schemes(rows: Sequence[DailyRow], spec: ModelSpec, k: int = 5, seed: int = 0) -> dict[str, float]:
    """Record-wise vs subject-wise accuracy of a population model on the same rows."""
    return {
        "record_wise": pooled_cv_accuracy(rows, record_wise_split(rows, k, seed), spec, seed),
        "subject_wise": pooled_cv_accuracy(rows, subject_wise_split(rows, k, seed), spec, seed),
    }


# -- experiment --------------------------------------------------------------


def filter_eligible(
    rows: Sequence[DailyRow],
    min_labeled_days: int = DEFAULT_MIN_DAYS,
    participant_ids: Sequence[str] = (),
) -> tuple[dict[str, list[DailyRow]], list[Exclusion]]:
    """Keep participants with enough joined rows and both label classes.

    ``participant_ids`` lists everyone in the cohort, so people with no joined
    rows at all show up as exclusions too.
    """
    if min_labeled_days < 1:
        raise ValueError("min_labeled_days must be >= 1")
    groups = _group_rows(rows)
    retained, excluded = {}, []
    for pid in sorted(set(groups) | set(participant_ids)):
        g = groups.get(pid, [])
        if len(g) < min_labeled_days:
            excluded.append(Exclusion(pid, "insufficient_days", f"{len(g)} < {min_labeled_days}"))
        elif len({r.label for r in g}) < 2:
            excluded.append(Exclusion(pid, "single_class", f"all labels {g[0].label}"))
        else:
            retained[pid] = g
    return retained, excluded


def label_baseline_accuracy(rows) -> float:
    return majority_model(_labels(rows)).confidence


def evaluate_participant(
    participant_id: str,
    rows: Sequence[DailyRow],
    spec: ModelSpec,
    cv: CVSpec,
    behavioral_variance: float = math.nan,
) -> ParticipantEval:
    base = label_baseline_accuracy(rows)
    acc = cv_accuracy(rows, spec, cv, _key(participant_id))
    return ParticipantEval(participant_id, len(rows), base, acc, acc - base, behavioral_variance)


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("LONGBASE_THREADS", "1") or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class Prepared:
    rows: list[DailyRow]
    join: JoinReport
    variance: dict[str, float]


def prepare_rows(dataset: CohortDataset, grid_m: float = DEFAULT_GRID_M) -> Prepared:
    rows, join = join_rows(feature_matrix(dataset, grid_m), cohort_labels(dataset))
    return Prepared(rows, join, cohort_behavioral_variance(dataset))


def evaluate_personal(
    dataset: CohortDataset,
    model_spec: ModelSpec = ModelSpec(),
    cv_spec: CVSpec = CVSpec(),
    min_labeled_days: int = DEFAULT_MIN_DAYS,
    grid_m: float = DEFAULT_GRID_M,
    threads: int | None = None,
    prepared: Prepared | None = None,
) -> tuple[list[ParticipantEval], list[Exclusion]]:
    """Cross-validate the model within each eligible participant.

    Participants whose splitter fails are skipped with an exclusion record.
    Output is in participant id order whatever the thread count.
    """
    prep = prepared or prepare_rows(dataset, grid_m)
    retained, excluded = filter_eligible(prep.rows, min_labeled_days, dataset.ids)

    def one(pid):
        try:
            return evaluate_participant(pid, retained[pid], model_spec, cv_spec, prep.variance.get(pid, math.nan))
        except SplitError as exc:
            return Exclusion(pid, "cv_error", str(exc))

    ids = sorted(retained)
    n = thread_count(threads)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, ids))
    else:
        results = [one(pid) for pid in ids]
    evals = [r for r in results if isinstance(r, ParticipantEval)]
    excluded += [r for r in results if isinstance(r, Exclusion)]
    excluded.sort(key=lambda e: e.participant_id)
    return evals, excluded


def aggregate_improvement(evals: Sequence[ParticipantEval], agg: str = "macro") -> float | None:
    if not evals:
        return None
    if agg == "macro":
        return float(np.mean([e.improvement for e in evals]))
    if agg == "micro":
        w = np.array([e.n_rows for e in evals], dtype=float)
        return float(np.dot(w, [e.improvement for e in evals]) / w.sum())
    raise ValueError(f"unknown aggregation {agg!r}")


def staircase_thresholds(evals: Sequence[ParticipantEval]) -> list[float]:
    return sorted({e.behavioral_variance for e in evals})


def screening_sweep(
    evals: Sequence[ParticipantEval],
    thresholds: Sequence[float] | None = None,
    agg: str = "macro",
) -> list[ScreeningPoint]:
    """Mean improvement among participants whose variance is >= each threshold."""
    if thresholds is None:
        thresholds = staircase_thresholds(evals)
    thresholds = [float(t) for t in thresholds]
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be sorted ascending")
    curve = []
    for t in thresholds:
        kept = [e for e in evals if e.behavioral_variance >= t]
        curve.append(ScreeningPoint(t, len(kept), aggregate_improvement(kept, agg)))
    return curve


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx, dy = x - x.mean(), y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return min(1.0, max(-1.0, r))


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p of Student's t with n-2 dof, via the regularized incomplete beta."""
    df = n - 2
    if abs(r) >= 1.0:
        return 0.0
    t2 = r * r * df / (1.0 - r * r)
    return float(betainc(df / 2.0, 0.5, df / (df + t2)))


def correlate(xs, ys) -> Correlation:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("length mismatch")
    if x.size < 3:
        raise ValueError("need at least 3 pairs")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("constant input")
    r = _pearson(x, y)
    rho = _pearson(rankdata(x), rankdata(y))
    return Correlation(r, rho, pearson_p_value(r, x.size), int(x.size))


# -- report ------------------------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    config: Mapping
    participants: list[ParticipantEval]
    exclusions: list[Exclusion]
    join: JoinReport
    agg: str = "macro"
    curve: list[ScreeningPoint] = field(default_factory=list)
    correlation: Correlation | None = None

    def to_dict(self) -> dict:
        ev = self.participants
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": dict(self.config),
            "participants": [asdict(e) for e in ev],
            "aggregate": {
                "n_participants": len(ev),
                "macro_mean_improvement": aggregate_improvement(ev, "macro"),
                "micro_mean_improvement": aggregate_improvement(ev, "micro"),
                "macro_model_accuracy": float(np.mean([e.model_accuracy for e in ev])) if ev else None,
                "macro_label_baseline_accuracy": float(np.mean([e.label_baseline_accuracy for e in ev])) if ev else None,
                "screening_agg": self.agg,
            },
            "screening_curve": [asdict(p) for p in self.curve],
            "correlation": asdict(self.correlation) if self.correlation else None,
            "exclusions": [asdict(x) for x in self.exclusions],
            "join": asdict(self.join),
        }


def build_report(
    evals: list[ParticipantEval],
    exclusions: list[Exclusion],
    join: JoinReport,
    config: Mapping,
    agg: str = "macro",
) -> EvalReport:
    try:
        corr = correlate([e.behavioral_variance for e in evals], [e.improvement for e in evals])
    except ValueError:
        corr = None
    return EvalReport(config, evals, exclusions, join, agg, screening_sweep(evals, agg=agg), corr)


def evals_from_dict(doc: Mapping) -> list[ParticipantEval]:
    """Rebuild participant records from a report's ``participants`` array."""
    return [ParticipantEval(**{f: rec[f] for f in ParticipantEval.__dataclass_fields__}) for rec in doc["participants"]]


def curve_to_csv(curve: Sequence[ScreeningPoint]) -> str:
    lines = ["threshold,n_retained,mean_improvement"]
    for p in curve:
        mean = "" if p.mean_improvement is None else repr(p.mean_improvement)
        lines.append(f"{p.threshold!r},{p.n_retained},{mean}")
    return "\n".join(lines) + "\n"
