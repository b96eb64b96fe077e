"""Temporal calibration: keep LARA scores honest as models and rules move.

A Baseline freezes the consensus scores, weights, and thresholds of one
assessment round. Later rounds re-rate a stratified sample, measure
per-dimension drift against the baseline, and decide whether a full
reassessment is due.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainError
from .scoring import (
    DimensionScores,
    LaraResult,
    Level,
    ScoringPolicy,
    Thresholds,
    WeightVector,
    assign_level,
)

MIN_SAMPLE_FRACTION = 0.20
DRIFT_THRESHOLD = 0.5
REVIEW_INTERVAL_MONTHS = 6

# Context for readers of drift reports: with a 20% sample of a portfolio
# in the low hundreds of tasks, the standard error of a mean dimension
# delta is roughly 0.22 rubric points, so single-task swings are noise.
STANDARD_ERROR_NOTE = (
    "sampling context: mean-delta standard error is about 0.22 rubric "
    "points at a 20% sample; judge drift on the portfolio, not on "
    "individual tasks"
)


@dataclass(frozen=True)
class Baseline:
    timestamp: dt.date
    scores: Mapping[str, DimensionScores]
    weights: WeightVector
    thresholds: Thresholds
    model_label: str

    def __post_init__(self) -> None:
        if not self.scores:
            raise DomainError("baseline must cover at least one task")


def stratified_sample(
    levels: Mapping[str, Level],
    fraction: float,
    seed: int = 0,
) -> tuple[str, ...]:
    """Pick tasks for re-rating, proportionally per level stratum.

    Stratum sizes are rounded up, so no non-empty stratum is ever left
    out. Fractions below the 20% governance floor are refused.
    """
    if not levels:
        raise DomainError("no tasks to sample")
    if fraction < MIN_SAMPLE_FRACTION:
        raise DomainError(
            f"sample fraction {fraction} is below the {MIN_SAMPLE_FRACTION:.0%} "
            "re-rating floor")
    if fraction > 1.0:
        raise DomainError("sample fraction cannot exceed 1.0")

    rng = np.random.default_rng(seed)
    chosen: list[str] = []
    for level in Level:
        stratum = sorted(tid for tid, lv in levels.items() if lv == level)
        if not stratum:
            continue
        size = math.ceil(fraction * len(stratum))
        picks = rng.choice(len(stratum), size=size, replace=False)
        chosen.extend(stratum[i] for i in sorted(picks))
    return tuple(sorted(chosen))


@dataclass(frozen=True)
class LevelChange:
    task_id: str
    old_level: Level
    new_level: Level


@dataclass(frozen=True)
class DriftReport:
    baseline_timestamp: dt.date
    model_label: str
    n_baseline: int
    n_sampled: int
    sample_fraction: float
    deltas: dict[str, float]
    mean_abs_delta: float
    drift_trigger: bool
    triggers: tuple[str, ...]
    changed: tuple[LevelChange, ...]
    standard_error_note: str = STANDARD_ERROR_NOTE


def compute_drift(
    baseline: Baseline,
    current: Mapping[str, DimensionScores],
    model_upgrade: bool = False,
    regulatory: bool = False,
    policy: ScoringPolicy | None = None,
) -> DriftReport:
    """Compare re-rated sample scores against the frozen baseline.

    Delta per dimension is mean(current) - mean(baseline) over the
    sampled tasks only. The drift trigger fires when any single
    dimension moves by more than 0.5 or the mean absolute delta does;
    either signal alone is enough. Level changes are recomputed under
    the baseline weights and thresholds so the comparison is apples to
    apples.
    """
    if not current:
        raise DomainError("no re-rated tasks supplied")
    unknown = sorted(set(current) - set(baseline.scores))
    if unknown:
        raise DomainError(
            "re-rated tasks missing from the baseline: " + ", ".join(unknown))

    policy = policy or ScoringPolicy()
    ids = sorted(current)
    old = np.array([baseline.scores[tid].as_tuple() for tid in ids], dtype=float)
    new = np.array([current[tid].as_tuple() for tid in ids], dtype=float)
    delta_vector = new.mean(axis=0) - old.mean(axis=0)
    deltas = dict(zip(DimensionScores.dimension_names(),
                      (float(d) for d in delta_vector)))
    mean_abs = float(np.abs(delta_vector).mean())
    drift = bool((np.abs(delta_vector) > DRIFT_THRESHOLD).any()
                 or mean_abs > DRIFT_THRESHOLD)

    changed = []
    for tid in ids:
        before = assign_level(baseline.scores[tid], baseline.weights,
                              baseline.thresholds, policy).level
        after = assign_level(current[tid], baseline.weights,
                             baseline.thresholds, policy).level
        if before != after:
            changed.append(LevelChange(tid, before, after))

    triggers = []
    if drift:
        triggers.append("drift")
    if model_upgrade:
        triggers.append("model_upgrade")
    if regulatory:
        triggers.append("regulatory")

    return DriftReport(
        baseline_timestamp=baseline.timestamp,
        model_label=baseline.model_label,
        n_baseline=len(baseline.scores),
        n_sampled=len(ids),
        sample_fraction=len(ids) / len(baseline.scores),
        deltas=deltas,
        mean_abs_delta=mean_abs,
        drift_trigger=drift,
        triggers=tuple(triggers),
        changed=tuple(changed),
    )


@dataclass(frozen=True)
class Recommendation:
    actions: tuple[str, ...]
    next_review: dt.date


def _add_months(day: dt.date, months: int) -> dt.date:
    month_index = day.month - 1 + months
    year = day.year + month_index // 12
    month = month_index % 12 + 1
    # Clamp to the end of the target month (e.g. Aug 31 -> Feb 28).
    last = (dt.date(year + month // 12, month % 12 + 1, 1)
            - dt.timedelta(days=1)).day
    return dt.date(year, month, min(day.day, last))


def evaluate_triggers(
    report: DriftReport,
    model_upgrade: bool = False,
    regulatory: bool = False,
    weight_change_planned: bool = False,
) -> Recommendation:
    """Turn a drift report plus operator flags into actions.

    Drift, a model upgrade, or a regulatory change each force a full
    reassessment; a planned weight change additionally requires
    re-estimating thresholds (the fingerprint coupling would break
    otherwise). No signal at all means the routine six-month cadence.
    Adding flags can only add actions, never remove them.
    """
    signals = set(report.triggers)
    if model_upgrade:
        signals.add("model_upgrade")
    if regulatory:
        signals.add("regulatory")

    actions: list[str] = []
    if signals & {"drift", "model_upgrade", "regulatory"}:
        actions.append("full_reassessment")
    if weight_change_planned:
        actions.append("threshold_reestimation")
    return Recommendation(
        actions=tuple(actions),
        next_review=_add_months(report.baseline_timestamp, REVIEW_INTERVAL_MONTHS),
    )


@dataclass(frozen=True)
class ChangeEntry:
    task_id: str
    old_level: Level
    new_level: Level
    floor_involved: bool
    boundary_involved: bool


@dataclass(frozen=True)
class Changelog:
    entries: tuple[ChangeEntry, ...]
    unchanged_count: int


def emit_changelog(
    old: Mapping[str, LaraResult],
    new: Mapping[str, LaraResult],
) -> Changelog:
    """Migration log between two scoring rounds of the same portfolio.

    Only tasks whose level moved get an entry (sorted by task id);
    unchanged tasks are reported as a count. Both rounds must cover the
    same task set.
    """
    if set(old) != set(new):
        only_old = sorted(set(old) - set(new))[:3]
        only_new = sorted(set(new) - set(old))[:3]
        raise DomainError(
            "changelog requires identical task coverage; "
            f"only in old: {only_old or 'none'}, only in new: {only_new or 'none'}")
    entries = []
    unchanged = 0
    for tid in sorted(old):
        before, after = old[tid], new[tid]
        if before.level == after.level:
            unchanged += 1
            continue
        entries.append(ChangeEntry(
            task_id=tid,
            old_level=before.level,
            new_level=after.level,
            floor_involved=before.floor_applied or after.floor_applied,
            boundary_involved=(before.boundary is not None
                               or after.boundary is not None),
        ))
    return Changelog(entries=tuple(entries), unchanged_count=unchanged)
