import datetime as dt

import pytest

from partis.errors import DomainError
from partis.files import load_config, load_ratings
from partis.scoring import (
    DimensionScores,
    Level,
    ScoringPolicy,
    Thresholds,
    WeightVector,
    assign_level,
    consensus_scores,
)
from partis.tca import (
    Baseline,
    DriftReport,
    compute_drift,
    emit_changelog,
    evaluate_triggers,
    stratified_sample,
)

from conftest import FIXTURES


def vec(d1, d2, d3, d4, d5) -> DimensionScores:
    return DimensionScores(d1, d2, d3, d4, d5)


BASE_DATE = dt.date(2025, 1, 15)
W = WeightVector()
T = Thresholds()


def make_baseline(scores, timestamp=BASE_DATE, weights=W, thresholds=T,
                  model_label="assistant-2025.1") -> Baseline:
    return Baseline(timestamp=timestamp, scores=scores, weights=weights,
                    thresholds=thresholds, model_label=model_label)


# ---------------------------------------------------------------------------
# stratified sampling
# ---------------------------------------------------------------------------

def _level_population() -> dict[str, Level]:
    levels: dict[str, Level] = {}
    for level, count in ((Level.L1, 60), (Level.L2, 44), (Level.L3, 16),
                         (Level.L4, 7)):
        for i in range(count):
            levels[f"{level.name}-{i:03d}"] = level
    return levels


def test_sample_sizes_round_up_per_stratum():
    levels = _level_population()
    sample = stratified_sample(levels, 0.20, seed=0)
    by_level = {lv: 0 for lv in Level}
    for tid in sample:
        by_level[levels[tid]] += 1
    # ceil(0.2 * (60, 44, 16, 7)) = (12, 9, 4, 2)
    assert by_level[Level.L1] == 12
    assert by_level[Level.L2] == 9
    assert by_level[Level.L3] == 4
    assert by_level[Level.L4] == 2
    assert len(sample) == 27


def test_sample_is_sorted_unique_and_contained():
    levels = _level_population()
    sample = stratified_sample(levels, 0.25, seed=5)
    assert list(sample) == sorted(sample)
    assert len(set(sample)) == len(sample)
    assert set(sample) <= set(levels)


def test_sample_determinism_and_seed_variation():
    levels = _level_population()
    assert stratified_sample(levels, 0.2, seed=3) == \
        stratified_sample(levels, 0.2, seed=3)
    assert stratified_sample(levels, 0.2, seed=3) != \
        stratified_sample(levels, 0.2, seed=4)


def test_sample_fraction_floor_is_enforced():
    levels = _level_population()
    with pytest.raises(DomainError):
        stratified_sample(levels, 0.19)
    with pytest.raises(DomainError):
        stratified_sample(levels, 0.05)


def test_sample_fraction_cannot_exceed_one():
    with pytest.raises(DomainError):
        stratified_sample(_level_population(), 1.01)


def test_sample_full_fraction_returns_everything():
    levels = _level_population()
    assert stratified_sample(levels, 1.0) == tuple(sorted(levels))


def test_sample_never_skips_a_tiny_stratum():
    levels = {"only-l4": Level.L4}
    levels.update({f"l1-{i}": Level.L1 for i in range(20)})
    sample = stratified_sample(levels, 0.2, seed=1)
    assert "only-l4" in sample


def test_sample_empty_population():
    with pytest.raises(DomainError):
        stratified_sample({}, 0.5)


# ---------------------------------------------------------------------------
# drift measurement
# ---------------------------------------------------------------------------

def test_baseline_requires_tasks():
    with pytest.raises(DomainError):
        make_baseline({})


def test_zero_drift_reports_quietly():
    scores = {f"T{i}": vec(2, 2, 2, 2, 2) for i in range(10)}
    baseline = make_baseline(scores)
    sampled = {tid: scores[tid] for tid in list(scores)[:3]}
    report = compute_drift(baseline, sampled)
    assert all(delta == 0.0 for delta in report.deltas.values())
    assert report.mean_abs_delta == 0.0
    assert not report.drift_trigger
    assert report.triggers == ()
    assert report.changed == ()
    assert report.n_baseline == 10
    assert report.n_sampled == 3
    assert report.sample_fraction == pytest.approx(0.3)


def test_big_single_dimension_shift_triggers():
    """d1 drops from 4 to 1 on every sampled task.

    deltas = (-3, 0, 0, 0, 0); mean |delta| = 0.6; both signals fire.
    Levels move from L2 (score 13/5.5) to L1 (score 10/5.5).
    """
    baseline = make_baseline({f"T{i}": vec(4, 2, 2, 2, 2) for i in range(5)})
    current = {f"T{i}": vec(1, 2, 2, 2, 2) for i in range(5)}
    report = compute_drift(baseline, current)
    assert report.deltas["d1"] == pytest.approx(-3.0)
    assert report.deltas["d2"] == 0.0
    assert report.mean_abs_delta == pytest.approx(0.6)
    assert report.drift_trigger
    assert report.triggers == ("drift",)
    assert len(report.changed) == 5
    assert all(c.old_level is Level.L2 and c.new_level is Level.L1
               for c in report.changed)


def test_single_dimension_over_half_point_triggers_alone():
    # d1 +1 everywhere: max |delta| = 1 > 0.5 but mean |delta| = 0.2
    baseline = make_baseline({f"T{i}": vec(2, 3, 3, 2, 3) for i in range(4)})
    current = {f"T{i}": vec(3, 3, 3, 2, 3) for i in range(4)}
    report = compute_drift(baseline, current)
    assert report.mean_abs_delta == pytest.approx(0.2)
    assert report.drift_trigger


def test_small_shift_does_not_trigger():
    # d1 +1 on two tasks of five: delta d1 = 0.4
    scores = {f"T{i}": vec(3, 3, 2, 2, 2) for i in range(5)}
    baseline = make_baseline(scores)
    current = dict(scores)
    current["T0"] = vec(4, 3, 2, 2, 2)
    current["T1"] = vec(4, 3, 2, 2, 2)
    report = compute_drift(baseline, current)
    assert report.deltas["d1"] == pytest.approx(0.4)
    assert not report.drift_trigger
    assert report.triggers == ()


def test_drift_levels_use_baseline_thresholds():
    # Under the frozen baseline thresholds (t12 = 2.5) both rounds stay
    # L1 even though default thresholds would call the new round L2.
    baseline = make_baseline(
        {"T0": vec(2, 2, 2, 2, 2)},
        thresholds=Thresholds(t12=2.5, t23=3.0, t34=4.0,
                              boundary_halfwidth=0.0),
    )
    report = compute_drift(baseline, {"T0": vec(2, 2, 2, 3, 2)})
    assert report.changed == ()


def test_drift_rejects_unknown_tasks():
    baseline = make_baseline({"T0": vec(2, 2, 2, 2, 2)})
    with pytest.raises(DomainError) as excinfo:
        compute_drift(baseline, {"T9": vec(2, 2, 2, 2, 2)})
    assert "T9" in str(excinfo.value)


def test_drift_rejects_empty_sample():
    baseline = make_baseline({"T0": vec(2, 2, 2, 2, 2)})
    with pytest.raises(DomainError):
        compute_drift(baseline, {})


def test_drift_report_carries_operator_flags():
    scores = {"T0": vec(2, 2, 2, 2, 2)}
    baseline = make_baseline(scores)
    report = compute_drift(baseline, scores, model_upgrade=True,
                           regulatory=True)
    assert report.triggers == ("model_upgrade", "regulatory")


def test_drift_note_mentions_sampling_error():
    scores = {"T0": vec(2, 2, 2, 2, 2)}
    report = compute_drift(make_baseline(scores), scores)
    assert "0.22" in report.standard_error_note


# ---------------------------------------------------------------------------
# trigger evaluation
# ---------------------------------------------------------------------------

def _quiet_report(timestamp=BASE_DATE) -> DriftReport:
    scores = {"T0": vec(2, 2, 2, 2, 2)}
    return compute_drift(make_baseline(scores, timestamp=timestamp), scores)


def test_no_signals_means_routine_cadence():
    recommendation = evaluate_triggers(_quiet_report())
    assert recommendation.actions == ()
    assert recommendation.next_review == dt.date(2025, 7, 15)


def test_drift_forces_full_reassessment():
    baseline = make_baseline({f"T{i}": vec(4, 2, 2, 2, 2) for i in range(5)})
    report = compute_drift(baseline,
                           {f"T{i}": vec(1, 2, 2, 2, 2) for i in range(5)})
    recommendation = evaluate_triggers(report)
    assert recommendation.actions == ("full_reassessment",)


def test_model_upgrade_and_regulatory_force_full_reassessment():
    for flags in ({"model_upgrade": True}, {"regulatory": True}):
        recommendation = evaluate_triggers(_quiet_report(), **flags)
        assert recommendation.actions == ("full_reassessment",)


def test_weight_change_requires_threshold_reestimation():
    recommendation = evaluate_triggers(_quiet_report(),
                                       weight_change_planned=True)
    assert recommendation.actions == ("threshold_reestimation",)


def test_combined_signals_stack_actions():
    recommendation = evaluate_triggers(_quiet_report(), model_upgrade=True,
                                       weight_change_planned=True)
    assert recommendation.actions == ("full_reassessment",
                                      "threshold_reestimation")


@pytest.mark.parametrize("start,expected", [
    (dt.date(2025, 1, 15), dt.date(2025, 7, 15)),
    (dt.date(2025, 8, 31), dt.date(2026, 2, 28)),
    (dt.date(2023, 8, 31), dt.date(2024, 2, 29)),
    (dt.date(2025, 7, 31), dt.date(2026, 1, 31)),
    (dt.date(2024, 12, 31), dt.date(2025, 6, 30)),
])
def test_next_review_is_six_calendar_months_with_day_clamp(start, expected):
    recommendation = evaluate_triggers(_quiet_report(timestamp=start))
    assert recommendation.next_review == expected


# ---------------------------------------------------------------------------
# changelog
# ---------------------------------------------------------------------------

def _result(scores: DimensionScores, policy: ScoringPolicy):
    return assign_level(scores, W, T, policy)


def test_changelog_requires_identical_coverage():
    policy = ScoringPolicy()
    old = {"T0": _result(vec(2, 2, 2, 2, 2), policy)}
    new = {"T1": _result(vec(2, 2, 2, 2, 2), policy)}
    with pytest.raises(DomainError):
        emit_changelog(old, new)


def test_changelog_no_changes():
    policy = ScoringPolicy()
    results = {f"T{i}": _result(vec(2, 2, 2, 2, 2), policy) for i in range(4)}
    log = emit_changelog(results, results)
    assert log.entries == ()
    assert log.unchanged_count == 4


def test_changelog_entries_sorted_with_flags():
    floor_off = ScoringPolicy(floor_enabled=False)
    floor_on = ScoringPolicy()
    floored_vec = vec(2, 2, 2, 4, 2)       # L2 plain, L3 under the floor
    steady_vec = vec(3, 3, 3, 2, 3)        # L2 both ways
    old = {"T-B": _result(floored_vec, floor_off),
           "T-A": _result(floored_vec, floor_off),
           "T-C": _result(steady_vec, floor_off)}
    new = {"T-B": _result(floored_vec, floor_on),
           "T-A": _result(floored_vec, floor_on),
           "T-C": _result(steady_vec, floor_on)}
    log = emit_changelog(old, new)
    assert [e.task_id for e in log.entries] == ["T-A", "T-B"]
    assert all(e.old_level is Level.L2 and e.new_level is Level.L3
               for e in log.entries)
    assert all(e.floor_involved for e in log.entries)
    assert not any(e.boundary_involved for e in log.entries)
    assert log.unchanged_count == 1


def test_changelog_flags_boundary_involvement():
    policy = ScoringPolicy(floor_enabled=False)
    inner = _result(vec(2, 2, 1, 2, 1), policy)    # sum 9, plain L1
    outer = _result(vec(2, 2, 2, 2, 1), policy)    # sum 10, plain L1
    assert outer.boundary is None
    # sum 10.5 scores 1.909, inside the t12 zone: upgraded to L2
    shifted = _result(vec(2, 2, 2, 2, 2), policy)
    assert shifted.boundary is not None
    log = emit_changelog({"T0": outer, "T1": inner},
                         {"T0": shifted, "T1": inner})
    assert len(log.entries) == 1
    entry = log.entries[0]
    assert entry.boundary_involved
    assert not entry.floor_involved


# ---------------------------------------------------------------------------
# the full-size fixture end to end
# ---------------------------------------------------------------------------

def _benchmark_consensus() -> dict[str, DimensionScores]:
    ratings = load_ratings(FIXTURES / "benchmark" / "ratings.json")
    config = load_config(FIXTURES / "benchmark" / "config.json")
    merged: dict[str, DimensionScores] = {}
    for tid in ratings.task_ids():
        panel = [ratings.rows[(tid, rater)] for rater in ratings.raters]
        merged[tid] = consensus_scores(panel, config.policy.consensus)
    return merged


def test_enabling_the_floor_moves_exactly_three_tasks():
    consensus = _benchmark_consensus()
    config = load_config(FIXTURES / "benchmark" / "config.json")
    floor_on = ScoringPolicy(
        floor_enabled=True,
        boundary_policy=config.policy.boundary_policy,
        consensus=config.policy.consensus,
        weight_fingerprint=config.policy.weight_fingerprint,
    )
    old = {tid: assign_level(s, config.weights, config.thresholds,
                             config.policy)
           for tid, s in consensus.items()}
    new = {tid: assign_level(s, config.weights, config.thresholds, floor_on)
           for tid, s in consensus.items()}
    log = emit_changelog(old, new)
    assert len(log.entries) == 3
    assert all(e.old_level is Level.L2 and e.new_level is Level.L3
               for e in log.entries)
    assert all(e.floor_involved for e in log.entries)
    assert log.unchanged_count == 124


def test_benchmark_sample_and_drift_round_trip():
    consensus = _benchmark_consensus()
    config = load_config(FIXTURES / "benchmark" / "config.json")
    levels = {tid: assign_level(s, config.weights, config.thresholds,
                                config.policy).level
              for tid, s in consensus.items()}
    sample = stratified_sample(levels, 0.20, seed=11)
    assert len(sample) == 27
    baseline = make_baseline(consensus, model_label="round-one")
    report = compute_drift(baseline,
                           {tid: consensus[tid] for tid in sample},
                           policy=config.policy)
    assert not report.drift_trigger
    assert report.n_sampled == 27
    assert report.n_baseline == 127
