import numpy as np
import pytest
from sklearn.cluster import KMeans
from sklearn.metrics import silhouette_score

from partis.calibration import (
    PairwiseMatrix,
    aggregate_experts,
    ahp_priority,
    check_coupling,
    ensure_coupling,
    estimate_thresholds,
    kendalls_w,
    weights_to_multipliers,
)
from partis.errors import CouplingError, DegenerateInputError, DomainError
from partis.scoring import ScoringPolicy, WeightVector, weight_fingerprint


# ---------------------------------------------------------------------------
# pairwise matrix validation
# ---------------------------------------------------------------------------

def test_matrix_must_be_square():
    with pytest.raises(DomainError):
        PairwiseMatrix.from_rows([[1.0, 2.0]])


def test_matrix_diagonal_must_be_one():
    with pytest.raises(DomainError):
        PairwiseMatrix.from_rows([[2.0, 1.0], [1.0, 1.0]])


def test_matrix_entries_must_be_reciprocal():
    with pytest.raises(DomainError):
        PairwiseMatrix.from_rows([[1.0, 2.0], [0.6, 1.0]])


def test_matrix_entries_must_stay_on_judgment_scale():
    with pytest.raises(DomainError):
        PairwiseMatrix.from_rows([[1.0, 10.0], [0.1, 1.0]])


def test_matrix_entries_must_be_positive():
    with pytest.raises(DomainError):
        PairwiseMatrix.from_rows([[1.0, -2.0], [-0.5, 1.0]])


# ---------------------------------------------------------------------------
# AHP priorities
# ---------------------------------------------------------------------------

def test_ahp_recovers_weights_from_consistent_matrix():
    w = np.array([0.5, 0.3, 0.2])
    rows = [[w[i] / w[j] for j in range(3)] for i in range(3)]
    result = ahp_priority(PairwiseMatrix.from_rows(rows))
    assert result.weights == pytest.approx(tuple(w), abs=1e-12)
    assert result.lambda_max == pytest.approx(3.0, abs=1e-12)
    assert result.consistency_index == pytest.approx(0.0, abs=1e-12)
    assert result.consistency_ratio == pytest.approx(0.0, abs=1e-12)
    assert result.cr_defined


def test_ahp_all_ones_is_indifference():
    rows = [[1.0] * 5 for _ in range(5)]
    result = ahp_priority(PairwiseMatrix.from_rows(rows))
    assert result.weights == pytest.approx((0.2,) * 5, abs=1e-12)
    assert result.consistency_ratio == pytest.approx(0.0, abs=1e-12)
    assert result.random_index == pytest.approx(1.12)


def test_ahp_inconsistent_matrix_against_eigen_oracle():
    # For n = 3 the row-geometric-mean solution coincides with the
    # principal eigenvector, so plain eigendecomposition is an
    # independent oracle for both weights and lambda_max.
    rows = [[1.0, 2.0, 8.0], [0.5, 1.0, 2.0], [0.125, 0.5, 1.0]]
    a = np.array(rows)
    eigenvalues, eigenvectors = np.linalg.eig(a)
    top = np.argmax(eigenvalues.real)
    lambda_oracle = float(eigenvalues[top].real)
    vector = np.abs(eigenvectors[:, top].real)
    weights_oracle = vector / vector.sum()

    result = ahp_priority(PairwiseMatrix.from_rows(rows))
    assert result.lambda_max == pytest.approx(lambda_oracle, abs=1e-9)
    assert result.weights == pytest.approx(tuple(weights_oracle), abs=1e-9)
    assert result.consistency_index == pytest.approx(
        (lambda_oracle - 3) / 2, abs=1e-9)
    assert result.consistency_ratio == pytest.approx(
        (lambda_oracle - 3) / 2 / 0.58, abs=1e-9)
    assert result.consistency_ratio > 0


def test_ahp_two_by_two_has_no_consistency_ratio():
    result = ahp_priority(PairwiseMatrix.from_rows([[1.0, 3.0],
                                                    [1 / 3, 1.0]]))
    assert not result.cr_defined
    assert result.consistency_ratio == 0.0
    assert result.weights == pytest.approx((0.75, 0.25), abs=1e-12)


def test_ahp_rejects_unsupported_sizes():
    n = 10
    rows = [[1.0] * n for _ in range(n)]
    with pytest.raises(DomainError):
        ahp_priority(PairwiseMatrix.from_rows(rows))


def test_ahp_weights_sum_to_one_for_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(3, 7))
        rows = [[1.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = float(rng.choice([1 / 5, 1 / 3, 1, 3, 5, 7]))
                rows[j][i] = 1.0 / rows[i][j]
        result = ahp_priority(PairwiseMatrix.from_rows(rows))
        assert sum(result.weights) == pytest.approx(1.0, abs=1e-12)
        assert all(w > 0 for w in result.weights)
        assert result.lambda_max >= n - 1e-9


# ---------------------------------------------------------------------------
# expert aggregation
# ---------------------------------------------------------------------------

def test_aggregate_is_elementwise_geometric_mean():
    first = PairwiseMatrix.from_rows([[1.0, 2.0], [0.5, 1.0]])
    second = PairwiseMatrix.from_rows([[1.0, 8.0], [0.125, 1.0]])
    merged = aggregate_experts([first, second])
    assert merged.entries[0][1] == pytest.approx(4.0, abs=1e-12)
    assert merged.entries[1][0] == pytest.approx(0.25, abs=1e-12)


def test_aggregate_single_expert_is_identity():
    matrix = PairwiseMatrix.from_rows([[1.0, 3.0], [1 / 3, 1.0]])
    merged = aggregate_experts([matrix])
    assert merged.entries[0][1] == pytest.approx(3.0, abs=1e-12)


def test_aggregate_result_is_exactly_reciprocal():
    rng = np.random.default_rng(23)
    for _ in range(20):
        matrices = []
        for _ in range(3):
            rows = [[1.0] * 4 for _ in range(4)]
            for i in range(4):
                for j in range(i + 1, 4):
                    rows[i][j] = float(rng.choice([1 / 4, 1 / 2, 1, 2, 4]))
                    rows[j][i] = 1.0 / rows[i][j]
            matrices.append(PairwiseMatrix.from_rows(rows))
        merged = aggregate_experts(matrices)
        for i in range(4):
            for j in range(4):
                assert merged.entries[i][j] * merged.entries[j][i] == \
                    pytest.approx(1.0, abs=1e-12)


def test_aggregate_rejects_empty_and_mismatched():
    with pytest.raises(DomainError):
        aggregate_experts([])
    small = PairwiseMatrix.from_rows([[1.0, 2.0], [0.5, 1.0]])
    big = PairwiseMatrix.from_rows([[1.0] * 3 for _ in range(3)])
    with pytest.raises(DomainError):
        aggregate_experts([small, big])


# ---------------------------------------------------------------------------
# multiplier conversion
# ---------------------------------------------------------------------------

def test_multipliers_from_normalized_weights():
    weights = (2 / 11, 2 / 11, 2 / 11, 3 / 11, 2 / 11)
    multipliers = weights_to_multipliers(weights)
    assert multipliers.as_tuple() == pytest.approx((1, 1, 1, 1.5, 1),
                                                   abs=1e-12)


def test_multipliers_round_trip_through_normalization():
    start = WeightVector(1, 1, 1, 1.5, 1)
    normalized = [w / start.total for w in start.as_tuple()]
    back = weights_to_multipliers(normalized)
    assert back.as_tuple() == pytest.approx(start.as_tuple(), abs=1e-12)


def test_multipliers_uniform_weights_become_ones():
    assert weights_to_multipliers([0.2] * 5).as_tuple() == \
        pytest.approx((1.0,) * 5, abs=1e-12)


def test_multipliers_reject_bad_input():
    with pytest.raises(DomainError):
        weights_to_multipliers([0.25, 0.25, 0.25, 0.25])
    with pytest.raises(DomainError):
        weights_to_multipliers([0.5, 0.2, 0.1, 0.1, 0.2])
    with pytest.raises(DomainError):
        weights_to_multipliers([0.5, 0.3, 0.3, -0.2, 0.1])


# ---------------------------------------------------------------------------
# Kendall's W
# ---------------------------------------------------------------------------

def test_kendalls_w_unanimous_judges():
    rankings = [(1, 2, 3, 4, 5)] * 3
    assert kendalls_w(rankings) == pytest.approx(1.0, abs=1e-12)


def test_kendalls_w_perfect_disagreement():
    rankings = [(1, 2, 3, 4), (4, 3, 2, 1)]
    assert kendalls_w(rankings) == pytest.approx(0.0, abs=1e-12)


def test_kendalls_w_tie_correction_frozen_value():
    """m=2, n=3, one mid-rank tie.

    R = (2.5, 3.5, 6), S = 6.5; T = 6 for the tied judge;
    W = 12*6.5 / (4*24 - 2*6) = 78/84 = 13/14.
    """
    rankings = [(1.0, 2.0, 3.0), (1.5, 1.5, 3.0)]
    assert kendalls_w(rankings) == pytest.approx(13 / 14, abs=1e-12)


def test_kendalls_w_unanimous_permutations():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(3, 9))
        ranking = rng.permutation(np.arange(1, n + 1)).astype(float)
        judges = [tuple(ranking)] * int(rng.integers(2, 6))
        assert kendalls_w(judges) == pytest.approx(1.0, abs=1e-12)


def test_kendalls_w_rejects_invalid_rank_rows():
    with pytest.raises(DomainError):
        kendalls_w([(1, 2, 2), (1, 2, 3)])
    with pytest.raises(DomainError):
        kendalls_w([(1, 2, 4), (1, 2, 3)])


def test_kendalls_w_rejects_degenerate_shapes():
    with pytest.raises(DomainError):
        kendalls_w([(1, 2, 3)])
    with pytest.raises(DomainError):
        kendalls_w([(1,), (1,)])


def test_kendalls_w_all_tied_is_degenerate():
    with pytest.raises(DegenerateInputError):
        kendalls_w([(2, 2, 2), (2, 2, 2)])


def test_kendalls_w_bounded_for_random_rankings():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(3, 8))
        m = int(rng.integers(2, 6))
        judges = [tuple(rng.permutation(np.arange(1, n + 1)).astype(float))
                  for _ in range(m)]
        value = kendalls_w(judges)
        assert -1e-12 <= value <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# threshold estimation
# ---------------------------------------------------------------------------

def test_estimate_thresholds_on_obvious_clusters():
    scores = [1.0, 1.1, 1.2, 2.0, 2.1, 2.2, 3.0, 3.1, 3.2, 4.0, 4.1, 4.2]
    estimate = estimate_thresholds(scores, WeightVector())
    assert estimate.converged
    assert estimate.centers == pytest.approx((1.1, 2.1, 3.1, 4.1), abs=1e-9)
    t = estimate.thresholds
    assert (t.t12, t.t23, t.t34) == pytest.approx((1.6, 2.6, 3.6), abs=1e-9)
    assert estimate.weight_fingerprint == weight_fingerprint(WeightVector())
    assert estimate.silhouette > 0.8


def _blob_scores(seed: int = 42, per_blob: int = 100) -> np.ndarray:
    rng = np.random.default_rng(seed)
    blobs = [rng.normal(center, 0.12, per_blob)
             for center in (1.5, 2.5, 3.5, 4.5)]
    return np.clip(np.concatenate(blobs), 1.0, 5.0)


def test_estimate_thresholds_recovers_separated_blobs():
    scores = _blob_scores()
    estimate = estimate_thresholds(scores, WeightVector())
    assert estimate.converged
    assert estimate.centers == pytest.approx((1.5, 2.5, 3.5, 4.5), abs=0.08)
    t = estimate.thresholds
    assert (t.t12, t.t23, t.t34) == pytest.approx((2.0, 3.0, 4.0), abs=0.2)


def test_estimate_thresholds_matches_reference_kmeans():
    scores = _blob_scores(seed=7)
    estimate = estimate_thresholds(scores, WeightVector())
    reference = KMeans(n_clusters=4, n_init=10, random_state=0)
    reference.fit(scores.reshape(-1, 1))
    centers = np.sort(reference.cluster_centers_.ravel())
    assert estimate.centers == pytest.approx(tuple(centers), abs=1e-7)


def test_estimate_silhouette_matches_reference():
    scores = _blob_scores(seed=9)
    estimate = estimate_thresholds(scores, WeightVector())
    labels = np.argmin(
        np.abs(scores[:, None] - np.asarray(estimate.centers)[None, :]),
        axis=1)
    reference = silhouette_score(scores.reshape(-1, 1), labels,
                                 metric="euclidean")
    assert estimate.silhouette == pytest.approx(float(reference), abs=1e-9)


def test_estimate_thresholds_input_validation():
    with pytest.raises(DomainError):
        estimate_thresholds([1.0, 2.0, 3.0], WeightVector())
    with pytest.raises(DomainError):
        estimate_thresholds([1.0, 2.0, 3.0] * 4, WeightVector())
    with pytest.raises(DomainError):
        estimate_thresholds([0.5, 2.0, 3.0, 4.0] * 3, WeightVector())


def test_estimate_thresholds_jitter_is_seeded():
    scores = _blob_scores(seed=3)
    first = estimate_thresholds(scores, WeightVector(), seed=12, jitter=0.05)
    second = estimate_thresholds(scores, WeightVector(), seed=12, jitter=0.05)
    assert first == second


def test_estimate_thresholds_default_path_ignores_seed():
    scores = _blob_scores(seed=4)
    assert estimate_thresholds(scores, WeightVector(), seed=1) == \
        estimate_thresholds(scores, WeightVector(), seed=99)


# ---------------------------------------------------------------------------
# weight / threshold coupling
# ---------------------------------------------------------------------------

def test_coupling_passes_when_fingerprints_match():
    weights = WeightVector()
    policy = ScoringPolicy(weight_fingerprint=weight_fingerprint(weights))
    check = check_coupling(policy, None, weights)
    assert check.ok
    ensure_coupling(policy, None, weights)


def test_coupling_fails_on_changed_weights():
    policy = ScoringPolicy(weight_fingerprint=weight_fingerprint(WeightVector()))
    changed = WeightVector(1, 1, 1, 2.0, 1)
    check = check_coupling(policy, None, changed)
    assert not check.ok
    with pytest.raises(CouplingError):
        ensure_coupling(policy, None, changed)


def test_coupling_estimate_takes_precedence_over_policy():
    weights = WeightVector()
    estimate = estimate_thresholds(
        [1.0, 1.1, 1.2, 2.0, 2.1, 2.2, 3.0, 3.1, 3.2, 4.0, 4.1, 4.2],
        WeightVector(1, 1, 1, 2.0, 1))
    policy = ScoringPolicy(weight_fingerprint=weight_fingerprint(weights))
    check = check_coupling(policy, estimate, weights)
    assert not check.ok
    assert check.expected == estimate.weight_fingerprint


def test_coupling_with_nothing_pinned_is_ok():
    check = check_coupling(None, None, WeightVector())
    assert check.ok
    assert check.expected is None
    ensure_coupling(None, None, WeightVector())
    ensure_coupling(ScoringPolicy(), None, WeightVector())
