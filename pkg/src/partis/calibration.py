"""Weight and threshold calibration from expert judgments.

Covers AHP priority derivation with consistency checking, geometric
aggregation of expert matrices, conversion of normalized weights into
rubric multipliers, Kendall's W for ranking concordance, and a 1-D
k-means estimator that proposes level thresholds from observed scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import CouplingError, DegenerateInputError, DomainError
from .scoring import ScoringPolicy, Thresholds, WeightVector, weight_fingerprint

_TOL = 1e-9

# Random consistency indices for n = 1..9 (Saaty's table).
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12,
                6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45}


@dataclass(frozen=True)
class PairwiseMatrix:
    """A positive reciprocal comparison matrix on Saaty's 1/9..9 scale."""

    entries: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise DomainError("pairwise matrix must be square and non-empty")
        for i in range(n):
            for j in range(n):
                value = self.entries[i][j]
                if not value > 0:
                    raise DomainError(
                        f"entry ({i}, {j}) must be positive, got {value!r}")
                if not (1 / 9 - _TOL <= value <= 9 + _TOL):
                    raise DomainError(
                        f"entry ({i}, {j}) = {value!r} lies outside the "
                        "1/9..9 judgment scale")
            if abs(self.entries[i][i] - 1.0) > _TOL:
                raise DomainError(f"diagonal entry ({i}, {i}) must be 1")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(self.entries[i][j] * self.entries[j][i] - 1.0) > _TOL:
                    raise DomainError(
                        f"entries ({i}, {j}) and ({j}, {i}) are not reciprocal")

    @property
    def n(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    @staticmethod
    def from_rows(rows: Sequence[Sequence[float]]) -> "PairwiseMatrix":
        return PairwiseMatrix(tuple(tuple(float(v) for v in row) for row in rows))


@dataclass(frozen=True)
class AhpResult:
    weights: tuple[float, ...]
    lambda_max: float
    consistency_index: float
    random_index: float
    consistency_ratio: float
    # False for n < 3, where no random index exists and CR is reported 0.
    cr_defined: bool


def ahp_priority(matrix: PairwiseMatrix) -> AhpResult:
    """Priority weights via row geometric means, with Saaty consistency.

        w_i ~ geomean(row i), normalized to sum 1
        lambda_max = mean_i (A w)_i / w_i
        CI = (lambda_max - n) / (n - 1), CR = CI / RI(n)
    """
    a = matrix.as_array()
    n = matrix.n
    weights = np.exp(np.log(a).mean(axis=1))
    weights = weights / weights.sum()
    lambda_max = float((a @ weights / weights).mean())
    ci = (lambda_max - n) / (n - 1) if n > 1 else 0.0
    ri = RANDOM_INDEX.get(n)
    if ri is None:
        raise DomainError(f"no random index for n = {n}; supported sizes are 1..9")
    cr_defined = n >= 3
    cr = ci / ri if cr_defined else 0.0
    return AhpResult(
        weights=tuple(float(w) for w in weights),
        lambda_max=lambda_max,
        consistency_index=float(ci),
        random_index=float(ri),
        consistency_ratio=float(cr),
        cr_defined=cr_defined,
    )


def aggregate_experts(matrices: Sequence[PairwiseMatrix]) -> PairwiseMatrix:
    """Element-wise geometric mean of individual judgment matrices.

    The lower triangle is mirrored from the aggregated upper triangle, so
    the result is reciprocal by construction rather than by rounding luck.
    """
    if not matrices:
        raise DomainError("at least one expert matrix is required")
    n = matrices[0].n
    if any(m.n != n for m in matrices):
        raise DomainError("expert matrices must all have the same size")
    stack = np.stack([m.as_array() for m in matrices])
    merged = np.exp(np.log(stack).mean(axis=0))
    rows = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = float(merged[i, j])
            rows[j][i] = 1.0 / rows[i][j]
    return PairwiseMatrix.from_rows(rows)


def weights_to_multipliers(weights: Sequence[float]) -> WeightVector:
    """Rescale five normalized weights into rubric multiplier form.

    The minimum-set convention divides every weight by the mean of the
    smallest weights (all weights within tolerance of the minimum), so a
    vector like (0.1818, 0.1818, 0.1818, 0.2727, 0.1818) becomes exactly
    (1, 1, 1, 1.5, 1) and renormalizing the multipliers recovers the
    input.
    """
    w = np.asarray(list(weights), dtype=float)
    if w.shape != (5,):
        raise DomainError("exactly five weights are required")
    if not (w > 0).all():
        raise DomainError("weights must be positive")
    if abs(w.sum() - 1.0) > 1e-3:
        raise DomainError(
            f"weights must be normalized to sum 1, got sum {w.sum()!r}")
    smallest = w.min()
    unit = float(w[w <= smallest * (1 + _TOL)].mean())
    m = w / unit
    return WeightVector(*(float(v) for v in m))


# ---------------------------------------------------------------------------
# Kendall's W
# ---------------------------------------------------------------------------

def kendalls_w(rankings: Sequence[Sequence[float]]) -> float:
    """Kendall's coefficient of concordance with the tie correction.

        R_i = sum over judges of item i's rank
        S   = sum_i (R_i - mean R)^2
        T_j = sum over tie groups of judge j of (t^3 - t)
        W   = 12 S / (m^2 (n^3 - n) - m sum_j T_j)

    Each judge's row must be a valid mean-rank ranking of the n items
    (possibly tied); a row is valid iff re-ranking it reproduces it.
    """
    ranks = np.asarray([list(row) for row in rankings], dtype=float)
    if ranks.ndim != 2:
        raise DomainError("rankings must be a judges x items matrix")
    m, n = ranks.shape
    if m < 2:
        raise DomainError("concordance needs at least two judges")
    if n < 2:
        raise DomainError("concordance needs at least two items")
    for j in range(m):
        if np.max(np.abs(rankdata(ranks[j]) - ranks[j])) > _TOL:
            raise DomainError(
                f"row {j} is not a valid mean-rank ranking of {n} items")

    totals = ranks.sum(axis=0)
    s = float(np.square(totals - totals.mean()).sum())
    tie_term = 0.0
    for j in range(m):
        _, counts = np.unique(ranks[j], return_counts=True)
        tie_term += float((counts**3 - counts).sum())
    denominator = m * m * (n**3 - n) - m * tie_term
    if denominator <= 0:
        raise DegenerateInputError(
            "all items tied by all judges; concordance is undefined")
    return 12.0 * s / denominator


# ---------------------------------------------------------------------------
# threshold estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdEstimate:
    thresholds: Thresholds
    centers: tuple[float, float, float, float]
    silhouette: float
    weight_fingerprint: str
    converged: bool
    iterations: int


def estimate_thresholds(
    scores: Sequence[float],
    weights: WeightVector,
    seed: int = 0,
    jitter: float = 0.0,
) -> ThresholdEstimate:
    """Propose (t12, t23, t34) by 1-D k-means (k = 4) over observed scores.

    Initialization is deterministic: centers start at the 12.5 / 37.5 /
    62.5 / 87.5 percentiles. Lloyd iterations stop when no center moves
    more than 1e-9 or after 200 rounds (reported via the converged flag).
    Each threshold is the midpoint between adjacent cluster extremes.
    The seed only matters for jitter studies (jitter > 0 perturbs the
    initial centers); the default path ignores it.
    """
    x = np.asarray(list(scores), dtype=float)
    if x.ndim != 1 or x.size < 8:
        raise DomainError("threshold estimation needs at least 8 scores")
    if not ((x >= 1.0 - _TOL) & (x <= 5.0 + _TOL)).all():
        raise DomainError("scores must lie in [1, 5]")
    if len(np.unique(x)) < 4:
        raise DomainError(
            "threshold estimation needs at least 4 distinct score values")

    centers = np.percentile(x, [12.5, 37.5, 62.5, 87.5])
    if jitter > 0:
        centers = centers + np.random.default_rng(seed).normal(0.0, jitter, 4)
    converged = False
    iterations = 0
    labels = np.zeros(x.size, dtype=int)
    for iterations in range(1, 201):
        labels = np.argmin(np.abs(x[:, None] - centers[None, :]), axis=1)
        moved = 0.0
        for k in range(4):
            members = x[labels == k]
            if members.size:
                new_center = members.mean()
                moved = max(moved, abs(new_center - centers[k]))
                centers[k] = new_center
        if moved < 1e-9:
            converged = True
            break

    order = np.argsort(centers, kind="stable")
    centers = centers[order]
    relabel = np.empty(4, dtype=int)
    relabel[order] = np.arange(4)
    labels = relabel[labels]
    clusters = [np.sort(x[labels == k]) for k in range(4)]
    if any(c.size == 0 for c in clusters):
        raise DomainError(
            "clustering collapsed below four groups; scores do not "
            "separate into four levels")
    cuts = []
    for k in range(3):
        lo, hi = clusters[k][-1], clusters[k + 1][0]
        if not lo < hi:
            raise DomainError("adjacent clusters overlap; no clean cut exists")
        cuts.append((lo + hi) / 2.0)

    return ThresholdEstimate(
        thresholds=Thresholds(cuts[0], cuts[1], cuts[2]),
        centers=tuple(float(c) for c in centers),
        silhouette=_mean_silhouette(x, labels),
        weight_fingerprint=weight_fingerprint(weights),
        converged=converged,
        iterations=iterations,
    )


def _mean_silhouette(x: np.ndarray, labels: np.ndarray) -> float:
    values = np.zeros(x.size)
    for i in range(x.size):
        own = x[(labels == labels[i])]
        if own.size <= 1:
            values[i] = 0.0
            continue
        a = np.abs(own - x[i]).sum() / (own.size - 1)
        b = min(
            np.abs(x[labels == k] - x[i]).mean()
            for k in range(4) if k != labels[i]
        )
        top = max(a, b)
        values[i] = 0.0 if top == 0 else (b - a) / top
    return float(values.mean())


# ---------------------------------------------------------------------------
# weight / threshold coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingCheck:
    ok: bool
    expected: str | None
    actual: str


def check_coupling(
    policy: ScoringPolicy | None,
    estimate: ThresholdEstimate | None,
    current_weights: WeightVector,
) -> CouplingCheck:
    """Verify that current weights match the fingerprint thresholds were
    estimated under. With no fingerprint on record there is nothing to
    violate.
    """
    expected = None
    if estimate is not None:
        expected = estimate.weight_fingerprint
    elif policy is not None:
        expected = policy.weight_fingerprint
    actual = weight_fingerprint(current_weights)
    ok = expected is None or expected == actual
    return CouplingCheck(ok=ok, expected=expected, actual=actual)


def ensure_coupling(
    policy: ScoringPolicy | None,
    estimate: ThresholdEstimate | None,
    current_weights: WeightVector,
) -> None:
    check = check_coupling(policy, estimate, current_weights)
    if not check.ok:
        raise CouplingError(
            "weights changed since thresholds were estimated "
            f"(expected fingerprint {check.expected}, current {check.actual}); "
            "re-estimate thresholds or restore the original weights")
