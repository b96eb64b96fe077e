"""LARA scoring: from five rubric dimensions to an agent-readiness level.

The pipeline per task is fixed: rater consensus -> weighted mean ->
boundary resolution -> oversight floor -> deployment mode. Every stage is
a pure function so the whole module is safe to call concurrently.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConsensusError, CouplingError, DomainError, SchemaError

# Absolute tolerance for comparisons against thresholds, so that a score
# of exactly 2.0 lands below t12 = 2.0 despite binary rounding.
BOUNDARY_TOL = 1e-9


class Level(enum.IntEnum):
    L1 = 1
    L2 = 2
    L3 = 3
    L4 = 4


# Who executes and who watches, per readiness level.
DEPLOYMENT_MODES: dict[Level, str] = {
    Level.L1: "Full agent + 5% spot check",
    Level.L2: "Agent drafts + human approval",
    Level.L3: "Human-led + agent copilot",
    Level.L4: "Fully human execution",
}


class BoundaryPolicy(enum.Enum):
    CONSERVATIVE_UPGRADE_WITH_D4_SWING = "conservative_upgrade_with_d4_swing"
    FLAG_ONLY = "flag_only"


class ConsensusRule(enum.Enum):
    MEDIAN_ROUND_UP = "median_round_up"
    MEAN_ROUND_HALF_UP = "mean_round_half_up"
    REQUIRE_EXACT = "require_exact"


@dataclass(frozen=True)
class DimensionScores:
    """One rater's (or the consensus) rubric scores, each an integer 1..5.

    d1 task complexity, d2 fault tolerance, d3 data sensitivity,
    d4 human oversight need, d5 automation cost-benefit.
    """

    d1: int
    d2: int
    d3: int
    d4: int
    d5: int

    def __post_init__(self) -> None:
        for name, value in zip(self.dimension_names(), self.as_tuple()):
            # numpy integers are welcome, bools are not (True would pass
            # the range check as 1)
            if (isinstance(value, bool)
                    or not isinstance(value, (int, np.integer))
                    or not 1 <= value <= 5):
                raise SchemaError(
                    f"{name} must be an integer in 1..5, got {value!r}")
            if isinstance(value, np.integer):
                object.__setattr__(self, name, int(value))

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.d1, self.d2, self.d3, self.d4, self.d5)

    @staticmethod
    def dimension_names() -> tuple[str, str, str, str, str]:
        return ("d1", "d2", "d3", "d4", "d5")


@dataclass(frozen=True)
class WeightVector:
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 1.5
    w5: float = 1.0

    def __post_init__(self) -> None:
        for name, value in zip(("w1", "w2", "w3", "w4", "w5"), self.as_tuple()):
            if not value > 0:
                raise SchemaError(f"{name} must be positive, got {value!r}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.w1, self.w2, self.w3, self.w4, self.w5)

    @property
    def total(self) -> float:
        return self.w1 + self.w2 + self.w3 + self.w4 + self.w5


def weight_fingerprint(weights: WeightVector) -> str:
    """Opaque digest binding scores and thresholds to one weight vector."""
    canonical = "lara-weights:v1:" + ",".join(repr(float(w)) for w in weights.as_tuple())
    return hashlib.sha256(canonical.encode("ascii")).hexdigest()


@dataclass(frozen=True)
class Thresholds:
    t12: float = 2.0
    t23: float = 3.0
    t34: float = 4.0
    boundary_halfwidth: float = 0.15

    def __post_init__(self) -> None:
        if not (1.0 < self.t12 < self.t23 < self.t34 < 5.0):
            raise SchemaError(
                "thresholds must satisfy 1.0 < t12 < t23 < t34 < 5.0, got "
                f"({self.t12}, {self.t23}, {self.t34})")
        if self.boundary_halfwidth < 0:
            raise SchemaError("boundary_halfwidth must be >= 0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t12, self.t23, self.t34)


@dataclass(frozen=True)
class ScoringPolicy:
    floor_enabled: bool = True
    floor_d4_threshold: int = 4
    floor_level: Level = Level.L3
    boundary_policy: BoundaryPolicy = BoundaryPolicy.CONSERVATIVE_UPGRADE_WITH_D4_SWING
    consensus: ConsensusRule = ConsensusRule.MEDIAN_ROUND_UP
    weight_fingerprint: str | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.floor_d4_threshold <= 5:
            raise SchemaError("floor_d4_threshold must be in 1..5")
        if self.floor_level not in (Level.L2, Level.L3, Level.L4):
            raise SchemaError("floor_level must be one of L2, L3, L4")


@dataclass(frozen=True)
class BoundaryInfo:
    """A score close enough to a threshold to deserve a second look."""

    threshold: str
    threshold_value: float
    distance: float


@dataclass(frozen=True)
class LaraResult:
    score: float
    level_pre_floor: Level
    level: Level
    floor_applied: bool
    boundary: BoundaryInfo | None
    deployment_mode: str


# ---------------------------------------------------------------------------
# elementary operations
# ---------------------------------------------------------------------------

_BLOOM_TO_D1 = {1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 5}


def bloom_to_d1(bloom_level: int) -> int:
    """Suggested D1 anchor for a task's peak bloom level (5 and 6 compress)."""
    try:
        return _BLOOM_TO_D1[bloom_level]
    except KeyError:
        raise DomainError(f"bloom level must be in 1..6, got {bloom_level!r}") from None


def weighted_mean(scores: DimensionScores, weights: WeightVector) -> float:
    d = scores.as_tuple()
    w = weights.as_tuple()
    return sum(di * wi for di, wi in zip(d, w)) / weights.total


def classify(score: float, thresholds: Thresholds) -> Level:
    """Map a score onto L1..L4, upper edge of each band inclusive."""
    if not (1.0 - BOUNDARY_TOL <= score <= 5.0 + BOUNDARY_TOL):
        raise DomainError(f"score must lie in [1, 5], got {score!r}")
    if score <= thresholds.t12 + BOUNDARY_TOL:
        return Level.L1
    if score <= thresholds.t23 + BOUNDARY_TOL:
        return Level.L2
    if score <= thresholds.t34 + BOUNDARY_TOL:
        return Level.L3
    return Level.L4


def nearest_boundary(score: float, thresholds: Thresholds) -> BoundaryInfo | None:
    """The threshold within the watch zone of this score, if any.

    When two thresholds are equidistant (only possible with an unusually
    wide halfwidth) the higher one wins, matching the conservative bias
    of the default policy.
    """
    best: BoundaryInfo | None = None
    for name, value in zip(("t12", "t23", "t34"), thresholds.as_tuple()):
        distance = abs(score - value)
        if distance <= thresholds.boundary_halfwidth + BOUNDARY_TOL:
            if best is None or distance <= best.distance:
                best = BoundaryInfo(name, value, distance)
    return best


def resolve_boundary(
    score: float,
    scores: DimensionScores,
    thresholds: Thresholds,
    policy: ScoringPolicy,
) -> tuple[Level, BoundaryInfo | None]:
    """Classify a score, settling near-threshold cases per policy.

    Inside the watch zone the conservative policy assigns the higher
    level at t12 and t34; at t23 the oversight dimension decides
    (d4 >= 3 -> L3, d4 <= 2 -> L2). flag_only classifies normally. The
    boundary info is returned either way so reports can keep a watch
    list.
    """
    boundary = nearest_boundary(score, thresholds)
    if boundary is None:
        return classify(score, thresholds), None
    if policy.boundary_policy is BoundaryPolicy.FLAG_ONLY:
        return classify(score, thresholds), boundary
    if boundary.threshold == "t12":
        return Level.L2, boundary
    if boundary.threshold == "t34":
        return Level.L4, boundary
    return (Level.L3 if scores.d4 >= 3 else Level.L2), boundary


def apply_floor(
    level_pre: Level,
    scores: DimensionScores,
    policy: ScoringPolicy,
) -> tuple[Level, bool]:
    """Raise the level to the oversight floor when d4 is high enough.

    The applied flag reports an actual raise, not merely an eligible d4.
    """
    if not policy.floor_enabled or scores.d4 < policy.floor_d4_threshold:
        return level_pre, False
    if policy.floor_level > level_pre:
        return policy.floor_level, True
    return level_pre, False


# ---------------------------------------------------------------------------
# consensus and per-task scoring
# ---------------------------------------------------------------------------

def consensus_scores(
    ratings: Sequence[DimensionScores],
    rule: ConsensusRule = ConsensusRule.MEDIAN_ROUND_UP,
) -> DimensionScores:
    if not ratings:
        raise DomainError("at least one rating is required")
    columns = list(zip(*(r.as_tuple() for r in ratings)))
    if rule is ConsensusRule.REQUIRE_EXACT:
        disagreeing = tuple(
            name for name, col in zip(DimensionScores.dimension_names(), columns)
            if len(set(col)) > 1)
        if disagreeing:
            raise ConsensusError(disagreeing)
        return ratings[0]
    merged = []
    for col in columns:
        if rule is ConsensusRule.MEDIAN_ROUND_UP:
            ordered = sorted(col)
            n = len(ordered)
            if n % 2:
                merged.append(ordered[n // 2])
            else:
                merged.append(math.ceil((ordered[n // 2 - 1] + ordered[n // 2]) / 2))
        else:
            merged.append(math.floor(sum(col) / len(col) + 0.5))
    return DimensionScores(*merged)


def assign_level(
    scores: DimensionScores,
    weights: WeightVector,
    thresholds: Thresholds,
    policy: ScoringPolicy,
) -> LaraResult:
    """Score one consensus vector through the full pipeline."""
    score = weighted_mean(scores, weights)
    level_pre, boundary = resolve_boundary(score, scores, thresholds, policy)
    level, floored = apply_floor(level_pre, scores, policy)
    return LaraResult(
        score=score,
        level_pre_floor=level_pre,
        level=level,
        floor_applied=floored,
        boundary=boundary,
        deployment_mode=DEPLOYMENT_MODES[level],
    )


def score_task(
    ratings: Sequence[DimensionScores],
    weights: WeightVector,
    thresholds: Thresholds,
    policy: ScoringPolicy,
) -> LaraResult:
    consensus = consensus_scores(ratings, policy.consensus)
    return assign_level(consensus, weights, thresholds, policy)


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityReport:
    delta: float
    n_tasks: int
    changed_count: int
    changed_fraction: float
    per_threshold: dict[str, float]


def sensitivity_analysis(
    score_vectors: Sequence[DimensionScores],
    weights: WeightVector,
    thresholds: Thresholds,
    policy: ScoringPolicy,
    delta: float,
) -> SensitivityReport:
    """Fraction of tasks whose level moves when one threshold shifts by delta.

    Each of t12, t23, t34 is perturbed up and down in turn (six runs);
    floor and boundary policy are applied identically to the baseline and
    every perturbed run. A perturbation that breaks the threshold
    ordering is a configuration error.
    """
    if not score_vectors:
        raise DomainError("sensitivity analysis needs at least one task")
    if delta <= 0:
        raise DomainError("delta must be positive")

    def perturbed(name: str, sign: int) -> Thresholds:
        values = dict(zip(("t12", "t23", "t34"), thresholds.as_tuple()))
        values[name] += sign * delta
        t12, t23, t34 = values["t12"], values["t23"], values["t34"]
        if not (1.0 < t12 < t23 < t34 < 5.0):
            raise DomainError(
                f"perturbing {name} by {sign * delta:+g} breaks the "
                f"threshold ordering ({t12}, {t23}, {t34})")
        return Thresholds(t12, t23, t34, thresholds.boundary_halfwidth)

    baseline = [assign_level(v, weights, thresholds, policy).level
                for v in score_vectors]
    changed_any = [False] * len(score_vectors)
    per_threshold: dict[str, float] = {}
    for name in ("t12", "t23", "t34"):
        changed_here = [False] * len(score_vectors)
        for sign in (+1, -1):
            variant = perturbed(name, sign)
            for i, vector in enumerate(score_vectors):
                level = assign_level(vector, weights, variant, policy).level
                if level != baseline[i]:
                    changed_here[i] = True
                    changed_any[i] = True
        per_threshold[name] = sum(changed_here) / len(score_vectors)

    count = sum(changed_any)
    return SensitivityReport(
        delta=delta,
        n_tasks=len(score_vectors),
        changed_count=count,
        changed_fraction=count / len(score_vectors),
        per_threshold=per_threshold,
    )


# ---------------------------------------------------------------------------
# portfolio summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryEntry:
    """One scored task as it enters the domain summary."""

    task_id: str
    domain: str | None
    activity_id: str
    result: LaraResult
    rater_levels: tuple[Level, ...]
    d4: int
    weight_fingerprint: str | None = None


@dataclass(frozen=True)
class DomainRow:
    domain: str
    activities: int
    tasks: int
    l1: int
    l2: int
    l3: int
    l4: int
    l1_pct: float
    kappa: float | None
    mean_d4: float


@dataclass(frozen=True)
class PortfolioSummary:
    rows: tuple[DomainRow, ...]
    total: DomainRow


def portfolio_summary(entries: Sequence[SummaryEntry]) -> PortfolioSummary:
    """Per-domain level counts, agreement, and oversight demand.

    Refuses to merge entries scored under different weight fingerprints:
    levels are only comparable within one (weights, thresholds) pair.
    """
    if not entries:
        raise DomainError("portfolio summary needs at least one task")
    fingerprints = {e.weight_fingerprint for e in entries}
    if len(fingerprints) > 1:
        raise CouplingError(
            "entries were scored under different weight fingerprints: "
            + ", ".join(sorted(str(f) for f in fingerprints)))
    rater_counts = {len(e.rater_levels) for e in entries}
    if len(rater_counts) > 1:
        raise DomainError("every task must be rated by the same rater panel")
    for entry in entries:
        if not entry.domain:
            raise DomainError(f"task {entry.task_id} has no domain label")

    by_domain: dict[str, list[SummaryEntry]] = {}
    for entry in entries:
        by_domain.setdefault(entry.domain, []).append(entry)

    rows = tuple(
        _domain_row(domain, group)
        for domain, group in sorted(by_domain.items())
    )
    total = _domain_row("TOTAL", list(entries))
    return PortfolioSummary(rows=rows, total=total)


def _domain_row(label: str, group: list[SummaryEntry]) -> DomainRow:
    counts = {level: 0 for level in Level}
    for entry in group:
        counts[entry.result.level] += 1
    n = len(group)
    return DomainRow(
        domain=label,
        activities=len({e.activity_id for e in group}),
        tasks=n,
        l1=counts[Level.L1],
        l2=counts[Level.L2],
        l3=counts[Level.L3],
        l4=counts[Level.L4],
        l1_pct=100.0 * counts[Level.L1] / n,
        kappa=_levels_kappa(group),
        mean_d4=sum(e.d4 for e in group) / n,
    )


def _levels_kappa(group: list[SummaryEntry]) -> float | None:
    from .errors import DegenerateInputError
    from .reliability import RatingsTable, fleiss_kappa

    n_raters = len(group[0].rater_levels)
    if n_raters < 2:
        return None
    table = RatingsTable(
        items=tuple(e.task_id for e in group),
        raters=tuple(f"rater{i + 1}" for i in range(n_raters)),
        categories=tuple(level.name for level in Level),
        assignments={
            (e.task_id, f"rater{i + 1}"): level.name
            for e in group
            for i, level in enumerate(e.rater_levels)
        },
    )
    try:
        return fleiss_kappa(table)
    except DegenerateInputError:
        # Chance agreement is 1 only when every rating lands in a single
        # category, which is unanimous agreement; report it as 1.0.
        return 1.0
