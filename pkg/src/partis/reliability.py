"""Inter-rater agreement statistics over complete rating designs.

Implements Fleiss' kappa, Gwet's AC1, and Cohen's kappa on a shared
table type, plus a seeded item-resampling bootstrap for confidence
intervals and the Landis-Koch interpretation bands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError


@dataclass(frozen=True)
class RatingsTable:
    """A complete items x raters design over a fixed category list.

    Every (item, rater) pair must be assigned exactly one category from
    `categories`; incomplete designs are rejected up front.
    """

    items: tuple[str, ...]
    raters: tuple[str, ...]
    categories: tuple[str, ...]
    assignments: Mapping[tuple[str, str], str]

    def __post_init__(self) -> None:
        if not self.items:
            raise DomainError("ratings table has no items")
        if not self.raters:
            raise DomainError("ratings table has no raters")
        if len(set(self.items)) != len(self.items):
            raise DomainError("item ids must be unique")
        if len(set(self.raters)) != len(self.raters):
            raise DomainError("rater ids must be unique")
        if len(set(self.categories)) != len(self.categories):
            raise DomainError("categories must be unique")
        known = set(self.categories)
        expected = {(item, rater) for item in self.items for rater in self.raters}
        actual = set(self.assignments.keys())
        if actual != expected:
            gaps = sorted(expected - actual)[:3]
            extras = sorted(actual - expected)[:3]
            raise DomainError(
                "ratings table must cover every (item, rater) pair exactly; "
                f"missing {gaps or 'none'}, unexpected {extras or 'none'}")
        for pair, category in self.assignments.items():
            if category not in known:
                raise DomainError(
                    f"assignment {pair} uses unknown category {category!r}")

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_raters(self) -> int:
        return len(self.raters)

    def counts(self) -> np.ndarray:
        """N x q matrix: how many raters put item i into category k."""
        index = {cat: k for k, cat in enumerate(self.categories)}
        counts = np.zeros((len(self.items), len(self.categories)), dtype=np.int64)
        for i, item in enumerate(self.items):
            for rater in self.raters:
                counts[i, index[self.assignments[(item, rater)]]] += 1
        return counts


def fleiss_kappa(table: RatingsTable) -> float:
    """Fleiss' kappa for r raters over N items.

        P_i   = (sum_k n_ik^2 - r) / (r (r - 1))
        Pbar  = mean_i P_i
        p_k   = sum_i n_ik / (N r)
        Pbar_e = sum_k p_k^2
        kappa = (Pbar - Pbar_e) / (1 - Pbar_e)

    Undefined (degenerate) when every rating lands in one category, since
    then Pbar_e = 1.
    """
    counts = table.counts()
    r = table.n_raters
    if r < 2:
        raise DomainError("fleiss kappa needs at least two raters")
    p_i = (np.square(counts).sum(axis=1) - r) / (r * (r - 1))
    p_bar = float(p_i.mean())
    p_k = counts.sum(axis=0) / counts.sum()
    p_e = float(np.square(p_k).sum())
    if abs(1.0 - p_e) < 1e-12:
        raise DegenerateInputError(
            "chance agreement is 1 (all ratings in one category); "
            "fleiss kappa is undefined")
    return (p_bar - p_e) / (1.0 - p_e)


def gwet_ac1(table: RatingsTable) -> float:
    """Gwet's AC1 with the same observed agreement as Fleiss' kappa.

        pi_k = sum_i n_ik / (N r)                (mean prevalence)
        Pe   = (1 / (q - 1)) sum_k pi_k (1 - pi_k)
        AC1  = (Pbar - Pe) / (1 - Pe)

    Stays defined on one-sided category use, which is the point of the
    statistic; only a single-category table (q = 1) is degenerate.
    """
    q = len(table.categories)
    if q < 2:
        raise DegenerateInputError("AC1 needs at least two categories")
    counts = table.counts()
    r = table.n_raters
    if r < 2:
        raise DomainError("AC1 needs at least two raters")
    p_i = (np.square(counts).sum(axis=1) - r) / (r * (r - 1))
    p_bar = float(p_i.mean())
    pi_k = counts.sum(axis=0) / counts.sum()
    p_e = float((pi_k * (1.0 - pi_k)).sum() / (q - 1))
    if abs(1.0 - p_e) < 1e-12:
        raise DegenerateInputError("chance agreement is 1; AC1 is undefined")
    return (p_bar - p_e) / (1.0 - p_e)


def cohen_kappa(table: RatingsTable) -> float:
    """Cohen's kappa for exactly two raters.

        p_o = fraction of items with identical labels
        p_e = sum_k (row marginal_k / N) (column marginal_k / N)
        kappa = (p_o - p_e) / (1 - p_e)
    """
    if table.n_raters != 2:
        raise DomainError("cohen kappa is defined for exactly two raters")
    index = {cat: k for k, cat in enumerate(table.categories)}
    q = len(table.categories)
    confusion = np.zeros((q, q), dtype=np.int64)
    first, second = table.raters
    for item in table.items:
        a = index[table.assignments[(item, first)]]
        b = index[table.assignments[(item, second)]]
        confusion[a, b] += 1
    n = confusion.sum()
    p_o = float(np.trace(confusion)) / n
    p_e = float((confusion.sum(axis=1) / n) @ (confusion.sum(axis=0) / n))
    if abs(1.0 - p_e) < 1e-12:
        raise DegenerateInputError(
            "chance agreement is 1; cohen kappa is undefined")
    return (p_o - p_e) / (1.0 - p_e)


STATISTICS: dict[str, Callable[[RatingsTable], float]] = {
    "fleiss_kappa": fleiss_kappa,
    "gwet_ac1": gwet_ac1,
    "cohen_kappa": cohen_kappa,
}


@dataclass(frozen=True)
class BootstrapCI:
    low: float
    high: float
    valid_resamples: int
    degenerate_resamples: int


def bootstrap_ci(
    table: RatingsTable,
    statistic: str | Callable[[RatingsTable], float],
    b: int = 2000,
    seed: int = 0,
) -> BootstrapCI:
    """Percentile bootstrap (2.5 / 97.5) by resampling items with replacement.

    Each resample draws its randomness from (seed, resample index), so
    results do not depend on evaluation order. Resamples on which the
    statistic is degenerate are skipped and counted; more than half
    degenerate means the interval would be meaningless and is an error.
    """
    if isinstance(statistic, str):
        try:
            stat_fn = STATISTICS[statistic]
        except KeyError:
            raise DomainError(f"unknown statistic {statistic!r}") from None
    else:
        stat_fn = statistic
    if b < 1:
        raise DomainError("bootstrap needs b >= 1 resamples")

    n = table.n_items
    values = []
    degenerate = 0
    for i in range(b):
        rng = np.random.default_rng((seed, i))
        drawn = rng.integers(0, n, size=n)
        items = tuple(f"{table.items[j]}#{pos}" for pos, j in enumerate(drawn))
        assignments = {
            (items[pos], rater): table.assignments[(table.items[j], rater)]
            for pos, j in enumerate(drawn)
            for rater in table.raters
        }
        resampled = RatingsTable(items, table.raters, table.categories, assignments)
        try:
            values.append(stat_fn(resampled))
        except DegenerateInputError:
            degenerate += 1
    if degenerate * 2 > b:
        raise DomainError(
            f"bootstrap unstable: {degenerate} of {b} resamples degenerate")
    low, high = np.percentile(values, [2.5, 97.5])
    return BootstrapCI(
        low=float(low),
        high=float(high),
        valid_resamples=len(values),
        degenerate_resamples=degenerate,
    )


_BANDS = (
    (0.20, "slight"),
    (0.40, "fair"),
    (0.60, "moderate"),
    (0.80, "substantial"),
    (1.00, "almost perfect"),
)


def landis_koch_band(value: float) -> str:
    """Interpretation band for an agreement coefficient, upper edges inclusive."""
    if value > 1.0 + 1e-9:
        raise DomainError(f"agreement coefficients cannot exceed 1, got {value!r}")
    if value < 0.0:
        return "poor"
    for upper, label in _BANDS:
        if value <= upper + 1e-9:
            return label
    return "almost perfect"


@dataclass(frozen=True)
class ReliabilityResult:
    statistic: str
    value: float
    band: str
    n_items: int
    n_raters: int
    ci: BootstrapCI | None = None


def evaluate(
    table: RatingsTable,
    statistic: str,
    bootstrap_b: int | None = None,
    seed: int = 0,
) -> ReliabilityResult:
    """Compute one statistic with its band and optional bootstrap interval."""
    if statistic not in STATISTICS:
        raise DomainError(f"unknown statistic {statistic!r}")
    value = STATISTICS[statistic](table)
    ci = None
    if bootstrap_b is not None:
        ci = bootstrap_ci(table, statistic, b=bootstrap_b, seed=seed)
    return ReliabilityResult(
        statistic=statistic,
        value=value,
        band=landis_koch_band(value),
        n_items=table.n_items,
        n_raters=table.n_raters,
        ci=ci,
    )
