"""Command-line front end.

Every command accepts --format text|structured. Text output leads with
levels and verdicts; structured output is the canonical JSON form of the
module result. Exit codes are a total function of the outcome class:

    0  success
    1  domain error (validation errors, refusals, degenerate statistics)
    2  unreadable or malformed input
    3  weight-threshold coupling violation

Nothing is written to stderr on success.
"""

from __future__ import annotations

import csv
import functools
import io
import sys
from pathlib import Path

import click

from . import files
from .calibration import (
    PairwiseMatrix,
    aggregate_experts,
    ahp_priority,
    ensure_coupling,
    estimate_thresholds,
    kendalls_w,
    weights_to_multipliers,
)
from .errors import CouplingError, DomainError, SchemaError
from .model import Portfolio, Severity, Task
from .promptgen import generate_prompt
from .reliability import RatingsTable
from .reliability import evaluate as evaluate_reliability
from .scoring import (
    DimensionScores,
    LaraResult,
    Level,
    ScoringPolicy,
    SummaryEntry,
    Thresholds,
    WeightVector,
    assign_level,
    consensus_scores,
    portfolio_summary,
)
from .tca import (
    compute_drift,
    emit_changelog,
    evaluate_triggers,
    stratified_sample,
)
from .validation import impact_analysis, lint_decomposition, validate_portfolio

_EXIT_CODES = (
    (SchemaError, 2),
    (CouplingError, 3),
    (DomainError, 1),
)


def _dispatch(fn):
    """Map exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (SchemaError, DomainError) as exc:
            for kind, code in _EXIT_CODES:
                if isinstance(exc, kind):
                    click.echo(f"error: {exc}", err=True)
                    raise SystemExit(code) from exc
            raise  # pragma: no cover

    return wrapper


_format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "structured"]),
    default="text", show_default=True,
    help="Human-readable text or canonical JSON.")

_config_option = click.option(
    "--config", "config_path", envvar="PARTIS_CONFIG", default=None,
    type=click.Path(), metavar="PATH",
    help="Run configuration file (or PARTIS_CONFIG env var).")


def _emit(doc: dict) -> None:
    click.echo(files.dump_json(doc), nl=False)


def _load_config(config_path: str | None) -> files.RunConfig:
    if config_path is None:
        return files.DEFAULT_CONFIG
    return files.load_config(config_path)


@click.group()
@click.version_option(package_name="partis-workbench", prog_name="partis")
def main() -> None:
    """Task decomposition, readiness scoring, and recalibration tools."""


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

@main.command()
@click.argument("portfolio_path", type=click.Path(), metavar="PORTFOLIO")
@click.option("--lint", is_flag=True, help="Add advisory findings (R2, R4, NAME).")
@_format_option
@_dispatch
def validate(portfolio_path: str, lint: bool, fmt: str) -> None:
    """Check a portfolio against the structural rules."""
    portfolio, parse_warnings = files.load_portfolio(portfolio_path)
    diagnostics = validate_portfolio(portfolio)
    if lint:
        diagnostics = diagnostics + lint_decomposition(portfolio)
        diagnostics.sort(key=lambda d: (d.element_id, d.code, d.message))
    counts = {sev: 0 for sev in Severity}
    for diag in diagnostics:
        counts[diag.severity] += 1

    if fmt == "structured":
        _emit({
            "diagnostics": [
                {"code": d.code, "severity": d.severity.value,
                 "element_id": d.element_id, "message": d.message}
                for d in diagnostics
            ],
            "errors": counts[Severity.ERROR],
            "warnings": counts[Severity.WARNING],
            "info": counts[Severity.INFO],
            "parse_warnings": list(parse_warnings),
        })
    else:
        for note in parse_warnings:
            click.echo(f"note: {note}")
        for diag in diagnostics:
            click.echo(f"{diag.severity.value.upper():7s} {diag.code:4s} "
                       f"{diag.element_id}: {diag.message}")
        click.echo(f"{_plural(counts[Severity.ERROR], 'error')}, "
                   f"{_plural(counts[Severity.WARNING], 'warning')}, "
                   f"{_plural(counts[Severity.INFO], 'info note')}")
    if counts[Severity.ERROR]:
        raise SystemExit(1)


def _plural(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def _consensus_by_task(
    portfolio: Portfolio,
    ratings: files.RatingsFile,
    config: files.RunConfig,
) -> dict[str, tuple[Task, DimensionScores]]:
    """Pair every portfolio task with its consensus vector.

    Coverage must be complete in both directions: every task rated by
    every declared rater, and no rating for a task the portfolio does
    not contain.
    """
    task_ids = [task.id for task in portfolio.iter_tasks()]
    known = set(task_ids)
    stray = sorted({tid for tid, _ in ratings.rows} - known)
    if stray:
        raise DomainError(
            "ratings reference tasks not in the portfolio: " + ", ".join(stray))
    missing = [
        (tid, rater)
        for tid in task_ids
        for rater in ratings.raters
        if (tid, rater) not in ratings.rows
    ]
    if missing:
        listed = ", ".join(f"({tid}, {rater})" for tid, rater in missing)
        raise DomainError(f"missing ratings: {listed}")
    out: dict[str, tuple[Task, DimensionScores]] = {}
    for task in portfolio.iter_tasks():
        vectors = [ratings.rows[(task.id, rater)] for rater in ratings.raters]
        out[task.id] = (task, consensus_scores(vectors, config.policy.consensus))
    return out


def _result_doc(task_id: str, result: LaraResult) -> dict:
    boundary = None
    if result.boundary is not None:
        boundary = {
            "threshold": result.boundary.threshold,
            "threshold_value": result.boundary.threshold_value,
            "distance": result.boundary.distance,
        }
    return {
        "task_id": task_id,
        "score": result.score,
        "level": result.level.name,
        "level_pre_floor": result.level_pre_floor.name,
        "floor_applied": result.floor_applied,
        "boundary": boundary,
        "deployment_mode": result.deployment_mode,
    }


@main.command()
@click.argument("portfolio_path", type=click.Path(), metavar="PORTFOLIO")
@click.argument("ratings_path", type=click.Path(), metavar="RATINGS")
@_config_option
@_format_option
@_dispatch
def score(portfolio_path: str, ratings_path: str, config_path: str | None,
          fmt: str) -> None:
    """Score every task and list boundary-zone cases to watch."""
    portfolio, _ = files.load_portfolio(portfolio_path)
    ratings = files.load_ratings(ratings_path)
    config = _load_config(config_path)
    ensure_coupling(config.policy, None, config.weights)

    consensus = _consensus_by_task(portfolio, ratings, config)
    results = [
        (task.id, assign_level(vector, config.weights, config.thresholds,
                               config.policy))
        for task, vector in consensus.values()
    ]
    watch = [(tid, res) for tid, res in results if res.boundary is not None]

    if fmt == "structured":
        _emit({
            "results": [_result_doc(tid, res) for tid, res in results],
            "watch_list": [
                {"task_id": tid,
                 "threshold": res.boundary.threshold,
                 "threshold_value": res.boundary.threshold_value,
                 "distance": res.boundary.distance}
                for tid, res in watch
            ],
        })
        return

    width = max(len(tid) for tid, _ in results)
    for tid, res in results:
        floor_mark = "floor" if res.floor_applied else "-"
        click.echo(f"{tid:<{width}}  {res.level.name}  {res.score:.2f}  "
                   f"{floor_mark:<5}  {res.deployment_mode}")
    click.echo("")
    click.echo("Boundary watch-list:")
    if not watch:
        click.echo("  none")
    for tid, res in watch:
        click.echo(f"  {tid}: score {res.score:.2f} is within "
                   f"{res.boundary.distance:.3f} of {res.boundary.threshold} "
                   f"({res.boundary.threshold_value:g})")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _summary_entries(
    portfolio: Portfolio,
    ratings: files.RatingsFile,
    config: files.RunConfig,
) -> list[SummaryEntry]:
    consensus = _consensus_by_task(portfolio, ratings, config)
    entries = []
    for activity in portfolio.activities:
        for task in activity.tasks:
            _, vector = consensus[task.id]
            result = assign_level(vector, config.weights, config.thresholds,
                                  config.policy)
            rater_levels = tuple(
                assign_level(ratings.rows[(task.id, rater)], config.weights,
                             config.thresholds, config.policy).level
                for rater in ratings.raters)
            entries.append(SummaryEntry(
                task_id=task.id,
                domain=activity.domain,
                activity_id=activity.id,
                result=result,
                rater_levels=rater_levels,
                d4=vector.d4,
                weight_fingerprint=config.policy.weight_fingerprint,
            ))
    return entries


_REPORT_COLUMNS = ("domain", "activities", "tasks", "l1", "l2", "l3", "l4",
                   "l1_pct", "kappa", "mean_d4")


def _row_cells(row) -> list[str]:
    kappa = "-" if row.kappa is None else f"{row.kappa:.2f}"
    return [row.domain, str(row.activities), str(row.tasks),
            str(row.l1), str(row.l2), str(row.l3), str(row.l4),
            f"{row.l1_pct:.1f}", kappa, f"{row.mean_d4:.1f}"]


@main.command()
@click.argument("portfolio_path", type=click.Path(), metavar="PORTFOLIO")
@click.argument("ratings_path", type=click.Path(), metavar="RATINGS")
@_config_option
@click.option("--out-dir", default="partis-report", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory for the CSV table and rendered figures.")
@_format_option
@_dispatch
def report(portfolio_path: str, ratings_path: str, config_path: str | None,
           out_dir: str, fmt: str) -> None:
    """Domain-by-domain summary with agreement and oversight columns.

    Writes summary.csv plus two PNG charts into --out-dir and prints the
    same table."""
    portfolio, _ = files.load_portfolio(portfolio_path)
    ratings = files.load_ratings(ratings_path)
    config = _load_config(config_path)
    ensure_coupling(config.policy, None, config.weights)

    entries = _summary_entries(portfolio, ratings, config)
    summary = portfolio_summary(entries)

    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    csv_path = target / "summary.csv"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_REPORT_COLUMNS)
    for row in (*summary.rows, summary.total):
        writer.writerow(_row_cells(row))
    csv_path.write_text(buffer.getvalue(), encoding="utf-8")

    from .figures import save_domain_level_chart, save_level_distribution

    figure_paths = [
        save_level_distribution(summary, target / "level_distribution.png"),
        save_domain_level_chart(summary, target / "domain_levels.png"),
    ]
    written = [str(csv_path)] + [str(p) for p in figure_paths]

    if fmt == "structured":
        def row_doc(row) -> dict:
            return {
                "domain": row.domain, "activities": row.activities,
                "tasks": row.tasks, "l1": row.l1, "l2": row.l2,
                "l3": row.l3, "l4": row.l4, "l1_pct": row.l1_pct,
                "kappa": row.kappa, "mean_d4": row.mean_d4,
            }

        _emit({
            "rows": [row_doc(r) for r in summary.rows],
            "total": row_doc(summary.total),
            "files": written,
        })
        return

    table = [list(_REPORT_COLUMNS)]
    table.extend(_row_cells(row) for row in (*summary.rows, summary.total))
    widths = [max(len(line[i]) for line in table) for i in range(len(table[0]))]
    for line in table:
        cells = [line[0].ljust(widths[0])]
        cells += [line[i].rjust(widths[i]) for i in range(1, len(line))]
        click.echo("  ".join(cells))
    total = summary.total
    click.echo("")
    click.echo(f"{total.tasks} tasks, L1 {total.l1_pct:.1f}%")
    for path in written:
        click.echo(f"wrote {path}")


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@main.group()
def weights() -> None:
    """Derive dimension weights from expert judgments."""


@weights.command()
@click.argument("matrix_paths", type=click.Path(), metavar="MATRIX...",
                nargs=-1, required=True)
@_format_option
@_dispatch
def ahp(matrix_paths: tuple[str, ...], fmt: str) -> None:
    """Priority weights from pairwise comparisons (several files are
    aggregated by element-wise geometric mean first)."""
    matrices = [PairwiseMatrix.from_rows(files.load_matrix(p))
                for p in matrix_paths]
    merged = matrices[0] if len(matrices) == 1 else aggregate_experts(matrices)
    result = ahp_priority(merged)

    multipliers = None
    if merged.n == 5:
        multipliers = weights_to_multipliers(result.weights)

    if fmt == "structured":
        doc = {
            "n": merged.n,
            "weights": list(result.weights),
            "lambda_max": result.lambda_max,
            "consistency_index": result.consistency_index,
            "random_index": result.random_index,
            "consistency_ratio": result.consistency_ratio,
            "cr_defined": result.cr_defined,
        }
        if multipliers is not None:
            doc["multipliers"] = list(multipliers.as_tuple())
        _emit(doc)
        return

    for i, weight in enumerate(result.weights, start=1):
        click.echo(f"w{i} = {weight:.4f}")
    if result.cr_defined:
        verdict = "acceptable" if result.consistency_ratio < 0.1 else "REVISE"
        click.echo(f"CR = {result.consistency_ratio:.4f} ({verdict}; "
                   "acceptable below 0.1)")
    else:
        click.echo("CR undefined for n < 3 (reported as 0)")
    if multipliers is not None:
        pretty = ", ".join(f"{m:g}" for m in multipliers.as_tuple())
        click.echo(f"multipliers: {pretty}")


@weights.command()
@click.argument("rankings_path", type=click.Path(), metavar="RANKINGS")
@_format_option
@_dispatch
def kendall(rankings_path: str, fmt: str) -> None:
    """Concordance of several judges' rankings (Kendall's W)."""
    rows = files.load_rankings(rankings_path)
    value = kendalls_w(rows)
    if fmt == "structured":
        _emit({"kendalls_w": value, "judges": len(rows),
               "objects": len(rows[0]) if rows else 0})
    else:
        click.echo(f"Kendall's W = {value:.4f} "
                   f"({len(rows)} judges, {len(rows[0])} objects)")


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

@main.group()
def thresholds() -> None:
    """Level-threshold estimation."""


@thresholds.command()
@click.argument("scores_path", type=click.Path(), metavar="SCORES")
@_config_option
@click.option("--jitter", type=float, default=0.0, show_default=True,
              help="Std-dev of noise on the initial centers (stability probe).")
@click.option("--seed", type=int, default=0, show_default=True)
@_format_option
@_dispatch
def estimate(scores_path: str, config_path: str | None, jitter: float,
             seed: int, fmt: str) -> None:
    """Cluster observed scores into four groups and cut thresholds."""
    observed = files.load_scores(scores_path)
    config = _load_config(config_path)
    result = estimate_thresholds(observed, config.weights, seed=seed,
                                 jitter=jitter)
    if fmt == "structured":
        _emit({
            "thresholds": {
                "t12": result.thresholds.t12,
                "t23": result.thresholds.t23,
                "t34": result.thresholds.t34,
                "boundary_halfwidth": result.thresholds.boundary_halfwidth,
            },
            "centers": list(result.centers),
            "silhouette": result.silhouette,
            "weight_fingerprint": result.weight_fingerprint,
            "converged": result.converged,
            "iterations": result.iterations,
        })
        return
    t = result.thresholds
    click.echo(f"t12 = {t.t12:.4f}")
    click.echo(f"t23 = {t.t23:.4f}")
    click.echo(f"t34 = {t.t34:.4f}")
    click.echo("centers: " + ", ".join(f"{c:.4f}" for c in result.centers))
    click.echo(f"silhouette = {result.silhouette:.3f}")
    status = "converged" if result.converged else "NOT converged"
    click.echo(f"{status} after {result.iterations} iterations")
    click.echo(f"weight fingerprint: {result.weight_fingerprint}")


# ---------------------------------------------------------------------------
# reliability
# ---------------------------------------------------------------------------

_STATISTIC_BY_COMMAND = {
    "fleiss": "fleiss_kappa",
    "ac1": "gwet_ac1",
    "cohen": "cohen_kappa",
}

_DIMENSION_CATEGORIES = tuple(str(v) for v in range(1, 6))


def _ratings_to_table(ratings: files.RatingsFile, on: str,
                      config: files.RunConfig) -> RatingsTable:
    """Categorical view of the ratings: assigned levels or one dimension."""
    assignments = {}
    if on == "levels":
        categories = tuple(level.name for level in Level)
        for (tid, rater), vector in ratings.rows.items():
            level = assign_level(vector, config.weights, config.thresholds,
                                 config.policy).level
            assignments[(tid, rater)] = level.name
    else:
        categories = _DIMENSION_CATEGORIES
        index = int(on[1])
        for (tid, rater), vector in ratings.rows.items():
            assignments[(tid, rater)] = str(vector.as_tuple()[index - 1])
    return RatingsTable(
        items=ratings.task_ids(),
        raters=ratings.raters,
        categories=categories,
        assignments=assignments,
    )


def _reliability_command(name: str):
    statistic = _STATISTIC_BY_COMMAND[name]

    @click.argument("ratings_path", type=click.Path(), metavar="RATINGS")
    @click.option("--on", type=click.Choice(["levels", "d1", "d2", "d3",
                                             "d4", "d5"]),
                  default="levels", show_default=True,
                  help="Rate agreement on assigned levels or one dimension.")
    @_config_option
    @click.option("--bootstrap", "bootstrap_b", type=int, default=None,
                  metavar="B", help="Resample count for a 95% CI.")
    @click.option("--seed", type=int, default=0, show_default=True)
    @_format_option
    @_dispatch
    def command(ratings_path: str, on: str, config_path: str | None,
                bootstrap_b: int | None, seed: int, fmt: str) -> None:
        ratings = files.load_ratings(ratings_path)
        config = _load_config(config_path)
        table = _ratings_to_table(ratings, on, config)
        result = evaluate_reliability(table, statistic,
                                      bootstrap_b=bootstrap_b, seed=seed)
        if fmt == "structured":
            doc = {
                "statistic": result.statistic,
                "value": result.value,
                "band": result.band,
                "n_items": result.n_items,
                "n_raters": result.n_raters,
            }
            if result.ci is not None:
                doc["ci_low"] = result.ci.low
                doc["ci_high"] = result.ci.high
                doc["bootstrap_b"] = bootstrap_b
                doc["seed"] = seed
                doc["degenerate_resamples"] = result.ci.degenerate_resamples
            _emit(doc)
            return
        click.echo(f"{result.statistic} = {result.value:.4f} ({result.band}); "
                   f"N={result.n_items}, raters={result.n_raters}, on {on}")
        if result.ci is not None:
            click.echo(f"bootstrap 95% CI [{result.ci.low:.4f}, "
                       f"{result.ci.high:.4f}] "
                       f"(B={bootstrap_b}, seed={seed}, "
                       f"{result.ci.degenerate_resamples} degenerate)")

    command.__name__ = name
    command.__doc__ = f"{statistic.replace('_', ' ')} with Landis-Koch band."
    return command


@main.group()
def reliability() -> None:
    """Inter-rater agreement statistics."""


for _name in _STATISTIC_BY_COMMAND:
    reliability.command(name=_name)(_reliability_command(_name))


# ---------------------------------------------------------------------------
# tca
# ---------------------------------------------------------------------------

@main.group()
def tca() -> None:
    """Temporal recalibration: sampling, drift, change logs."""


def _baseline_levels(baseline, policy: ScoringPolicy) -> dict[str, Level]:
    return {
        tid: assign_level(vector, baseline.weights, baseline.thresholds,
                          policy).level
        for tid, vector in baseline.scores.items()
    }


@tca.command()
@click.argument("baseline_path", type=click.Path(), metavar="BASELINE")
@click.option("--fraction", type=float, default=0.2, show_default=True,
              help="Share of each level stratum to re-rate (>= 0.20).")
@click.option("--seed", type=int, default=0, show_default=True)
@_config_option
@_format_option
@_dispatch
def sample(baseline_path: str, fraction: float, seed: int,
           config_path: str | None, fmt: str) -> None:
    """Draw the stratified re-rating sample from a baseline."""
    baseline = files.load_baseline(baseline_path)
    config = _load_config(config_path)
    levels = _baseline_levels(baseline, config.policy)
    chosen = stratified_sample(levels, fraction, seed=seed)
    if fmt == "structured":
        _emit({"sampled": list(chosen), "fraction": fraction, "seed": seed,
               "n_baseline": len(levels)})
        return
    for tid in chosen:
        click.echo(tid)
    click.echo(f"sampled {len(chosen)} of {len(levels)} tasks "
               f"(fraction {fraction:g}, seed {seed})")


@tca.command()
@click.argument("baseline_path", type=click.Path(), metavar="BASELINE")
@click.argument("ratings_path", type=click.Path(), metavar="RATINGS")
@_config_option
@click.option("--model-upgrade", is_flag=True,
              help="An execution-model upgrade happened since the baseline.")
@click.option("--regulatory", is_flag=True,
              help="A regulatory change affects the portfolio.")
@click.option("--weight-change-planned", is_flag=True,
              help="Dimension weights are about to change.")
@_format_option
@_dispatch
def drift(baseline_path: str, ratings_path: str, config_path: str | None,
          model_upgrade: bool, regulatory: bool, weight_change_planned: bool,
          fmt: str) -> None:
    """Compare re-rated tasks against the baseline and recommend actions."""
    baseline = files.load_baseline(baseline_path)
    ratings = files.load_ratings(ratings_path)
    config = _load_config(config_path)
    current: dict[str, DimensionScores] = {}
    for tid in ratings.task_ids():
        vectors = []
        for rater in ratings.raters:
            if (tid, rater) not in ratings.rows:
                raise DomainError(f"task {tid} is missing a rating from {rater}")
            vectors.append(ratings.rows[(tid, rater)])
        current[tid] = consensus_scores(vectors, config.policy.consensus)
    report = compute_drift(baseline, current, model_upgrade=model_upgrade,
                           regulatory=regulatory, policy=config.policy)
    recommendation = evaluate_triggers(
        report, model_upgrade=model_upgrade, regulatory=regulatory,
        weight_change_planned=weight_change_planned)

    if fmt == "structured":
        _emit({
            "baseline_timestamp": report.baseline_timestamp.isoformat(),
            "model_label": report.model_label,
            "n_baseline": report.n_baseline,
            "n_sampled": report.n_sampled,
            "sample_fraction": report.sample_fraction,
            "deltas": report.deltas,
            "mean_abs_delta": report.mean_abs_delta,
            "drift_trigger": report.drift_trigger,
            "triggers": list(report.triggers),
            "changed": [
                {"task_id": c.task_id, "old_level": c.old_level.name,
                 "new_level": c.new_level.name}
                for c in report.changed
            ],
            "actions": list(recommendation.actions),
            "next_review": recommendation.next_review.isoformat(),
            "standard_error_note": report.standard_error_note,
        })
        return

    click.echo(f"baseline {report.baseline_timestamp.isoformat()} "
               f"({report.model_label}); re-rated {report.n_sampled} of "
               f"{report.n_baseline} tasks "
               f"({report.sample_fraction:.0%})")
    for name, delta in report.deltas.items():
        click.echo(f"  delta {name}: {delta:+.3f}")
    click.echo(f"mean |delta| = {report.mean_abs_delta:.3f}")
    click.echo("drift trigger: " + ("yes" if report.drift_trigger else "no"))
    if report.changed:
        click.echo("level changes under baseline thresholds:")
        for change in report.changed:
            click.echo(f"  {change.task_id}: {change.old_level.name} -> "
                       f"{change.new_level.name}")
    if recommendation.actions:
        click.echo("actions: " + ", ".join(recommendation.actions))
    else:
        click.echo("actions: none (routine cadence)")
    click.echo(f"next review by {recommendation.next_review.isoformat()}")
    click.echo(f"note: {report.standard_error_note}")


@tca.command()
@click.argument("baseline_path", type=click.Path(), metavar="BASELINE")
@click.argument("ratings_path", type=click.Path(), metavar="RATINGS")
@_config_option
@_format_option
@_dispatch
def changelog(baseline_path: str, ratings_path: str, config_path: str | None,
              fmt: str) -> None:
    """Migration log: which tasks changed level between two full rounds."""
    baseline = files.load_baseline(baseline_path)
    ratings = files.load_ratings(ratings_path)
    config = _load_config(config_path)
    old = {
        tid: assign_level(vector, baseline.weights, baseline.thresholds,
                          config.policy)
        for tid, vector in baseline.scores.items()
    }
    new = {}
    for tid in ratings.task_ids():
        vectors = []
        for rater in ratings.raters:
            if (tid, rater) not in ratings.rows:
                raise DomainError(f"task {tid} is missing a rating from {rater}")
            vectors.append(ratings.rows[(tid, rater)])
        new[tid] = assign_level(
            consensus_scores(vectors, config.policy.consensus),
            config.weights, config.thresholds, config.policy)
    log = emit_changelog(old, new)

    if fmt == "structured":
        _emit({
            "entries": [
                {"task_id": e.task_id, "old_level": e.old_level.name,
                 "new_level": e.new_level.name,
                 "floor_involved": e.floor_involved,
                 "boundary_involved": e.boundary_involved}
                for e in log.entries
            ],
            "unchanged_count": log.unchanged_count,
        })
        return
    for entry in log.entries:
        notes = []
        if entry.floor_involved:
            notes.append("floor")
        if entry.boundary_involved:
            notes.append("boundary")
        suffix = f" ({', '.join(notes)})" if notes else ""
        click.echo(f"{entry.task_id}: {entry.old_level.name} -> "
                   f"{entry.new_level.name}{suffix}")
    click.echo(f"unchanged: {log.unchanged_count}")


# ---------------------------------------------------------------------------
# prompt
# ---------------------------------------------------------------------------

@main.group()
def prompt() -> None:
    """Agent prompt generation from task decompositions."""


@prompt.command()
@click.argument("portfolio_path", type=click.Path(), metavar="PORTFOLIO")
@click.argument("task_id", metavar="TASK_ID")
@_format_option
@_dispatch
def gen(portfolio_path: str, task_id: str, fmt: str) -> None:
    """Emit the five-block prompt document for one task."""
    portfolio, _ = files.load_portfolio(portfolio_path)
    document = generate_prompt(portfolio, task_id)
    if fmt == "structured":
        _emit({"task_id": document.task_id, "text": document.text})
        return
    sys.stdout.write(document.text)


# ---------------------------------------------------------------------------
# impact
# ---------------------------------------------------------------------------

@main.command()
@click.argument("portfolio_path", type=click.Path(), metavar="PORTFOLIO")
@click.argument("institution_id", metavar="INSTITUTION_ID")
@_format_option
@_dispatch
def impact(portfolio_path: str, institution_id: str, fmt: str) -> None:
    """What a change at one institution touches (T -> I -> S -> P)."""
    portfolio, _ = files.load_portfolio(portfolio_path)
    result = impact_analysis(portfolio, institution_id)
    if fmt == "structured":
        _emit({
            "institution_id": result.institution_id,
            "standard_ids": list(result.standard_ids),
            "task_ids": list(result.task_ids),
            "process_ids": list(result.process_ids),
        })
        return
    click.echo(f"impact of a change at {result.institution_id}:")
    click.echo("  standards: " + (", ".join(result.standard_ids) or "none"))
    click.echo("  tasks:     " + (", ".join(result.task_ids) or "none"))
    click.echo("  processes: " + (", ".join(result.process_ids) or "none"))


if __name__ == "__main__":
    main()
